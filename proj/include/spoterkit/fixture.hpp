// Copyright (C) 2026 spoterkit contributors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "spoterkit/dataset.hpp"

namespace spoterkit {

/// Procedural five-gloss dataset used by tests, the overfit check and demos.
/// Each gloss is a distinct arm/hand motion in image coordinates; samples vary
/// in signer position, scale, speed, amplitude, length and jitter.
struct FixtureOptions {
    std::size_t train_per_class = 8;
    std::size_t val_per_class = 2;
    std::size_t test_per_class = 2;
    std::size_t min_frames = 24;
    std::size_t max_frames = 40;
    std::uint64_t seed = 7;
};

const std::vector<std::string>& fixture_glosses();

/// Estimator version string used for the fixture's cache key.
inline constexpr const char* kFixtureEstimatorVersion = "fixture-1";

/// One synthetic clip of gloss `class_index`.
PoseSequence fixture_sequence(std::size_t class_index, std::uint64_t seed, std::size_t frames);

struct Fixture {
    std::filesystem::path index_path;
    LoadedIndex loaded;
    LandmarkCache cache;
};

/// Writes <dir>/index.json (gloss-array form) and populates <dir>/cache/<key>/.
Fixture write_fixture(const std::filesystem::path& dir, const FixtureOptions& options = {});

}  // namespace spoterkit
