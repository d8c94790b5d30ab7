// Copyright (C) 2026 spoterkit contributors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "spoterkit/model.hpp"
#include "spoterkit/vocabulary.hpp"

namespace spoterkit {

struct EpochMetrics {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double train_top1 = 0.0;
    std::optional<double> val_top1_macro;
    std::optional<double> test_top1_macro;
    double seconds = 0.0;

    nlohmann::json to_json() const;
    static EpochMetrics from_json(const nlohmann::json& doc);
};

/// Weights, model config and vocabulary of a trained model.
struct Checkpoint {
    SpoterModel model;
    GlossVocabulary vocabulary;
    std::string train_config_digest;
    std::size_t selected_epoch = 0;
    std::vector<EpochMetrics> history;

    /// Digest of weights + config + vocabulary, e.g. "spoter-3f2a9c01d4e5".
    std::string model_id() const;
};

/// Archive layout: 8-byte magic "SPKTCKPT", u32 format version, u64 header length,
/// JSON header (configs, vocabulary, tensor directory), zero padding to 8 bytes,
/// then every tensor as little-endian float64 in directory order. The metrics
/// history is written next to it as <path>.metrics.jsonl, one record per epoch.
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);

/// Throws FormatError on a malformed archive. A missing metrics file leaves history empty.
Checkpoint load_checkpoint(const std::filesystem::path& path);

std::filesystem::path metrics_path_for(const std::filesystem::path& checkpoint_path);

}  // namespace spoterkit
