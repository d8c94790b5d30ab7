// Copyright (C) 2026 spoterkit contributors
// SPDX-License-Identifier: Apache-2.0
//
// Shared helpers for the unit and acceptance tests.

#pragma once

#include <unistd.h>

#include <filesystem>
#include <string>

#include "spoterkit/model.hpp"
#include "spoterkit/random.hpp"
#include "spoterkit/skeletal.hpp"
#include "spoterkit/video.hpp"

namespace spoterkit::testing {

/// Removes itself on destruction.
class TempDir {
public:
    TempDir() {
        std::string tmpl = (std::filesystem::temp_directory_path() / "spoterkit-test-XXXXXX").string();
        if (!::mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
        path_ = tmpl;
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const noexcept { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

/// Random sequence in image coordinates. Each slot is present with probability
/// `presence`; shoulders and neck are always present so the body has a scale.
inline PoseSequence random_sequence(Rng& rng, std::size_t frames, double presence = 0.9) {
    PoseSequence seq;
    seq.fps = 25.0;
    seq.source_id = "random";
    for (std::size_t i = 0; i < frames; ++i) {
        SkeletalFrame f;
        for (std::size_t s = 0; s < kSlotCount; ++s) {
            if (rng.uniform() < presence) f.set(s, {rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95)});
        }
        const Point l{rng.uniform(0.55, 0.7), rng.uniform(0.3, 0.4)};
        const Point r{rng.uniform(0.3, 0.45), rng.uniform(0.3, 0.4)};
        f.set(body::left_shoulder, l);
        f.set(body::right_shoulder, r);
        f.set(body::neck, {(l.x + r.x) / 2, (l.y + r.y) / 2});
        seq.frames.push_back(f);
    }
    return seq;
}

/// Width-108 model small enough for finite differences and quick training.
inline ModelConfig tiny_config(std::size_t classes = 5) {
    ModelConfig cfg;
    cfg.num_classes = classes;
    cfg.encoder_layers = 1;
    cfg.decoder_layers = 1;
    cfg.feedforward_dim = 32;
    cfg.dropout = 0.0;
    cfg.max_positions = 64;
    return cfg;
}

/// Configuration used for fixture training in tests.
inline ModelConfig compact_config(std::size_t classes = 5) {
    ModelConfig cfg;
    cfg.num_classes = classes;
    cfg.encoder_layers = 2;
    cfg.decoder_layers = 2;
    cfg.feedforward_dim = 256;
    cfg.dropout = 0.1;
    cfg.max_positions = 64;
    return cfg;
}

/// Scripted estimator: returns frame[i % n] for the i-th call.
class ScriptedEstimator final : public EstimatorAdapter {
public:
    explicit ScriptedEstimator(std::vector<RawEstimatorFrame> frames) : frames_(std::move(frames)) {}

    std::string name() const override { return "scripted"; }
    std::string version() const override { return "1"; }
    const LandmarkMap& landmark_map() const override { return map_; }
    RawEstimatorFrame estimate(const Image&) override { return frames_[calls_++ % frames_.size()]; }

    std::size_t calls() const noexcept { return calls_; }

private:
    LandmarkMap map_ = LandmarkMap::mediapipe();
    std::vector<RawEstimatorFrame> frames_;
    std::size_t calls_ = 0;
};

/// A full MediaPipe-shaped frame with every point present.
inline RawEstimatorFrame full_raw_frame(Rng& rng) {
    RawEstimatorFrame f;
    auto list = [&](std::size_t n) {
        RawLandmarkList l;
        for (std::size_t i = 0; i < n; ++i) l.push_back(RawLandmark{rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9), {}});
        return l;
    };
    f.body = list(33);
    f.left_hand = list(21);
    f.right_hand = list(21);
    return f;
}

/// Writes a solid-colour clip of `frames` frames.
inline void write_test_video(const std::filesystem::path& path, std::size_t frames, double fps = 25.0) {
    std::vector<Image> images;
    for (std::size_t i = 0; i < frames; ++i) {
        Image img;
        img.width = 64;
        img.height = 48;
        img.pixels.assign(64 * 48 * 3, static_cast<std::uint8_t>(40 + 3 * i));
        images.push_back(std::move(img));
    }
    write_video(path, images, fps);
}

}  // namespace spoterkit::testing
