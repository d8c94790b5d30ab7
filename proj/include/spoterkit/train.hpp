// Copyright (C) 2026 spoterkit contributors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "spoterkit/checkpoint.hpp"
#include "spoterkit/dataset.hpp"
#include "spoterkit/metrics.hpp"
#include "spoterkit/preprocess.hpp"

namespace spoterkit {

enum class ModelSelection { BestValTop1, LastEpoch };

enum class OptimizerKind { Sgd, Adam };

struct TrainConfig {
    std::size_t epochs = 100;
    double learning_rate = 0.001;
    OptimizerKind optimizer = OptimizerKind::Sgd;
    std::uint64_t global_seed = 379;
    AugmentationConfig augmentation;
    ModelSelection model_selection = ModelSelection::BestValTop1;
    /// Also score the test split after every epoch (never used for model selection).
    bool track_test = true;

    void validate() const;

    /// Keys: epochs, learning_rate, optimizer (sgd|adam), global_seed,
    /// model_selection (best_val_top1|last_epoch), track_test, plus the augmentation keys.
    KeyValueConfig to_config() const;
    void apply(const KeyValueConfig& cfg);
    std::string digest() const;
};

/// Reads a combined train/model config file (`model.*` keys go to the model config).
void load_run_config(const std::filesystem::path& path, ModelConfig& model_cfg, TrainConfig& train_cfg);

struct TrainInputs {
    const DatasetIndex& index;
    const GlossVocabulary& vocabulary;
    const LandmarkCache& cache;
};

using EpochCallback = std::function<void(const EpochMetrics&)>;

/// Cross-entropy training with per-sample augmentation, batch size 1. num_classes is
/// taken from the vocabulary. Fully reproducible from train_cfg.global_seed.
/// Throws NonFiniteLoss naming the offending sample.
Checkpoint train(const TrainInputs& inputs, ModelConfig model_cfg, const TrainConfig& train_cfg,
                 const EpochCallback& on_epoch = {});

/// Normalizes each sample and scores it with the model.
ClassificationMetrics evaluate_samples(const SpoterModel& model, const std::vector<Sample>& samples);

/// Scores one split with the checkpoint's own vocabulary; throws VocabularyMismatch if
/// the split has a gloss the checkpoint does not know.
ClassificationMetrics evaluate(const Checkpoint& ckpt, const DatasetIndex& index, const LandmarkCache& cache,
                               Split split);

/// Top-k glosses for an already normalized sequence.
Prediction predict_topk(const PoseSequence& normalized, const Checkpoint& ckpt, std::size_t k = 5);

}  // namespace spoterkit
