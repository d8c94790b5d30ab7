// Copyright (C) 2026 spoterkit contributors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spoterkit/vocabulary.hpp"

namespace spoterkit {

/// Numerically stable softmax.
std::vector<double> softmax(std::span<const double> logits);

/// Indices of the k largest probabilities, descending; ties broken by ascending index.
/// Throws InvalidK unless 1 <= k <= size.
std::vector<std::size_t> top_k_indices(std::span<const double> probabilities, std::size_t k);

struct ScoredGloss {
    std::size_t index = 0;
    std::string gloss;
    double probability = 0.0;
};

/// Ranked (gloss, probability) pairs taken from the full-class softmax.
struct Prediction {
    std::vector<ScoredGloss> ranked;
};

/// Softmax over `logits`, then the k best classes.
Prediction rank_predictions(std::span<const double> logits, const GlossVocabulary& vocabulary, std::size_t k);

struct ClassificationMetrics {
    double top1_macro = 0.0;
    double top1_micro = 0.0;
    double top5_micro = 0.0;
    /// nullopt for classes without samples; those are excluded from the macro mean.
    std::vector<std::optional<double>> per_class_accuracy;
    std::size_t samples = 0;
};

/// Accumulates per-class hit counts.
class MetricsTally {
public:
    explicit MetricsTally(std::size_t num_classes);

    /// Records one sample given its true class and model scores (logits or probabilities).
    void add(std::size_t true_class, std::span<const double> scores);
    ClassificationMetrics result() const;

private:
    std::size_t num_classes_;
    std::vector<std::size_t> totals_, top1_hits_;
    std::size_t top5_hits_ = 0;
    std::size_t samples_ = 0;
};

}  // namespace spoterkit
