// Copyright (C) 2026 spoterkit contributors
// SPDX-License-Identifier: Apache-2.0
//

#include "spoterkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "spoterkit/errors.hpp"

namespace spoterkit {

std::vector<double> softmax(std::span<const double> logits) {
    std::vector<double> p(logits.size());
    if (logits.empty()) return p;
    const double mx = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - mx);
        sum += p[i];
    }
    for (auto& v : p) v /= sum;
    return p;
}

std::vector<std::size_t> top_k_indices(std::span<const double> probabilities, std::size_t k) {
    if (k < 1 || k > probabilities.size()) {
        throw InvalidK("k must be between 1 and " + std::to_string(probabilities.size()) + ", got " + std::to_string(k));
    }
    std::vector<std::size_t> idx(probabilities.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    auto before = [&](std::size_t a, std::size_t b) {
        if (probabilities[a] != probabilities[b]) return probabilities[a] > probabilities[b];
        return a < b;
    };
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(), before);
    idx.resize(k);
    return idx;
}

Prediction rank_predictions(std::span<const double> logits, const GlossVocabulary& vocabulary, std::size_t k) {
    if (logits.size() != vocabulary.size()) {
        throw DimensionMismatch("model emits " + std::to_string(logits.size()) + " logits for a vocabulary of " +
                                std::to_string(vocabulary.size()));
    }
    const auto probs = softmax(logits);
    Prediction out;
    for (auto i : top_k_indices(probs, k)) out.ranked.push_back({i, vocabulary.gloss(i), probs[i]});
    return out;
}

MetricsTally::MetricsTally(std::size_t num_classes)
    : num_classes_(num_classes), totals_(num_classes, 0), top1_hits_(num_classes, 0) {}

void MetricsTally::add(std::size_t true_class, std::span<const double> scores) {
    if (true_class >= num_classes_ || scores.size() != num_classes_) {
        throw DimensionMismatch("metrics sample does not match the class count");
    }
    const auto ranked = top_k_indices(scores, std::min<std::size_t>(5, num_classes_));
    ++samples_;
    ++totals_[true_class];
    if (ranked.front() == true_class) ++top1_hits_[true_class];
    if (std::find(ranked.begin(), ranked.end(), true_class) != ranked.end()) ++top5_hits_;
}

ClassificationMetrics MetricsTally::result() const {
    ClassificationMetrics m;
    m.samples = samples_;
    m.per_class_accuracy.resize(num_classes_);
    double macro_sum = 0.0;
    std::size_t present_classes = 0;
    std::size_t hits = 0;
    for (std::size_t c = 0; c < num_classes_; ++c) {
        hits += top1_hits_[c];
        if (totals_[c] == 0) continue;
        const double acc = static_cast<double>(top1_hits_[c]) / static_cast<double>(totals_[c]);
        m.per_class_accuracy[c] = acc;
        macro_sum += acc;
        ++present_classes;
    }
    if (present_classes > 0) m.top1_macro = macro_sum / static_cast<double>(present_classes);
    if (samples_ > 0) {
        m.top1_micro = static_cast<double>(hits) / static_cast<double>(samples_);
        m.top5_micro = static_cast<double>(top5_hits_) / static_cast<double>(samples_);
    }
    return m;
}

}  // namespace spoterkit
