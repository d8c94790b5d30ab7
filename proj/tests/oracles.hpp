// Copyright (C) 2026 spoterkit contributors
// SPDX-License-Identifier: Apache-2.0
//
// Reference computations written independently of the library.

#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "spoterkit/model.hpp"
#include "spoterkit/skeletal.hpp"

namespace spoterkit::testing {

inline std::size_t closed_form_parameters(const ModelConfig& c) {
    const std::size_t D = c.input_dim, F = c.feedforward_dim, C = c.num_classes;
    const std::size_t attn = 4 * D * D + 4 * D;
    const std::size_t ff = D * F + F + F * D + D;
    const std::size_t norms = 2 * 2 * D;
    const std::size_t layer = attn + ff + norms;
    return c.max_positions * D + D               // positional table, class query
           + c.encoder_layers * layer + 2 * D    // encoder stack + final norm
           + c.decoder_layers * layer + 2 * D    // decoder stack + final norm
           + D * C + C;                          // head
}

/// Sorts every index by descending score, lower index first on ties, then truncates.
inline std::vector<std::size_t> full_sort_top_k(const std::vector<double>& scores, std::size_t k) {
    std::vector<std::size_t> idx(scores.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return scores[a] != scores[b] ? scores[a] > scores[b] : a < b;
    });
    idx.resize(k);
    return idx;
}

/// Macro top-1 over the classes that occur in `labels`.
inline double brute_force_macro_top1(const std::vector<std::vector<double>>& logits,
                                     const std::vector<std::size_t>& labels, std::size_t classes) {
    std::vector<std::size_t> total(classes), hits(classes);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        std::size_t arg = 0;
        for (std::size_t j = 1; j < logits[i].size(); ++j)
            if (logits[i][j] > logits[i][arg]) arg = j;
        ++total[labels[i]];
        hits[labels[i]] += arg == labels[i];
    }
    double sum = 0;
    std::size_t seen = 0;
    for (std::size_t c = 0; c < classes; ++c) {
        if (!total[c]) continue;
        sum += static_cast<double>(hits[c]) / static_cast<double>(total[c]);
        ++seen;
    }
    return sum / static_cast<double>(seen);
}

/// x -> k*x + t on present landmarks.
inline PoseSequence similarity(const PoseSequence& s, double k, Point t) {
    PoseSequence out = s;
    for (auto& f : out.frames) {
        for (std::size_t i = 0; i < kSlotCount; ++i) {
            if (f.present[i]) f.coords[i] = {k * f.coords[i].x + t.x, k * f.coords[i].y + t.y};
        }
    }
    return out;
}

inline double max_coord_diff(const PoseSequence& a, const PoseSequence& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t s = 0; s < kSlotCount; ++s) {
            m = std::max({m, std::abs(a.frames[i].coords[s].x - b.frames[i].coords[s].x),
                          std::abs(a.frames[i].coords[s].y - b.frames[i].coords[s].y)});
        }
    }
    return m;
}

}  // namespace spoterkit::testing
