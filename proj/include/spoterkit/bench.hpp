// Copyright (C) 2026 spoterkit contributors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "json.hpp"
#include "spoterkit/checkpoint.hpp"

namespace spoterkit {

struct LatencyCell {
    std::size_t length = 0;
    std::size_t repetitions = 0;
    double median_ms = 0.0;
    double p95_ms = 0.0;
};

struct LatencyReport {
    std::size_t parameter_count = 0;
    std::vector<LatencyCell> cells;
    nlohmann::json environment;

    nlohmann::json to_json() const;
};

/// Compiler, Eigen version, build type, host and thread information.
nlohmann::json environment_descriptor();

/// Nearest-rank percentile of `samples` (q in [0, 1]); the median uses the usual midpoint rule.
double percentile(std::vector<double> samples, double q);
double median(std::vector<double> samples);

/// Times forward + softmax on synthetic inputs of each length after one warm-up call.
LatencyReport benchmark_inference(const SpoterModel& model, const std::vector<std::size_t>& lengths,
                                  std::size_t repetitions);

}  // namespace spoterkit
