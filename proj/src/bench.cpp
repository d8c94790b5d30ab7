// Copyright (C) 2026 spoterkit contributors
// SPDX-License-Identifier: Apache-2.0
//

#include "spoterkit/bench.hpp"

#include <sys/utsname.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <thread>

#include <Eigen/Core>

#include "spoterkit/errors.hpp"
#include "spoterkit/metrics.hpp"
#include "spoterkit/random.hpp"

namespace spoterkit {

using nlohmann::json;

json LatencyReport::to_json() const {
    json cells_json = json::array();
    for (const auto& c : cells) {
        cells_json.push_back(
            {{"length", c.length}, {"repetitions", c.repetitions}, {"median_ms", c.median_ms}, {"p95_ms", c.p95_ms}});
    }
    return {{"parameter_count", parameter_count}, {"latency", cells_json}, {"environment", environment}};
}

json environment_descriptor() {
    json env;
#if defined(__clang__)
    env["compiler"] = "clang " __clang_version__;
#elif defined(__GNUC__)
    env["compiler"] = "gcc " __VERSION__;
#else
    env["compiler"] = "unknown";
#endif
#ifdef NDEBUG
    env["build"] = "release";
#else
    env["build"] = "debug";
#endif
    env["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                   std::to_string(EIGEN_MINOR_VERSION);
    env["eigen_threads"] = Eigen::nbThreads();
    env["hardware_threads"] = std::thread::hardware_concurrency();
    utsname u{};
    if (uname(&u) == 0) {
        env["os"] = std::string(u.sysname) + " " + u.release;
        env["machine"] = u.machine;
    }
    return env;
}

double percentile(std::vector<double> samples, double q) {
    if (samples.empty()) throw EmptyInput("percentile of an empty sample");
    std::sort(samples.begin(), samples.end());
    const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(samples.size())));
    return samples[std::clamp<std::size_t>(rank, 1, samples.size()) - 1];
}

double median(std::vector<double> samples) {
    if (samples.empty()) throw EmptyInput("median of an empty sample");
    std::sort(samples.begin(), samples.end());
    const std::size_t n = samples.size();
    return n % 2 ? samples[n / 2] : 0.5 * (samples[n / 2 - 1] + samples[n / 2]);
}

LatencyReport benchmark_inference(const SpoterModel& model, const std::vector<std::size_t>& lengths,
                                  std::size_t repetitions) {
    if (repetitions < 1) throw ConfigError("repetitions must be at least 1");
    LatencyReport report;
    report.parameter_count = model.layout().total();
    report.environment = environment_descriptor();
    Rng rng(derive_seed({0x62656e63u}));
    for (std::size_t len : lengths) {
        if (len < 1) throw ConfigError("sequence lengths must be at least 1");
        Matrix input(static_cast<Eigen::Index>(len), static_cast<Eigen::Index>(model.config().input_dim));
        for (Eigen::Index i = 0; i < input.size(); ++i) input.data()[i] = rng.uniform();
        (void)softmax(model.forward(input));  // warm-up
        std::vector<double> times;
        times.reserve(repetitions);
        for (std::size_t r = 0; r < repetitions; ++r) {
            const auto t0 = std::chrono::steady_clock::now();
            const auto probs = softmax(model.forward(input));
            const auto t1 = std::chrono::steady_clock::now();
            if (probs.empty()) throw DimensionMismatch("model produced no logits");
            times.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
        }
        report.cells.push_back({len, repetitions, median(times), percentile(times, 0.95)});
    }
    return report;
}

}  // namespace spoterkit
