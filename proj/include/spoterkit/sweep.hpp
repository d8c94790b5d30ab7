// Copyright (C) 2026 spoterkit contributors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "spoterkit/train.hpp"

namespace spoterkit {

struct FieldSpace {
    enum class Kind { Fixed, Range, Choice };
    Kind kind = Kind::Fixed;
    double value = 0.0;          // Fixed
    double lo = 0.0, hi = 0.0;   // Range, inclusive
    std::vector<double> choices;  // Choice

    friend bool operator==(const FieldSpace&, const FieldSpace&) = default;
};

/// One entry per AugmentationConfig field. Fields not mentioned in a space file stay
/// fixed at the default configuration.
class SearchSpace {
public:
    /// Every field fixed at `base`.
    explicit SearchSpace(const AugmentationConfig& base = {});

    /// Lines look like `squeeze.max_ratio = range: 0, 0.2`, `rotate.probability = fixed: 0.5`
    /// or `perspective.max_ratio = choice: 0, 0.05, 0.1`. Throws SpaceError.
    static SearchSpace parse(std::string_view text);
    static SearchSpace load(const std::filesystem::path& path);

    /// Throws SpaceError on empty ranges or values outside a field's domain.
    void set(const std::string& field, FieldSpace spec);
    const FieldSpace& field(const std::string& name) const;
    const std::map<std::string, FieldSpace>& fields() const noexcept { return fields_; }

private:
    std::map<std::string, FieldSpace> fields_;
};

/// Independent uniform draws per field. Trial i depends only on (sweep_seed, i), so a
/// shorter list is a prefix of a longer one.
std::vector<AugmentationConfig> sample_configs(const SearchSpace& space, std::size_t n_trials,
                                               std::uint64_t sweep_seed);

enum class TrialStatus { Completed, Failed };

struct TrialRecord {
    std::size_t trial_id = 0;  // 1-based
    AugmentationConfig augmentation;
    std::uint64_t sweep_seed = 0;
    std::uint64_t train_seed = 0;
    TrialStatus status = TrialStatus::Failed;
    /// Validation top-1 macro; present iff completed.
    std::optional<double> objective;
    double seconds = 0.0;
    std::string checkpoint;
    std::string error;

    nlohmann::json to_json() const;
    static TrialRecord from_json(const nlohmann::json& doc);
};

struct TrialSpec {
    std::size_t trial_id = 0;
    AugmentationConfig augmentation;
    std::uint64_t train_seed = 0;
    std::filesystem::path checkpoint_path;
};

/// Trains one trial and returns its validation objective. Exceptions mark the trial failed.
using TrialRunner = std::function<double(const TrialSpec&)>;

/// Full training per trial with test tracking off, scored on the validation split.
TrialRunner training_runner(const TrainInputs& inputs, const ModelConfig& model_cfg, const TrainConfig& base);

struct SweepOptions {
    std::size_t n_trials = 20;
    std::uint64_t sweep_seed = 0;
    std::uint64_t train_seed = 379;
    std::filesystem::path out_dir;
    /// Stop after this many newly run trials (the rest are picked up on resume).
    std::optional<std::size_t> max_new_trials;
};

struct SweepResult {
    std::optional<TrialRecord> best;
    std::vector<TrialRecord> ledger;  // by trial id
    std::size_t newly_run = 0;
};

std::filesystem::path ledger_path(const std::filesystem::path& out_dir);
std::filesystem::path best_path(const std::filesystem::path& out_dir);

/// Reads the line-delimited ledger; a torn trailing line is ignored.
std::vector<TrialRecord> read_ledger(const std::filesystem::path& path);

/// Best completed trial: highest objective, ties to the lower trial id.
std::optional<TrialRecord> select_best(const std::vector<TrialRecord>& records);

/// Runs every trial not already recorded in <out_dir>/ledger.jsonl, appending one record
/// per finished trial, then writes <out_dir>/best.json. Throws ConfigError if the ledger
/// was produced by a different space or seed.
SweepResult run_sweep(const SearchSpace& space, const SweepOptions& options, const TrialRunner& runner);

}  // namespace spoterkit
