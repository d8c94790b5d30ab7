// Copyright (C) 2026 spoterkit contributors
// SPDX-License-Identifier: Apache-2.0
//

#include "spoterkit/sweep.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <chrono>
#include <cstring>
#include <sstream>

#include "spoterkit/errors.hpp"
#include "spoterkit/landmark_io.hpp"
#include "spoterkit/random.hpp"

namespace spoterkit {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::vector<double> parse_numbers(std::string_view text, const std::string& key) {
    std::vector<double> out;
    while (true) {
        const auto comma = text.find(',');
        const std::string_view item = trim(text.substr(0, comma));
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
        if (item.empty() || ec != std::errc() || ptr != item.data() + item.size()) {
            throw SpaceError(key + ": '" + std::string(item) + "' is not a number");
        }
        out.push_back(v);
        if (comma == std::string_view::npos) break;
        text.remove_prefix(comma + 1);
    }
    return out;
}

void check_value(const std::string& field, double v) {
    AugmentationConfig probe;
    probe.set_field(field, v);
    try {
        probe.validate();
    } catch (const ConfigError& e) {
        throw SpaceError(field + ": value " + format_double(v) + " is outside the field's domain (" + e.what() + ")");
    }
}

const char* status_name(TrialStatus s) { return s == TrialStatus::Completed ? "completed" : "failed"; }

json augmentation_json(const AugmentationConfig& a) {
    json out = json::object();
    for (const char* name : AugmentationConfig::field_names()) out[name] = a.field(name);
    return out;
}

AugmentationConfig augmentation_from_json(const json& doc) {
    AugmentationConfig a;
    for (const char* name : AugmentationConfig::field_names()) a.set_field(name, doc.at(name).get<double>());
    return a;
}

// One write(2) per record on an O_APPEND descriptor, then fsync.
void append_line(const fs::path& path, const std::string& line) {
    const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fd < 0) throw FormatError("cannot open '" + path.string() + "': " + std::strerror(errno));
    const std::string data = line + "\n";
    const ssize_t n = ::write(fd, data.data(), data.size());
    const int err = errno;
    ::fsync(fd);
    ::close(fd);
    if (n != static_cast<ssize_t>(data.size())) {
        throw FormatError("short write to '" + path.string() + "': " + std::strerror(err));
    }
}

}  // namespace

// ------------------------------------------------------------------ search space

SearchSpace::SearchSpace(const AugmentationConfig& base) {
    for (const char* name : AugmentationConfig::field_names()) {
        FieldSpace f;
        f.value = base.field(name);
        fields_[name] = f;
    }
}

void SearchSpace::set(const std::string& field, FieldSpace spec) {
    if (!fields_.count(field)) throw SpaceError("unknown field '" + field + "'");
    switch (spec.kind) {
        case FieldSpace::Kind::Fixed:
            check_value(field, spec.value);
            break;
        case FieldSpace::Kind::Range:
            if (!(spec.lo <= spec.hi)) throw SpaceError(field + ": empty range");
            check_value(field, spec.lo);
            check_value(field, spec.hi);
            break;
        case FieldSpace::Kind::Choice:
            if (spec.choices.empty()) throw SpaceError(field + ": empty choice set");
            for (double v : spec.choices) check_value(field, v);
            break;
    }
    fields_[field] = std::move(spec);
}

const FieldSpace& SearchSpace::field(const std::string& name) const {
    auto it = fields_.find(name);
    if (it == fields_.end()) throw SpaceError("unknown field '" + name + "'");
    return it->second;
}

SearchSpace SearchSpace::parse(std::string_view text) {
    KeyValueConfig cfg;
    try {
        cfg = KeyValueConfig::parse(text);
    } catch (const ConfigError& e) {
        throw SpaceError(e.what());
    }
    SearchSpace space;
    for (const auto& [key, raw] : cfg.entries()) {
        std::string_view value = trim(raw);
        const auto colon = value.find(':');
        if (colon == std::string_view::npos) {
            throw SpaceError(key + ": expected 'fixed:', 'range:' or 'choice:'");
        }
        const std::string_view marker = trim(value.substr(0, colon));
        const auto numbers = parse_numbers(value.substr(colon + 1), key);
        FieldSpace f;
        if (marker == "fixed") {
            if (numbers.size() != 1) throw SpaceError(key + ": 'fixed:' takes one value");
            f.kind = FieldSpace::Kind::Fixed;
            f.value = numbers[0];
        } else if (marker == "range") {
            if (numbers.size() != 2) throw SpaceError(key + ": 'range:' takes two values");
            f.kind = FieldSpace::Kind::Range;
            f.lo = numbers[0];
            f.hi = numbers[1];
        } else if (marker == "choice") {
            f.kind = FieldSpace::Kind::Choice;
            f.choices = numbers;
        } else {
            throw SpaceError(key + ": unknown marker '" + std::string(marker) + "'");
        }
        space.set(key, std::move(f));
    }
    return space;
}

SearchSpace SearchSpace::load(const fs::path& path) {
    try {
        return parse(read_text_file(path));
    } catch (const SpaceError& e) {
        throw SpaceError(path.string() + ": " + e.what());
    } catch (const FormatError& e) {
        throw SpaceError(e.what());
    }
}

std::vector<AugmentationConfig> sample_configs(const SearchSpace& space, std::size_t n_trials,
                                               std::uint64_t sweep_seed) {
    if (n_trials < 1) throw SpaceError("n_trials must be at least 1");
    std::vector<AugmentationConfig> out;
    out.reserve(n_trials);
    for (std::size_t t = 0; t < n_trials; ++t) {
        Rng rng(derive_seed({sweep_seed, 0x7377u, t}));
        AugmentationConfig cfg;
        for (const char* name : AugmentationConfig::field_names()) {
            const FieldSpace& f = space.field(name);
            switch (f.kind) {
                case FieldSpace::Kind::Fixed:
                    cfg.set_field(name, f.value);
                    break;
                case FieldSpace::Kind::Range:
                    // uniform() is half-open; clamp guards the rounding at hi.
                    cfg.set_field(name, std::clamp(rng.uniform(f.lo, f.hi), f.lo, f.hi));
                    break;
                case FieldSpace::Kind::Choice:
                    cfg.set_field(name, f.choices[static_cast<std::size_t>(rng.below(f.choices.size()))]);
                    break;
            }
        }
        out.push_back(cfg);
    }
    return out;
}

// ------------------------------------------------------------------ records

json TrialRecord::to_json() const {
    json doc = {{"trial_id", trial_id},
                {"augmentation", augmentation_json(augmentation)},
                {"sweep_seed", sweep_seed},
                {"train_seed", train_seed},
                {"status", status_name(status)},
                {"objective", objective ? json(*objective) : json(nullptr)},
                {"seconds", seconds},
                {"checkpoint", checkpoint}};
    if (!error.empty()) doc["error"] = error;
    return doc;
}

TrialRecord TrialRecord::from_json(const json& doc) {
    TrialRecord r;
    r.trial_id = doc.at("trial_id").get<std::size_t>();
    r.augmentation = augmentation_from_json(doc.at("augmentation"));
    r.sweep_seed = doc.at("sweep_seed").get<std::uint64_t>();
    r.train_seed = doc.at("train_seed").get<std::uint64_t>();
    const auto status = doc.at("status").get<std::string>();
    if (status == "completed") r.status = TrialStatus::Completed;
    else if (status == "failed") r.status = TrialStatus::Failed;
    else throw FormatError("unknown trial status '" + status + "'");
    if (!doc.at("objective").is_null()) r.objective = doc["objective"].get<double>();
    if ((r.status == TrialStatus::Completed) != r.objective.has_value()) {
        throw FormatError("trial " + std::to_string(r.trial_id) + ": objective must be present iff completed");
    }
    r.seconds = doc.value("seconds", 0.0);
    r.checkpoint = doc.value("checkpoint", std::string{});
    r.error = doc.value("error", std::string{});
    return r;
}

fs::path ledger_path(const fs::path& out_dir) { return out_dir / "ledger.jsonl"; }
fs::path best_path(const fs::path& out_dir) { return out_dir / "best.json"; }

std::vector<TrialRecord> read_ledger(const fs::path& path) {
    std::vector<TrialRecord> out;
    if (!fs::exists(path)) return out;
    std::istringstream lines(read_text_file(path));
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(lines, line)) {
        ++line_no;
        if (line.empty()) continue;
        json doc = json::parse(line, nullptr, false);
        if (doc.is_discarded()) {
            if (lines.peek() == std::char_traits<char>::eof()) break;  // torn final record
            throw FormatError(path.string() + ": line " + std::to_string(line_no) + " is not valid JSON");
        }
        try {
            out.push_back(TrialRecord::from_json(doc));
        } catch (const json::exception& e) {
            throw FormatError(path.string() + ": line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

std::optional<TrialRecord> select_best(const std::vector<TrialRecord>& records) {
    std::optional<TrialRecord> best;
    for (const auto& r : records) {
        if (r.status != TrialStatus::Completed) continue;
        if (!best || *r.objective > *best->objective ||
            (*r.objective == *best->objective && r.trial_id < best->trial_id)) {
            best = r;
        }
    }
    return best;
}

// ------------------------------------------------------------------ running

TrialRunner training_runner(const TrainInputs& inputs, const ModelConfig& model_cfg, const TrainConfig& base) {
    return [&inputs, model_cfg, base](const TrialSpec& spec) {
        TrainConfig cfg = base;
        cfg.augmentation = spec.augmentation;
        cfg.global_seed = spec.train_seed;
        cfg.track_test = false;
        Checkpoint ckpt = train(inputs, model_cfg, cfg);
        if (!spec.checkpoint_path.empty()) save_checkpoint(ckpt, spec.checkpoint_path);
        if (inputs.index.entries_for(Split::Validation).empty()) {
            throw EmptyInput("validation split is empty; the sweep objective is undefined");
        }
        return evaluate(ckpt, inputs.index, inputs.cache, Split::Validation).top1_macro;
    };
}

SweepResult run_sweep(const SearchSpace& space, const SweepOptions& options, const TrialRunner& runner) {
    if (options.out_dir.empty()) throw ConfigError("sweep output directory is required");
    fs::create_directories(options.out_dir);
    const auto configs = sample_configs(space, options.n_trials, options.sweep_seed);
    const fs::path ledger = ledger_path(options.out_dir);

    std::map<std::size_t, TrialRecord> done;
    for (auto& r : read_ledger(ledger)) {
        if (r.trial_id < 1 || r.trial_id > configs.size()) continue;  // from a longer sweep
        if (r.sweep_seed != options.sweep_seed || r.train_seed != options.train_seed ||
            !(r.augmentation == configs[r.trial_id - 1])) {
            throw ConfigError(ledger.string() + ": trial " + std::to_string(r.trial_id) +
                              " was recorded with a different space or seed");
        }
        done.emplace(r.trial_id, std::move(r));
    }

    SweepResult result;
    for (std::size_t id = 1; id <= configs.size(); ++id) {
        if (done.count(id)) continue;
        if (options.max_new_trials && result.newly_run >= *options.max_new_trials) break;
        char name[32];
        std::snprintf(name, sizeof name, "trial-%03zu.ckpt", id);
        TrialSpec spec{id, configs[id - 1], options.train_seed, options.out_dir / name};

        TrialRecord rec;
        rec.trial_id = id;
        rec.augmentation = spec.augmentation;
        rec.sweep_seed = options.sweep_seed;
        rec.train_seed = options.train_seed;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            const double objective = runner(spec);
            if (!std::isfinite(objective)) throw NonFiniteLoss("objective of trial " + std::to_string(id));
            rec.status = TrialStatus::Completed;
            rec.objective = objective;
            if (fs::exists(spec.checkpoint_path)) rec.checkpoint = spec.checkpoint_path.string();
        } catch (const std::exception& e) {
            rec.status = TrialStatus::Failed;
            rec.error = e.what();
        }
        rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        append_line(ledger, rec.to_json().dump());
        done.emplace(id, rec);
        ++result.newly_run;
    }

    for (auto& [id, rec] : done) result.ledger.push_back(rec);
    result.best = select_best(result.ledger);
    json summary = {{"trials_recorded", result.ledger.size()},
                    {"trials_planned", configs.size()},
                    {"best", result.best ? result.best->to_json() : json(nullptr)}};
    write_file_atomic(best_path(options.out_dir), summary.dump(2) + "\n");
    return result;
}

}  // namespace spoterkit
