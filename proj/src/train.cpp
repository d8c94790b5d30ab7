// Copyright (C) 2026 spoterkit contributors
// SPDX-License-Identifier: Apache-2.0
//

#include "spoterkit/train.hpp"

#include <chrono>
#include <cmath>

#include "spoterkit/digest.hpp"
#include "spoterkit/errors.hpp"
#include "spoterkit/landmark_io.hpp"
#include "spoterkit/random.hpp"

namespace spoterkit {

namespace {

constexpr std::uint64_t kInitStream = 0x696e6974;     // "init"
constexpr std::uint64_t kDropoutStream = 0x64726f70;  // "drop"

std::size_t argmax(std::span<const double> v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] > v[best]) best = i;
    }
    return best;
}

bool augmentation_enabled(const AugmentationConfig& a) {
    return a.rotate.probability > 0 || a.squeeze.probability > 0 || a.perspective.probability > 0 ||
           a.arm_rotate.probability > 0;
}

struct PreparedSample {
    std::string source_id;
    PoseSequence normalized;
    Matrix input;
    std::size_t label = 0;
};

std::vector<PreparedSample> prepare(const TrainInputs& in, Split split) {
    std::vector<PreparedSample> out;
    for (auto& s : load_split(in.index, in.vocabulary, in.cache, split)) {
        PreparedSample p;
        p.source_id = s.source_id;
        p.normalized = normalize_sequence(s.sequence).sequence;
        p.input = sequence_to_input(p.normalized);
        p.label = s.label;
        out.push_back(std::move(p));
    }
    return out;
}

double macro_top1(const SpoterModel& model, const std::vector<PreparedSample>& samples) {
    MetricsTally tally(model.config().num_classes);
    for (const auto& s : samples) tally.add(s.label, model.forward(s.input));
    return tally.result().top1_macro;
}

class Optimizer {
public:
    Optimizer(OptimizerKind kind, double lr, std::size_t size) : kind_(kind), lr_(lr) {
        if (kind_ == OptimizerKind::Adam) {
            m_.assign(size, 0.0);
            v_.assign(size, 0.0);
        }
    }

    void step(std::span<double> w, std::span<const double> g) {
        if (kind_ == OptimizerKind::Sgd) {
            for (std::size_t i = 0; i < w.size(); ++i) w[i] -= lr_ * g[i];
            return;
        }
        constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
        ++t_;
        const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
        const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
        for (std::size_t i = 0; i < w.size(); ++i) {
            m_[i] = b1 * m_[i] + (1 - b1) * g[i];
            v_[i] = b2 * v_[i] + (1 - b2) * g[i] * g[i];
            w[i] -= lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps);
        }
    }

private:
    OptimizerKind kind_;
    double lr_;
    std::vector<double> m_, v_;
    std::uint64_t t_ = 0;
};

}  // namespace

// ------------------------------------------------------------------ TrainConfig

void TrainConfig::validate() const {
    if (epochs < 1) throw ConfigError("epochs must be at least 1");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning_rate must be positive");
    augmentation.validate();
}

KeyValueConfig TrainConfig::to_config() const {
    KeyValueConfig cfg = augmentation.to_config();
    cfg.set("epochs", std::to_string(epochs));
    cfg.set("learning_rate", format_double(learning_rate));
    cfg.set("optimizer", optimizer == OptimizerKind::Sgd ? "sgd" : "adam");
    cfg.set("global_seed", std::to_string(global_seed));
    cfg.set("model_selection", model_selection == ModelSelection::BestValTop1 ? "best_val_top1" : "last_epoch");
    cfg.set("track_test", track_test ? "true" : "false");
    return cfg;
}

void TrainConfig::apply(const KeyValueConfig& cfg) {
    if (auto v = cfg.get_int("epochs")) {
        if (*v < 1) throw ConfigError("epochs must be at least 1");
        epochs = static_cast<std::size_t>(*v);
    }
    if (auto v = cfg.get_double("learning_rate")) learning_rate = *v;
    if (auto v = cfg.get("optimizer")) {
        if (*v == "sgd") optimizer = OptimizerKind::Sgd;
        else if (*v == "adam") optimizer = OptimizerKind::Adam;
        else throw ConfigError("optimizer must be 'sgd' or 'adam'");
    }
    if (auto v = cfg.get_int("global_seed")) global_seed = static_cast<std::uint64_t>(*v);
    if (auto v = cfg.get("model_selection")) {
        if (*v == "best_val_top1") model_selection = ModelSelection::BestValTop1;
        else if (*v == "last_epoch") model_selection = ModelSelection::LastEpoch;
        else throw ConfigError("model_selection must be 'best_val_top1' or 'last_epoch'");
    }
    if (auto v = cfg.get("track_test")) {
        if (*v != "true" && *v != "false") throw ConfigError("track_test must be true or false");
        track_test = *v == "true";
    }
    augmentation.apply(cfg);
}

std::string TrainConfig::digest() const { return digest_hex(to_config().to_string()); }

void load_run_config(const std::filesystem::path& path, ModelConfig& model_cfg, TrainConfig& train_cfg) {
    const KeyValueConfig cfg = KeyValueConfig::load(path);
    static const std::array<const char*, 6> train_keys = {"epochs", "learning_rate", "optimizer",
                                                          "global_seed", "model_selection", "track_test"};
    for (const auto& [key, value] : cfg.entries()) {
        if (key.starts_with("model.")) continue;
        const bool known = std::find(train_keys.begin(), train_keys.end(), key) != train_keys.end() ||
                           std::find_if(AugmentationConfig::field_names().begin(), AugmentationConfig::field_names().end(),
                                        [&](const char* n) { return key == n; }) != AugmentationConfig::field_names().end();
        if (!known) throw ConfigError(path.string() + ": unknown key '" + key + "'");
    }
    model_cfg.apply(cfg);
    train_cfg.apply(cfg);
    train_cfg.validate();
}

// ------------------------------------------------------------------ training

Checkpoint train(const TrainInputs& inputs, ModelConfig model_cfg, const TrainConfig& train_cfg,
                 const EpochCallback& on_epoch) {
    train_cfg.validate();
    if (inputs.vocabulary.empty()) throw ConfigError("cannot train with an empty vocabulary");
    model_cfg.num_classes = inputs.vocabulary.size();
    model_cfg.validate();

    const auto train_set = prepare(inputs, Split::Train);
    if (train_set.empty()) throw EmptyInput("training split is empty");
    const auto val_set = prepare(inputs, Split::Validation);
    std::vector<PreparedSample> test_set;
    if (train_cfg.track_test) {
        const bool test_cached = [&] {
            for (const auto* e : inputs.index.entries_for(Split::Test)) {
                if (!inputs.cache.contains(e->source_id)) return false;
            }
            return true;
        }();
        if (test_cached) test_set = prepare(inputs, Split::Test);
    }

    const std::uint64_t seed = train_cfg.global_seed;
    SpoterModel model(model_cfg, derive_seed({seed, kInitStream}));
    Optimizer optimizer(train_cfg.optimizer, train_cfg.learning_rate, model.weights().size());
    std::vector<double> grads(model.weights().size());
    std::vector<double> dlogits(model_cfg.num_classes);
    const bool do_augment = augmentation_enabled(train_cfg.augmentation);

    std::vector<double> best_weights;
    std::optional<double> best_val;
    std::size_t best_epoch = 0;
    std::vector<EpochMetrics> history;

    for (std::size_t epoch = 1; epoch <= train_cfg.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        double loss_sum = 0.0;
        std::size_t hits = 0;
        for (auto idx : epoch_order(train_set.size(), Split::Train, seed, epoch)) {
            const PreparedSample& s = train_set[idx];
            const std::uint64_t sseed = sample_seed(seed, epoch, idx);
            Matrix input = do_augment ? sequence_to_input(augment(s.normalized, train_cfg.augmentation, sseed))
                                      : s.input;
            Rng dropout_rng(derive_seed({sseed, kDropoutStream}));
            ForwardTape tape;
            const auto logits = model.forward(input, &dropout_rng, tape);
            const double loss = cross_entropy(logits, s.label, dlogits);
            if (!std::isfinite(loss)) throw NonFiniteLoss(s.source_id);
            loss_sum += loss;
            if (argmax(logits) == s.label) ++hits;
            std::fill(grads.begin(), grads.end(), 0.0);
            model.backward(tape, dlogits, grads);
            optimizer.step(model.weights(), grads);
        }

        EpochMetrics m;
        m.epoch = epoch;
        m.train_loss = loss_sum / static_cast<double>(train_set.size());
        m.train_top1 = static_cast<double>(hits) / static_cast<double>(train_set.size());
        if (!val_set.empty()) m.val_top1_macro = macro_top1(model, val_set);
        if (!test_set.empty()) m.test_top1_macro = macro_top1(model, test_set);
        m.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        history.push_back(m);
        if (on_epoch) on_epoch(m);

        if (train_cfg.model_selection == ModelSelection::BestValTop1 && m.val_top1_macro &&
            (!best_val || *m.val_top1_macro > *best_val)) {
            best_val = m.val_top1_macro;
            best_epoch = epoch;
            best_weights.assign(model.weights().begin(), model.weights().end());
        }
    }

    std::size_t selected = train_cfg.epochs;
    if (!best_weights.empty()) {
        std::copy(best_weights.begin(), best_weights.end(), model.weights().begin());
        selected = best_epoch;
    }
    return Checkpoint{std::move(model), inputs.vocabulary, train_cfg.digest(), selected, std::move(history)};
}

// ------------------------------------------------------------------ evaluation

ClassificationMetrics evaluate_samples(const SpoterModel& model, const std::vector<Sample>& samples) {
    MetricsTally tally(model.config().num_classes);
    for (const auto& s : samples) tally.add(s.label, model.forward(normalize_sequence(s.sequence).sequence));
    return tally.result();
}

ClassificationMetrics evaluate(const Checkpoint& ckpt, const DatasetIndex& index, const LandmarkCache& cache,
                               Split split) {
    return evaluate_samples(ckpt.model, load_split(index, ckpt.vocabulary, cache, split));
}

Prediction predict_topk(const PoseSequence& normalized, const Checkpoint& ckpt, std::size_t k) {
    if (k < 1 || k > ckpt.vocabulary.size()) {
        throw InvalidK("k must be between 1 and " + std::to_string(ckpt.vocabulary.size()));
    }
    return rank_predictions(ckpt.model.forward(normalized), ckpt.vocabulary, k);
}

}  // namespace spoterkit
