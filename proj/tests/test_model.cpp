// Copyright (C) 2026 spoterkit contributors
// SPDX-License-Identifier: Apache-2.0
//

#include <gtest/gtest.h>

#include <numeric>

#include "spoterkit/checkpoint.hpp"
#include "spoterkit/errors.hpp"
#include "spoterkit/metrics.hpp"
#include "spoterkit/model.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace spoterkit;
using namespace spoterkit::testing;

namespace {

Matrix random_input(Rng& rng, std::size_t frames) {
    Matrix m(static_cast<Eigen::Index>(frames), static_cast<Eigen::Index>(kFeatureDim));
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform();
    return m;
}

double loss_of(const SpoterModel& model, const Matrix& x, std::size_t target) {
    std::vector<double> d(model.config().num_classes);
    return cross_entropy(model.forward(x), target, d);
}

}  // namespace

TEST(ParameterCount, MatchesClosedFormAndLayout) {
    for (const ModelConfig& cfg : {ModelConfig{}, tiny_config(), compact_config(7)}) {
        const ParameterLayout layout(cfg);
        std::size_t enumerated = 0;
        for (const auto& t : layout.tensors()) enumerated += t.rows * t.cols;
        EXPECT_EQ(enumerated, closed_form_parameters(cfg));
        EXPECT_EQ(count_parameters(cfg), closed_form_parameters(cfg));
        EXPECT_EQ(layout.total(), enumerated);
    }
}

TEST(ParameterCount, HeadAndLayerAdditivity) {
    ModelConfig a;
    ModelConfig b = a;
    b.num_classes = a.num_classes + 1;
    EXPECT_EQ(count_parameters(b) - count_parameters(a), 108u + 1u);
    EXPECT_EQ(ParameterLayout(a).find("head.weight").size() + ParameterLayout(a).find("head.bias").size(),
              108u * 100u + 100u);
    ModelConfig c = a;
    c.encoder_layers *= 2;
    EXPECT_EQ(count_parameters(c) - count_parameters(a), a.encoder_layers * encoder_layer_parameters(a));
}

TEST(ModelConfig, Validation) {
    ModelConfig cfg;
    EXPECT_NO_THROW(cfg.validate());
    cfg.input_dim = 100;
    EXPECT_THROW(cfg.validate(), DimensionMismatch);
    cfg = {};
    cfg.attention_heads = 7;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = {};
    cfg.dropout = 1.0;
    EXPECT_THROW(cfg.validate(), ConfigError);
    EXPECT_EQ(ModelConfig::from_json(ModelConfig{}.to_json()), ModelConfig{});
}

TEST(Model, AcceptsAnyLengthAndEmitsNumClasses) {
    const SpoterModel model(tiny_config(), 1);
    Rng rng(31);
    for (std::size_t len : {1u, 2u, 63u, 64u, 65u, 300u}) {
        const auto logits = model.forward(random_input(rng, len));
        ASSERT_EQ(logits.size(), 5u);
        for (double v : logits) EXPECT_TRUE(std::isfinite(v));
    }
}

TEST(Model, WrongWeightCountThrows) {
    EXPECT_THROW(SpoterModel(tiny_config(), std::vector<double>(10)), DimensionMismatch);
}

TEST(Model, InitialisationFollowsScheme) {
    const SpoterModel model(tiny_config(), 2);
    const auto& layout = model.layout();
    const auto w = model.weights();
    auto slice = [&](const char* name) {
        const auto& t = layout.find(name);
        return std::vector<double>(w.begin() + t.offset, w.begin() + t.offset + t.size());
    };
    for (double v : slice("encoder.0.self_attn.q_proj.bias")) EXPECT_EQ(v, 0.0);
    for (double v : slice("encoder.0.norm1.weight")) EXPECT_EQ(v, 1.0);
    for (double v : slice("encoder.0.norm1.bias")) EXPECT_EQ(v, 0.0);
    const double bound = std::sqrt(6.0 / (108 + 108));
    for (double v : slice("encoder.0.self_attn.q_proj.weight")) EXPECT_LE(std::abs(v), bound);
    EXPECT_EQ(SpoterModel(tiny_config(), 2).weights()[0], w[0]);
}

TEST(Model, ForwardDeterministic) {
    const SpoterModel model(tiny_config(), 3);
    Rng rng(32);
    const auto x = random_input(rng, 9);
    EXPECT_EQ(model.forward(x), model.forward(x));
}

TEST(Model, TrainingForwardWithoutDropoutMatchesInference) {
    const SpoterModel model(compact_config(), 4);
    Rng rng(33);
    const auto x = random_input(rng, 9);
    ForwardTape tape;
    const auto a = model.forward(x, nullptr, tape);
    const auto b = model.forward(x);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
}

TEST(Model, ReversalChangesLogits) {
    const SpoterModel model(tiny_config(), 5);
    Rng rng(34);
    const auto x = random_input(rng, 12);
    const Matrix reversed = x.colwise().reverse();
    const auto a = model.forward(x);
    const auto b = model.forward(reversed);
    double max_delta = 0;
    for (std::size_t i = 0; i < a.size(); ++i) max_delta = std::max(max_delta, std::abs(a[i] - b[i]));
    EXPECT_GT(max_delta, 1e-6);
}

TEST(Model, GradientMatchesFiniteDifferences) {
    SpoterModel model(tiny_config(), 6);
    Rng rng(35);
    const auto x = random_input(rng, 6);
    const std::size_t target = 2;

    ForwardTape tape;
    std::vector<double> d(5), grads(model.weights().size(), 0.0);
    cross_entropy(model.forward(x, nullptr, tape), target, d);
    model.backward(tape, d, grads);

    const double h = 1e-5;
    std::size_t checked = 0, bad = 0;
    for (std::size_t i = 0; i < grads.size(); ++i) {
        if (rng.uniform() >= 0.01) continue;
        const double w0 = model.weights()[i];
        model.weights()[i] = w0 + h;
        const double up = loss_of(model, x, target);
        model.weights()[i] = w0 - h;
        const double down = loss_of(model, x, target);
        model.weights()[i] = w0;
        const double numeric = (up - down) / (2 * h);
        const double rel = std::abs(numeric - grads[i]) / std::max({std::abs(numeric), std::abs(grads[i]), 1e-6});
        if (rel >= 1e-3) ++bad;
        ++checked;
    }
    EXPECT_GT(checked, 500u);
    EXPECT_EQ(bad, 0u);
}

TEST(Model, BackwardAccumulates) {
    const SpoterModel model(tiny_config(), 7);
    Rng rng(36);
    const auto x = random_input(rng, 4);
    ForwardTape tape;
    std::vector<double> d(5), once(model.weights().size(), 0.0), twice(model.weights().size(), 0.0);
    cross_entropy(model.forward(x, nullptr, tape), 1, d);
    model.backward(tape, d, once);
    model.backward(tape, d, twice);
    model.backward(tape, d, twice);
    for (std::size_t i = 0; i < once.size(); i += 97) EXPECT_NEAR(twice[i], 2 * once[i], 1e-12);
}

TEST(Model, CrossEntropyOracle) {
    const std::vector<double> logits = {2.0, 1.0, 0.0};
    std::vector<double> d(3);
    const double z = std::exp(2.0) + std::exp(1.0) + 1.0;
    EXPECT_NEAR(cross_entropy(logits, 0, d), -std::log(std::exp(2.0) / z), 1e-12);
    EXPECT_NEAR(d[0], std::exp(2.0) / z - 1.0, 1e-12);
    EXPECT_NEAR(d[2], 1.0 / z, 1e-12);
}

TEST(Checkpoint, RoundTripIsBitExact) {
    TempDir dir;
    Checkpoint ckpt{SpoterModel(tiny_config(3), 8), GlossVocabulary({"a", "b", "c"}), "digest", 4, {}};
    EpochMetrics m;
    m.epoch = 1;
    m.train_loss = 0.5;
    m.val_top1_macro = 0.25;
    ckpt.history.push_back(m);
    save_checkpoint(ckpt, dir / "m.ckpt");
    const Checkpoint back = load_checkpoint(dir / "m.ckpt");
    Rng rng(37);
    const auto x = random_input(rng, 10);
    EXPECT_EQ(back.model.forward(x), ckpt.model.forward(x));
    EXPECT_EQ(back.vocabulary, ckpt.vocabulary);
    EXPECT_EQ(back.model.config(), ckpt.model.config());
    EXPECT_EQ(back.selected_epoch, 4u);
    EXPECT_EQ(back.model_id(), ckpt.model_id());
    ASSERT_EQ(back.history.size(), 1u);
    EXPECT_EQ(back.history[0].val_top1_macro, std::optional<double>(0.25));
    EXPECT_FALSE(back.history[0].test_top1_macro.has_value());
}

TEST(Checkpoint, CorruptArchiveThrows) {
    TempDir dir;
    Checkpoint ckpt{SpoterModel(tiny_config(2), 9), GlossVocabulary({"a", "b"}), "", 1, {}};
    save_checkpoint(ckpt, dir / "m.ckpt");
    std::filesystem::resize_file(dir / "m.ckpt", std::filesystem::file_size(dir / "m.ckpt") - 8);
    EXPECT_THROW(load_checkpoint(dir / "m.ckpt"), FormatError);
    EXPECT_THROW(load_checkpoint(dir / "missing.ckpt"), FormatError);
}
