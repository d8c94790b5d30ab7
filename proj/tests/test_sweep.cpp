// Copyright (C) 2026 spoterkit contributors
// SPDX-License-Identifier: Apache-2.0
//

#include <gtest/gtest.h>

#include <fstream>

#include "spoterkit/errors.hpp"
#include "spoterkit/fixture.hpp"
#include "spoterkit/landmark_io.hpp"
#include "spoterkit/sweep.hpp"
#include "support.hpp"

using namespace spoterkit;
using namespace spoterkit::testing;

namespace {

SearchSpace demo_space() {
    return SearchSpace::parse(
        "rotate.max_degrees = range: 0, 20\n"
        "squeeze.max_ratio = range: 0, 0.2\n"
        "perspective.probability = choice: 0, 0.5, 1\n"
        "arm_rotate.probability = fixed: 0.25\n");
}

// Objective is a pure function of the sampled config.
double synthetic_objective(const TrialSpec& s) { return s.augmentation.rotate.max_degrees / 20.0; }

}  // namespace

TEST(SearchSpace, ParsesMarkersAndDefaultsTheRest) {
    const auto space = demo_space();
    EXPECT_EQ(space.field("rotate.max_degrees").kind, FieldSpace::Kind::Range);
    EXPECT_EQ(space.field("perspective.probability").choices, (std::vector<double>{0, 0.5, 1}));
    EXPECT_EQ(space.field("arm_rotate.probability").value, 0.25);
    EXPECT_EQ(space.field("squeeze.probability").kind, FieldSpace::Kind::Fixed);
    EXPECT_EQ(space.field("squeeze.probability").value, AugmentationConfig{}.squeeze.probability);
}

TEST(SearchSpace, RejectsInvalidInput) {
    EXPECT_THROW(SearchSpace::parse("rotate.max_degrees = range: 5, 1\n"), SpaceError);
    EXPECT_THROW(SearchSpace::parse("squeeze.max_ratio = range: 0, 0.6\n"), SpaceError);
    EXPECT_THROW(SearchSpace::parse("rotate.probability = fixed: 2\n"), SpaceError);
    EXPECT_THROW(SearchSpace::parse("rotate.probability = 0.5\n"), SpaceError);
    EXPECT_THROW(SearchSpace::parse("rotate.probability = between: 0, 1\n"), SpaceError);
    EXPECT_THROW(SearchSpace::parse("rotate.speed = fixed: 1\n"), SpaceError);
    EXPECT_THROW(SearchSpace::parse("rotate.probability = choice: a\n"), SpaceError);
    EXPECT_THROW(sample_configs(demo_space(), 0, 1), SpaceError);
}

TEST(SampleConfigs, FixedSpaceGivesIdenticalConfigs) {
    const auto configs = sample_configs(SearchSpace{}, 3, 9);
    ASSERT_EQ(configs.size(), 3u);
    for (const auto& c : configs) EXPECT_EQ(c, AugmentationConfig{});
}

TEST(SampleConfigs, DeterministicBoundedAndPrefixStable) {
    const auto a = sample_configs(demo_space(), 50, 4);
    EXPECT_EQ(a, sample_configs(demo_space(), 50, 4));
    EXPECT_NE(a, sample_configs(demo_space(), 50, 5));
    const auto prefix = sample_configs(demo_space(), 10, 4);
    EXPECT_TRUE(std::equal(prefix.begin(), prefix.end(), a.begin()));
    for (const auto& c : a) {
        EXPECT_GE(c.squeeze.max_ratio, 0.0);
        EXPECT_LE(c.squeeze.max_ratio, 0.2);
        EXPECT_TRUE(c.perspective.probability == 0 || c.perspective.probability == 0.5 || c.perspective.probability == 1);
        EXPECT_EQ(c.arm_rotate.probability, 0.25);
    }
}

TEST(RunSweep, BestIsArgmax) {
    TempDir dir;
    std::vector<double> objectives = {0.4, 0.7};
    SweepOptions opts;
    opts.n_trials = 2;
    opts.out_dir = dir.path();
    const auto result = run_sweep(SearchSpace{}, opts, [&](const TrialSpec& s) { return objectives[s.trial_id - 1]; });
    ASSERT_TRUE(result.best);
    EXPECT_EQ(result.best->trial_id, 2u);
    EXPECT_EQ(result.best->objective, std::optional<double>(0.7));
    EXPECT_TRUE(std::filesystem::exists(best_path(dir.path())));
}

TEST(RunSweep, TiesGoToEarlierTrialAndSingleTrial) {
    TempDir dir;
    SweepOptions opts;
    opts.n_trials = 3;
    opts.out_dir = dir.path();
    EXPECT_EQ(run_sweep(SearchSpace{}, opts, [](const TrialSpec&) { return 0.5; }).best->trial_id, 1u);
    TempDir one;
    opts.n_trials = 1;
    opts.out_dir = one.path();
    EXPECT_EQ(run_sweep(SearchSpace{}, opts, [](const TrialSpec&) { return 0.1; }).best->trial_id, 1u);
}

TEST(RunSweep, FailuresAreRecordedAndSweepContinues) {
    TempDir dir;
    SweepOptions opts;
    opts.n_trials = 3;
    opts.out_dir = dir.path();
    const auto result = run_sweep(SearchSpace{}, opts, [](const TrialSpec& s) -> double {
        if (s.trial_id == 2) throw std::runtime_error("boom");
        return 0.1 * static_cast<double>(s.trial_id);
    });
    ASSERT_EQ(result.ledger.size(), 3u);
    EXPECT_EQ(result.ledger[1].status, TrialStatus::Failed);
    EXPECT_FALSE(result.ledger[1].objective.has_value());
    EXPECT_EQ(result.ledger[1].error, "boom");
    EXPECT_EQ(result.best->trial_id, 3u);
}

TEST(RunSweep, ResumeSkipsRecordedTrialsAndMatchesUninterrupted) {
    TempDir interrupted, straight;
    SweepOptions opts;
    opts.n_trials = 5;
    opts.sweep_seed = 17;
    std::vector<std::size_t> calls;
    auto runner = [&](const TrialSpec& s) {
        calls.push_back(s.trial_id);
        return synthetic_objective(s);
    };

    opts.out_dir = interrupted.path();
    opts.max_new_trials = 3;
    EXPECT_EQ(run_sweep(demo_space(), opts, runner).newly_run, 3u);
    opts.max_new_trials.reset();
    const auto resumed = run_sweep(demo_space(), opts, runner);
    EXPECT_EQ(calls, (std::vector<std::size_t>{1, 2, 3, 4, 5}));
    EXPECT_EQ(resumed.newly_run, 2u);

    opts.out_dir = straight.path();
    const auto full = run_sweep(demo_space(), opts, synthetic_objective);
    EXPECT_EQ(resumed.best->trial_id, full.best->trial_id);
    EXPECT_EQ(resumed.best->objective, full.best->objective);

    // every trial exactly once in the ledger
    const auto ledger = read_ledger(ledger_path(interrupted.path()));
    ASSERT_EQ(ledger.size(), 5u);
    for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(ledger[i].trial_id, i + 1);

    // a rerun has nothing to do
    EXPECT_EQ(run_sweep(demo_space(), opts, runner).newly_run, 0u);
}

TEST(RunSweep, TornTrailingRecordIsIgnored) {
    TempDir dir;
    SweepOptions opts;
    opts.n_trials = 2;
    opts.out_dir = dir.path();
    opts.max_new_trials = 1;
    run_sweep(SearchSpace{}, opts, [](const TrialSpec&) { return 0.3; });
    std::ofstream(ledger_path(dir.path()), std::ios::app) << "{\"trial_id\": 2, \"augm";
    EXPECT_EQ(read_ledger(ledger_path(dir.path())).size(), 1u);
}

TEST(RunSweep, LedgerFromAnotherSpaceIsRejected) {
    TempDir dir;
    SweepOptions opts;
    opts.n_trials = 2;
    opts.out_dir = dir.path();
    run_sweep(demo_space(), opts, synthetic_objective);
    opts.sweep_seed = 99;
    EXPECT_THROW(run_sweep(demo_space(), opts, synthetic_objective), ConfigError);
}

TEST(RunSweep, TrainingRunnerScoresValidationOnly) {
    TempDir dir;
    const Fixture fx = write_fixture(dir / "data", {2, 1, 1, 6, 8, 11});
    const TrainInputs inputs{fx.loaded.index, fx.loaded.vocabulary, fx.cache};
    TrainConfig base;
    base.epochs = 1;
    base.optimizer = OptimizerKind::Adam;
    SweepOptions opts;
    opts.n_trials = 1;
    opts.out_dir = dir / "sweep";
    opts.train_seed = base.global_seed;
    const auto result = run_sweep(demo_space(), opts, training_runner(inputs, tiny_config(), base));
    ASSERT_TRUE(result.best);
    ASSERT_EQ(result.best->status, TrialStatus::Completed) << result.best->error;
    const Checkpoint ckpt = load_checkpoint(result.best->checkpoint);
    EXPECT_EQ(*result.best->objective, evaluate(ckpt, fx.loaded.index, fx.cache, Split::Validation).top1_macro);
    for (const auto& m : ckpt.history) EXPECT_FALSE(m.test_top1_macro.has_value());
}
