// Copyright (C) 2026 spoterkit contributors
// SPDX-License-Identifier: Apache-2.0
//

#include <gtest/gtest.h>

#include <cmath>

#include "spoterkit/errors.hpp"
#include "spoterkit/preprocess.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace spoterkit;
using namespace spoterkit::testing;

namespace {

PoseSequence one_point(std::size_t slot, Point p) {
    PoseSequence seq;
    SkeletalFrame f;
    f.set(slot, p);
    seq.frames.push_back(f);
    return seq;
}

}  // namespace

TEST(Rotate, QuarterTurnCounterclockwiseYUp) {
    const auto out = rotate_sequence(one_point(body::nose, {0.7, 0.5}), 90.0);
    EXPECT_NEAR(out.frames[0].coords[body::nose].x, 0.5, 1e-12);
    EXPECT_NEAR(out.frames[0].coords[body::nose].y, 0.3, 1e-12);
}

TEST(Rotate, AbsentLandmarksStayZero) {
    const auto out = rotate_sequence(one_point(body::nose, {0.7, 0.5}), 37.0);
    EXPECT_EQ(out.frames[0].coords[body::neck], (Point{0, 0}));
    EXPECT_EQ(out.frames[0].present, one_point(body::nose, {0.7, 0.5}).frames[0].present);
}

TEST(Squeeze, AffineMapOnX) {
    for (double x : {0.0, 0.25, 0.5, 1.0}) {
        const auto out = squeeze_sequence(one_point(body::nose, {x, 0.3}), 0.1, 0.1);
        EXPECT_NEAR(out.frames[0].coords[body::nose].x, 0.1 + 0.8 * x, 1e-15);
        EXPECT_EQ(out.frames[0].coords[body::nose].y, 0.3);
    }
}

TEST(Perspective, CornersMoveAndInteriorInterpolates) {
    auto top_left = perspective_sequence(one_point(body::nose, {0.0, 0.0}), PerspectiveEdge::Top, 0.1);
    EXPECT_NEAR(top_left.frames[0].coords[body::nose].x, 0.1, 1e-15);
    auto bottom_left = perspective_sequence(one_point(body::nose, {0.0, 1.0}), PerspectiveEdge::Top, 0.1);
    EXPECT_NEAR(bottom_left.frames[0].coords[body::nose].x, 0.0, 1e-15);
    // midpoint of the left edge moves by half the corner displacement
    auto mid = perspective_sequence(one_point(body::nose, {0.0, 0.5}), PerspectiveEdge::Bottom, 0.2);
    EXPECT_NEAR(mid.frames[0].coords[body::nose].x, 0.1, 1e-15);
    EXPECT_NEAR(mid.frames[0].coords[body::nose].y, 0.5, 1e-15);
}

TEST(ArmRotation, HalfTurnAboutWrist) {
    SkeletalFrame f;
    f.set(body::right_wrist, {0.5, 0.5});
    f.set(kRightHandOffset + 8, {0.6, 0.5});
    const auto out = rotate_arm_joints(f, ArmJoint::Wrist, Side::Right, 180.0);
    EXPECT_NEAR(out.coords[kRightHandOffset + 8].x, 0.4, 1e-12);
    EXPECT_NEAR(out.coords[kRightHandOffset + 8].y, 0.5, 1e-12);
    EXPECT_EQ(out.coords[body::right_wrist], (Point{0.5, 0.5}));
}

TEST(ArmRotation, ZeroDegreesAndAbsentPivotAreIdentity) {
    Rng rng(21);
    const auto f = random_sequence(rng, 1).frames[0];
    EXPECT_EQ(rotate_arm_joints(f, ArmJoint::Elbow, Side::Left, 0.0), f);
    auto g = f;
    g.clear(body::left_elbow);
    EXPECT_EQ(rotate_arm_joints(g, ArmJoint::Elbow, Side::Left, 30.0), g);
}

TEST(ArmRotation, ElbowRotationIsRigid) {
    Rng rng(22);
    for (int trial = 0; trial < 50; ++trial) {
        SkeletalFrame f = random_sequence(rng, 1, 1.0).frames[0];
        const auto out = rotate_arm_joints(f, ArmJoint::Elbow, Side::Left, rng.uniform(-180, 180));
        std::vector<std::size_t> chain = {body::left_elbow, body::left_wrist};
        for (std::size_t j = 0; j < kHandSlots; ++j) chain.push_back(kLeftHandOffset + j);
        for (auto a : chain) {
            for (auto b : chain) {
                const double before = std::hypot(f.coords[a].x - f.coords[b].x, f.coords[a].y - f.coords[b].y);
                const double after = std::hypot(out.coords[a].x - out.coords[b].x, out.coords[a].y - out.coords[b].y);
                ASSERT_NEAR(before, after, 1e-9);
            }
        }
        // proximal and other-side landmarks untouched
        EXPECT_EQ(out.coords[body::left_shoulder], f.coords[body::left_shoulder]);
        EXPECT_EQ(out.coords[kRightHandOffset + 3], f.coords[kRightHandOffset + 3]);
    }
}

TEST(Normalize, NeckLandsOnAnchorAndShouldersHaveUnitDistance) {
    Rng rng(23);
    const auto seq = random_sequence(rng, 12, 1.0);
    const auto n = normalize_sequence(seq);
    Point mean{};
    double dist = 0.0;
    for (const auto& f : n.sequence.frames) {
        mean.x += f.coords[body::neck].x / 12;
        mean.y += f.coords[body::neck].y / 12;
        dist += std::hypot(f.coords[body::left_shoulder].x - f.coords[body::right_shoulder].x,
                           f.coords[body::left_shoulder].y - f.coords[body::right_shoulder].y) /
                12;
    }
    EXPECT_NEAR(mean.x, 0.5, 1e-12);
    EXPECT_NEAR(mean.y, 0.5, 1e-12);
    EXPECT_NEAR(dist, 1.0, 1e-12);
    EXPECT_EQ(n.report.body_scale_source, BodyScaleSource::Shoulders);
    EXPECT_FALSE(n.report.body_degenerate);
}

TEST(Normalize, HandsFillTheirUnitSquare) {
    Rng rng(24);
    const auto n = normalize_sequence(random_sequence(rng, 9, 1.0)).sequence;
    for (Side side : {Side::Left, Side::Right}) {
        double lo_x = 1, hi_x = 0, lo_y = 1, hi_y = 0;
        for (const auto& f : n.frames) {
            for (std::size_t j = 0; j < kHandSlots; ++j) {
                const Point p = f.coords[hand_offset(side) + j];
                lo_x = std::min(lo_x, p.x), hi_x = std::max(hi_x, p.x);
                lo_y = std::min(lo_y, p.y), hi_y = std::max(hi_y, p.y);
            }
        }
        EXPECT_NEAR(std::max(hi_x - lo_x, hi_y - lo_y), 1.0, 1e-12);
        EXPECT_NEAR(lo_x + hi_x, 1.0, 1e-12);  // centred
        EXPECT_NEAR(lo_y + hi_y, 1.0, 1e-12);
    }
}

TEST(Normalize, TranslationAndScaleInvariant) {
    Rng rng(25);
    const auto s = random_sequence(rng, 8, 0.8);
    const auto base = normalize_sequence(s).sequence;
    EXPECT_LT(max_coord_diff(base, normalize_sequence(similarity(s, 1.0, {0.1, 0.2})).sequence), 1e-7);
    EXPECT_LT(max_coord_diff(base, normalize_sequence(similarity(s, 2.0, {0.0, 0.0})).sequence), 1e-7);
}

TEST(Normalize, Idempotent) {
    Rng rng(26);
    const auto once = normalize_sequence(random_sequence(rng, 8, 0.8)).sequence;
    EXPECT_LT(max_coord_diff(once, normalize_sequence(once).sequence), 1e-9);
}

TEST(Normalize, AllAbsentPassesThroughFlagged) {
    PoseSequence seq;
    seq.frames.resize(4);
    const auto n = normalize_sequence(seq);
    EXPECT_EQ(n.sequence, seq);
    EXPECT_TRUE(n.report.body_degenerate);
    EXPECT_TRUE(n.report.hand_degenerate[0]);
    EXPECT_TRUE(n.report.hand_degenerate[1]);
    EXPECT_EQ(n.report.body_scale_used, 1.0);
}

TEST(Normalize, FallsBackToHeadWhenShouldersAreRare) {
    PoseSequence seq;
    for (int i = 0; i < 4; ++i) {
        SkeletalFrame f;
        f.set(body::neck, {0.5, 0.6});
        f.set(body::nose, {0.5, 0.4});
        if (i == 0) {
            f.set(body::left_shoulder, {0.6, 0.6});
            f.set(body::right_shoulder, {0.4, 0.6});
        }
        seq.frames.push_back(f);
    }
    const auto n = normalize_sequence(seq);
    EXPECT_EQ(n.report.body_scale_source, BodyScaleSource::HeadToNeck);
    EXPECT_NEAR(n.report.body_scale_used, 0.2, 1e-12);
}

TEST(Augment, DisabledIsIdentity) {
    Rng rng(27);
    const auto s = random_sequence(rng, 5);
    EXPECT_EQ(augment(s, AugmentationConfig::disabled(), 99), s);
}

TEST(Augment, DeterministicAndPresencePreserving) {
    Rng rng(28);
    const auto s = normalize_sequence(random_sequence(rng, 6, 0.6)).sequence;
    AugmentationConfig cfg;
    cfg.rotate.probability = cfg.squeeze.probability = cfg.perspective.probability = cfg.arm_rotate.probability = 1.0;
    for (auto space : {CoordinateSpace::Normalized, CoordinateSpace::Image}) {
        const auto a = augment(s, cfg, 1234, space);
        EXPECT_EQ(a, augment(s, cfg, 1234, space));
        EXPECT_NE(a, augment(s, cfg, 1235, space));
        for (std::size_t i = 0; i < s.size(); ++i) {
            EXPECT_EQ(a.frames[i].present, s.frames[i].present);
            for (std::size_t k = 0; k < kSlotCount; ++k) {
                if (!a.frames[i].present[k]) {
                    EXPECT_EQ(a.frames[i].coords[k], (Point{0, 0}));
                }
            }
        }
    }
}

TEST(Augment, InvalidConfigThrows) {
    AugmentationConfig cfg;
    cfg.squeeze.max_ratio = 0.5;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = {};
    cfg.rotate.probability = 1.5;
    PoseSequence one;
    one.frames.resize(1);
    EXPECT_THROW(augment(one, cfg, 1), ConfigError);
}

TEST(Augment, ConfigKeysRoundTrip) {
    AugmentationConfig cfg;
    cfg.rotate.max_degrees = 7.5;
    cfg.perspective.probability = 0.25;
    AugmentationConfig back = AugmentationConfig::disabled();
    back.apply(cfg.to_config());
    EXPECT_EQ(back, cfg);
    EXPECT_EQ(cfg.field("rotate.max_degrees"), 7.5);
    EXPECT_THROW(cfg.field("rotate.nope"), ConfigError);
}

TEST(Augment, SampleSeedIgnoresVisitOrder) {
    EXPECT_EQ(sample_seed(1, 2, 3), sample_seed(1, 2, 3));
    EXPECT_NE(sample_seed(1, 2, 3), sample_seed(1, 3, 2));
}
