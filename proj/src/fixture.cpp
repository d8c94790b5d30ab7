// Copyright (C) 2026 spoterkit contributors
// SPDX-License-Identifier: Apache-2.0
//

#include "spoterkit/fixture.hpp"

#include <cmath>
#include <numbers>

#include "spoterkit/errors.hpp"
#include "spoterkit/landmark_io.hpp"
#include "spoterkit/random.hpp"

namespace spoterkit {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;

struct HandPose {
    Point wrist;
    double angle = 0.0;   // pointing direction of the middle finger, radians (y down)
    double spread = 1.0;  // 1 open, ~0.3 closed
};

void place_hand(SkeletalFrame& f, Side side, const HandPose& h, double scale, Rng& rng, double jitter) {
    const std::size_t base = hand_offset(side);
    const double mirror = side == Side::Left ? -1.0 : 1.0;
    auto put = [&](std::size_t j, Point p) {
        f.set(base + j, {p.x + jitter * rng.normal(), p.y + jitter * rng.normal()});
    };
    put(0, h.wrist);
    // thumb, index, middle, ring, little: four joints each
    constexpr std::array<double, 5> fan = {-0.9, -0.35, 0.0, 0.3, 0.6};
    constexpr std::array<double, 5> length = {0.7, 1.0, 1.1, 1.0, 0.8};
    for (std::size_t finger = 0; finger < 5; ++finger) {
        const double a = h.angle + mirror * fan[finger] * h.spread;
        for (std::size_t joint = 0; joint < 4; ++joint) {
            // Closed fingers curl back toward the palm.
            const double reach = 0.035 * scale * length[finger] * (0.45 + 0.55 * h.spread) *
                                 (0.6 + 0.4 * static_cast<double>(joint + 1) / (1.0 + (1.0 - h.spread) * joint));
            const double curl = (1.0 - h.spread) * 0.5 * static_cast<double>(joint);
            put(1 + finger * 4 + joint,
                {h.wrist.x + reach * std::cos(a + mirror * curl), h.wrist.y + reach * std::sin(a + mirror * curl)});
        }
    }
}

}  // namespace

const std::vector<std::string>& fixture_glosses() {
    static const std::vector<std::string> g = {"book", "drink", "computer", "before", "go"};
    return g;
}

PoseSequence fixture_sequence(std::size_t class_index, std::uint64_t seed, std::size_t frames) {
    if (class_index >= fixture_glosses().size()) throw ConfigError("fixture class out of range");
    if (frames < 1) throw EmptyInput("fixture sequence needs at least one frame");
    Rng rng(seed);
    const double scale = rng.uniform(0.85, 1.15);
    const Point neck{0.5 + rng.uniform(-0.05, 0.05), 0.4 + rng.uniform(-0.04, 0.04)};
    const double amp = rng.uniform(0.8, 1.2);
    const double phase = rng.uniform(-0.1, 0.1);
    const double jitter = 0.002;
    const double sw = 0.12 * scale;  // half shoulder width

    PoseSequence seq;
    seq.fps = 25.0;
    seq.label = fixture_glosses()[class_index];
    for (std::size_t i = 0; i < frames; ++i) {
        const double t = frames == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(frames - 1) + phase;
        SkeletalFrame f;
        auto put = [&](std::size_t slot, Point p) { f.set(slot, {p.x + jitter * rng.normal(), p.y + jitter * rng.normal()}); };
        // Image left is the signer's right.
        const Point rs{neck.x - sw, neck.y}, ls{neck.x + sw, neck.y};
        const Point nose{neck.x, neck.y - 0.13 * scale};
        put(body::neck, neck);
        put(body::right_shoulder, rs);
        put(body::left_shoulder, ls);
        put(body::nose, nose);
        put(body::right_eye, {nose.x - 0.02 * scale, nose.y - 0.025 * scale});
        put(body::left_eye, {nose.x + 0.02 * scale, nose.y - 0.025 * scale});
        put(body::right_ear, {nose.x - 0.05 * scale, nose.y - 0.01 * scale});
        put(body::left_ear, {nose.x + 0.05 * scale, nose.y - 0.01 * scale});

        const Point chest{neck.x, neck.y + 0.12 * scale};
        HandPose right{{chest.x - 0.06 * scale, chest.y}, -kPi / 2, 1.0};
        HandPose left{{chest.x + 0.06 * scale, chest.y}, -kPi / 2, 1.0};
        bool left_visible = true;
        const double s = scale * amp;
        switch (class_index) {
            case 0:  // hands open apart like a book
                right.wrist = {chest.x - (0.03 + 0.08 * t) * s, chest.y};
                left.wrist = {chest.x + (0.03 + 0.08 * t) * s, chest.y};
                right.angle = -kPi / 2 - 0.8 * t;
                left.angle = -kPi / 2 + 0.8 * t;
                break;
            case 1:  // closed right hand rises to the mouth
                right.wrist = {chest.x - 0.04 * s, chest.y + 0.02 * s - 0.14 * t * s};
                right.spread = 0.3;
                right.angle = -kPi / 2 + 0.5;
                left_visible = false;
                break;
            case 2:  // right hand circles over a static left hand
                right.wrist = {chest.x - 0.03 * s + 0.05 * s * std::cos(2 * kPi * t),
                               chest.y - 0.04 * s + 0.05 * s * std::sin(2 * kPi * t)};
                right.spread = 0.6;
                left.angle = 0.0;
                left.spread = 0.9;
                break;
            case 3:  // right hand sweeps back and forth twice
                right.wrist = {chest.x - 0.05 * s + 0.07 * s * std::sin(4 * kPi * t), chest.y - 0.02 * s};
                right.angle = -kPi;
                left_visible = false;
                break;
            default:  // both index hands move forward and down
                right.wrist = {chest.x - 0.06 * s - 0.02 * t * s, chest.y - 0.08 * s + 0.12 * t * s};
                left.wrist = {chest.x + 0.04 * s - 0.02 * t * s, chest.y - 0.08 * s + 0.12 * t * s};
                right.angle = left.angle = -kPi / 2 + 1.2 * t;
                right.spread = left.spread = 0.4;
                break;
        }
        if (!left_visible) left.wrist = {ls.x + 0.02 * scale, ls.y + 0.3 * scale};

        auto arm = [&](std::size_t elbow_slot, std::size_t wrist_slot, Point shoulder, Point wrist, double outward) {
            const Point elbow{0.5 * (shoulder.x + wrist.x) + outward * 0.04 * scale,
                              0.5 * (shoulder.y + wrist.y) + 0.08 * scale};
            put(elbow_slot, elbow);
            put(wrist_slot, wrist);
        };
        arm(body::right_elbow, body::right_wrist, rs, right.wrist, -1.0);
        arm(body::left_elbow, body::left_wrist, ls, left.wrist, 1.0);

        // Dropouts exercise the absent-landmark path.
        if (rng.uniform() >= 0.03) place_hand(f, Side::Right, right, scale, rng, jitter);
        if (left_visible && rng.uniform() >= 0.03) place_hand(f, Side::Left, left, scale, rng, jitter);
        seq.frames.push_back(f);
    }
    return seq;
}

Fixture write_fixture(const fs::path& dir, const FixtureOptions& options) {
    if (options.min_frames < 1 || options.max_frames < options.min_frames) {
        throw ConfigError("fixture frame range is invalid");
    }
    fs::create_directories(dir);
    const std::string key = LandmarkCache::key_for(LandmarkMap::mediapipe(), kFixtureEstimatorVersion);
    LandmarkCache cache(dir / "cache", key);
    fs::create_directories(cache.directory());

    json index = json::array();
    const auto& glosses = fixture_glosses();
    for (std::size_t c = 0; c < glosses.size(); ++c) {
        json instances = json::array();
        std::size_t n = 0;
        auto emit = [&](const char* split, std::size_t count) {
            for (std::size_t i = 0; i < count; ++i, ++n) {
                const std::string id = "fx" + std::to_string(c) + "_" + std::to_string(n);
                const std::uint64_t seed = derive_seed({options.seed, c, n});
                Rng len_rng(derive_seed({seed, 0x6c656eu}));
                const std::size_t frames =
                    options.min_frames + static_cast<std::size_t>(len_rng.below(options.max_frames - options.min_frames + 1));
                PoseSequence seq = fixture_sequence(c, seed, frames);
                seq.source_id = id;
                cache.store(seq);
                instances.push_back({{"video_id", id}, {"split", split}});
            }
        };
        emit("train", options.train_per_class);
        emit("val", options.val_per_class);
        emit("test", options.test_per_class);
        index.push_back({{"gloss", glosses[c]}, {"instances", instances}});
    }
    const fs::path index_path = dir / "index.json";
    write_file_atomic(index_path, index.dump(2) + "\n");
    return Fixture{index_path, load_index(index_path, glosses.size()), cache};
}

}  // namespace spoterkit
