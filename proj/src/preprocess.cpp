// Copyright (C) 2026 spoterkit contributors
// SPDX-License-Identifier: Apache-2.0
//

#include "spoterkit/preprocess.hpp"

#include <cmath>
#include <numbers>

#include "spoterkit/errors.hpp"
#include "spoterkit/landmark_io.hpp"
#include "spoterkit/random.hpp"

namespace spoterkit {

namespace {

constexpr double kMinExtent = 1e-12;

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Mean distance between two slots over frames where both are present.
std::optional<double> mean_distance(const PoseSequence& seq, std::size_t a, std::size_t b, std::size_t& count) {
    double sum = 0.0;
    count = 0;
    for (const auto& f : seq.frames) {
        if (f.present[a] && f.present[b]) {
            sum += distance(f.coords[a], f.coords[b]);
            ++count;
        }
    }
    if (count == 0) return std::nullopt;
    const double mean = sum / static_cast<double>(count);
    if (!(mean > kMinExtent)) return std::nullopt;
    return mean;
}

template <typename Fn>
void for_present(PoseSequence& seq, std::size_t begin, std::size_t end, Fn&& fn) {
    for (auto& f : seq.frames) {
        for (std::size_t s = begin; s < end; ++s) {
            if (f.present[s]) f.coords[s] = fn(f.coords[s]);
        }
    }
}

void normalize_body(PoseSequence& seq, NormalizationReport& report) {
    Point anchor{};
    std::size_t neck_count = 0;
    for (const auto& f : seq.frames) {
        if (f.present[body::neck]) {
            anchor.x += f.coords[body::neck].x;
            anchor.y += f.coords[body::neck].y;
            ++neck_count;
        }
    }
    if (neck_count == 0) {
        report.body_degenerate = true;
        report.body_scale_used = 1.0;
        report.body_scale_source = BodyScaleSource::Fallback;
        return;
    }
    anchor.x /= static_cast<double>(neck_count);
    anchor.y /= static_cast<double>(neck_count);
    report.body_anchor = anchor;

    std::size_t shoulder_frames = 0;
    std::size_t head_frames = 0;
    const auto shoulders = mean_distance(seq, body::left_shoulder, body::right_shoulder, shoulder_frames);
    const auto head = mean_distance(seq, body::nose, body::neck, head_frames);
    const bool shoulders_mostly_present = 2 * shoulder_frames >= seq.frames.size();

    double scale = 1.0;
    if (shoulders && shoulders_mostly_present) {
        scale = *shoulders;
        report.body_scale_source = BodyScaleSource::Shoulders;
    } else if (head) {
        scale = *head;
        report.body_scale_source = BodyScaleSource::HeadToNeck;
    } else if (shoulders) {
        scale = *shoulders;
        report.body_scale_source = BodyScaleSource::Shoulders;
    } else {
        report.body_scale_source = BodyScaleSource::Fallback;
        report.body_degenerate = true;
    }
    report.body_scale_used = scale;

    for_present(seq, 0, kBodySlots, [&](Point p) {
        return Point{(p.x - anchor.x) / scale + kBodyAnchorTarget.x, (p.y - anchor.y) / scale + kBodyAnchorTarget.y};
    });
}

void normalize_hand(PoseSequence& seq, Side side, NormalizationReport& report) {
    const std::size_t begin = hand_offset(side);
    const std::size_t end = begin + kHandSlots;
    const auto idx = side == Side::Left ? 0 : 1;

    bool any = false;
    BoundingBox box{{INFINITY, INFINITY}, {-INFINITY, -INFINITY}};
    for (const auto& f : seq.frames) {
        for (std::size_t s = begin; s < end; ++s) {
            if (!f.present[s]) continue;
            any = true;
            box.min.x = std::min(box.min.x, f.coords[s].x);
            box.min.y = std::min(box.min.y, f.coords[s].y);
            box.max.x = std::max(box.max.x, f.coords[s].x);
            box.max.y = std::max(box.max.y, f.coords[s].y);
        }
    }
    if (!any) {
        report.hand_degenerate[idx] = true;
        return;
    }
    report.hand_boxes[idx] = box;
    const double side_len = std::max(box.width(), box.height());
    if (!(side_len > kMinExtent)) {
        report.hand_degenerate[idx] = true;
        return;
    }
    // the shorter axis is centred inside the unit square
    const double off_x = (1.0 - box.width() / side_len) / 2.0;
    const double off_y = (1.0 - box.height() / side_len) / 2.0;
    for_present(seq, begin, end, [&](Point p) {
        return Point{(p.x - box.min.x) / side_len + off_x, (p.y - box.min.y) / side_len + off_y};
    });
}

void rotate_chain(SkeletalFrame& f, std::size_t begin, std::size_t end, Point pivot, double degrees) {
    for (std::size_t s = begin; s < end; ++s) {
        if (f.present[s]) f.coords[s] = rotate_point(f.coords[s], pivot, degrees);
    }
}

std::size_t elbow_slot(Side side) { return side == Side::Left ? body::left_elbow : body::right_elbow; }
std::size_t wrist_slot(Side side) { return side == Side::Left ? body::left_wrist : body::right_wrist; }

/// Arm rotation when hands are in their own normalized frame: the body part of the
/// chain rotates about the body pivot, the hand rotates by the same angle about its
/// own wrist landmark (or the centre of its frame when that is absent).
void rotate_arm_normalized(SkeletalFrame& f, ArmJoint joint, Side side, double degrees) {
    const std::size_t pivot = joint == ArmJoint::Elbow ? elbow_slot(side) : wrist_slot(side);
    if (!f.present[pivot] || degrees == 0.0) return;
    if (joint == ArmJoint::Elbow && f.present[wrist_slot(side)]) {
        f.coords[wrist_slot(side)] = rotate_point(f.coords[wrist_slot(side)], f.coords[pivot], degrees);
    }
    const std::size_t h = hand_offset(side);
    const Point hand_pivot = f.present[h] ? f.coords[h] : Point{0.5, 0.5};
    rotate_chain(f, h, h + kHandSlots, hand_pivot, degrees);
}

void check_probability(double p, const char* key) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(std::string(key) + " must be in [0, 1]");
}

void check_magnitude(double v, const char* key) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError(std::string(key) + " must be a finite non-negative number");
}

void check_ratio(double v, const char* key) {
    check_magnitude(v, key);
    if (!(v < 0.5)) throw ConfigError(std::string(key) + " must be below 0.5");
}

}  // namespace

// ------------------------------------------------------------------ normalization

NormalizedSequence normalize_sequence(const PoseSequence& seq) {
    NormalizedSequence out{seq, {}};
    normalize_body(out.sequence, out.report);
    normalize_hand(out.sequence, Side::Left, out.report);
    normalize_hand(out.sequence, Side::Right, out.report);
    return out;
}

// ------------------------------------------------------------------ geometry

Point rotate_point(Point p, Point center, double degrees) {
    const double rad = degrees * std::numbers::pi / 180.0;
    const double c = std::cos(rad);
    const double s = std::sin(rad);
    const double dx = p.x - center.x;
    const double dy = p.y - center.y;
    // counterclockwise with y up == (x, -y) rotation in y-down coordinates
    return {center.x + dx * c + dy * s, center.y - dx * s + dy * c};
}

PoseSequence rotate_sequence(const PoseSequence& seq, double degrees, Point center) {
    PoseSequence out = seq;
    for_present(out, 0, kSlotCount, [&](Point p) { return rotate_point(p, center, degrees); });
    return out;
}

PoseSequence squeeze_sequence(const PoseSequence& seq, double left_ratio, double right_ratio) {
    PoseSequence out = seq;
    const double span = 1.0 - left_ratio - right_ratio;
    for_present(out, 0, kSlotCount, [&](Point p) { return Point{left_ratio + span * p.x, p.y}; });
    return out;
}

PoseSequence perspective_sequence(const PoseSequence& seq, PerspectiveEdge edge, double ratio) {
    // corners of the unit square after displacement: top-left, top-right, bottom-left, bottom-right
    Point tl{0, 0}, tr{1, 0}, bl{0, 1}, br{1, 1};
    if (edge == PerspectiveEdge::Top) {
        tl.x += ratio;
        tr.x -= ratio;
    } else {
        bl.x += ratio;
        br.x -= ratio;
    }
    PoseSequence out = seq;
    for_present(out, 0, kSlotCount, [&](Point p) {
        const double u = p.x;
        const double v = p.y;
        const double x = (1 - v) * ((1 - u) * tl.x + u * tr.x) + v * ((1 - u) * bl.x + u * br.x);
        const double y = (1 - v) * ((1 - u) * tl.y + u * tr.y) + v * ((1 - u) * bl.y + u * br.y);
        return Point{x, y};
    });
    return out;
}

SkeletalFrame rotate_arm_joints(const SkeletalFrame& frame, ArmJoint joint, Side side, double degrees) {
    SkeletalFrame out = frame;
    const std::size_t pivot = joint == ArmJoint::Elbow ? elbow_slot(side) : wrist_slot(side);
    if (!out.present[pivot] || degrees == 0.0) return out;
    const Point center = out.coords[pivot];
    if (joint == ArmJoint::Elbow) rotate_chain(out, wrist_slot(side), wrist_slot(side) + 1, center, degrees);
    const std::size_t h = hand_offset(side);
    rotate_chain(out, h, h + kHandSlots, center, degrees);
    return out;
}

// ------------------------------------------------------------------ AugmentationConfig

AugmentationConfig AugmentationConfig::disabled() {
    AugmentationConfig c;
    c.rotate.probability = 0;
    c.squeeze.probability = 0;
    c.perspective.probability = 0;
    c.arm_rotate.probability = 0;
    return c;
}

void AugmentationConfig::validate() const {
    check_probability(rotate.probability, "rotate.probability");
    check_magnitude(rotate.max_degrees, "rotate.max_degrees");
    check_probability(squeeze.probability, "squeeze.probability");
    check_ratio(squeeze.max_ratio, "squeeze.max_ratio");
    check_probability(perspective.probability, "perspective.probability");
    check_ratio(perspective.max_ratio, "perspective.max_ratio");
    check_probability(arm_rotate.probability, "arm_rotate.probability");
    check_magnitude(arm_rotate.max_degrees, "arm_rotate.max_degrees");
}

const std::array<const char*, 8>& AugmentationConfig::field_names() {
    static const std::array<const char*, 8> names = {
        "rotate.probability",      "rotate.max_degrees",    "squeeze.probability",    "squeeze.max_ratio",
        "perspective.probability", "perspective.max_ratio", "arm_rotate.probability", "arm_rotate.max_degrees"};
    return names;
}

namespace {

template <typename Config>
auto field_slot(Config& c, std::string_view name) -> decltype(&c.rotate.probability) {
    if (name == "rotate.probability") return &c.rotate.probability;
    if (name == "rotate.max_degrees") return &c.rotate.max_degrees;
    if (name == "squeeze.probability") return &c.squeeze.probability;
    if (name == "squeeze.max_ratio") return &c.squeeze.max_ratio;
    if (name == "perspective.probability") return &c.perspective.probability;
    if (name == "perspective.max_ratio") return &c.perspective.max_ratio;
    if (name == "arm_rotate.probability") return &c.arm_rotate.probability;
    if (name == "arm_rotate.max_degrees") return &c.arm_rotate.max_degrees;
    throw ConfigError("unknown augmentation key '" + std::string(name) + "'");
}

}  // namespace

double AugmentationConfig::field(std::string_view name) const { return *field_slot(*this, name); }

void AugmentationConfig::set_field(std::string_view name, double value) { *field_slot(*this, name) = value; }

KeyValueConfig AugmentationConfig::to_config() const {
    KeyValueConfig cfg;
    for (const char* name : field_names()) cfg.set(name, format_double(field(name)));
    return cfg;
}

void AugmentationConfig::apply(const KeyValueConfig& cfg) {
    for (const char* name : field_names()) {
        if (auto v = cfg.get_double(name)) set_field(name, *v);
    }
}

// ------------------------------------------------------------------ augment

std::uint64_t sample_seed(std::uint64_t global_seed, std::uint64_t epoch, std::uint64_t sample_index) {
    return derive_seed({global_seed, epoch, sample_index});
}

PoseSequence augment(const PoseSequence& seq, const AugmentationConfig& cfg, std::uint64_t seed,
                     CoordinateSpace space) {
    cfg.validate();
    Rng rng(seed);
    PoseSequence out = seq;

    if (rng.bernoulli(cfg.rotate.probability)) {
        const double deg = rng.uniform(-cfg.rotate.max_degrees, cfg.rotate.max_degrees);
        out = rotate_sequence(out, deg);
    }
    if (rng.bernoulli(cfg.squeeze.probability)) {
        const double left = rng.uniform(0.0, cfg.squeeze.max_ratio);
        const double right = rng.uniform(0.0, cfg.squeeze.max_ratio);
        out = squeeze_sequence(out, left, right);
    }
    if (rng.bernoulli(cfg.perspective.probability)) {
        const double ratio = rng.uniform(0.0, cfg.perspective.max_ratio);
        const auto edge = rng.bernoulli(0.5) ? PerspectiveEdge::Top : PerspectiveEdge::Bottom;
        const double sign = rng.bernoulli(0.5) ? 1.0 : -1.0;
        out = perspective_sequence(out, edge, sign * ratio);
    }
    if (rng.bernoulli(cfg.arm_rotate.probability)) {
        for (Side side : {Side::Left, Side::Right}) {
            const double elbow_deg = rng.uniform(-cfg.arm_rotate.max_degrees, cfg.arm_rotate.max_degrees);
            const double wrist_deg = rng.uniform(-cfg.arm_rotate.max_degrees, cfg.arm_rotate.max_degrees);
            for (auto& f : out.frames) {
                if (space == CoordinateSpace::Image) {
                    f = rotate_arm_joints(f, ArmJoint::Elbow, side, elbow_deg);
                    f = rotate_arm_joints(f, ArmJoint::Wrist, side, wrist_deg);
                } else {
                    rotate_arm_normalized(f, ArmJoint::Elbow, side, elbow_deg);
                    rotate_arm_normalized(f, ArmJoint::Wrist, side, wrist_deg);
                }
            }
        }
    }
    return out;
}

}  // namespace spoterkit
