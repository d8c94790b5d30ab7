// Copyright (C) 2026 spoterkit contributors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <array>
#include <cstdint>
#include <optional>

#include "spoterkit/config.hpp"
#include "spoterkit/skeletal.hpp"

namespace spoterkit {

// ------------------------------------------------------------------ normalization

/// Body landmarks are translated so the mean neck position lands here.
inline constexpr Point kBodyAnchorTarget{0.5, 0.5};

struct BoundingBox {
    Point min;
    Point max;

    double width() const noexcept { return max.x - min.x; }
    double height() const noexcept { return max.y - min.y; }
};

enum class BodyScaleSource { Shoulders, HeadToNeck, Fallback };

struct NormalizationReport {
    /// Mean shoulder distance (or head-to-neck distance) mapped to 1; 1.0 when degenerate.
    double body_scale_used = 1.0;
    BodyScaleSource body_scale_source = BodyScaleSource::Fallback;
    std::optional<Point> body_anchor;
    std::array<std::optional<BoundingBox>, 2> hand_boxes;  // [left, right]
    bool body_degenerate = false;
    std::array<bool, 2> hand_degenerate{};  // [left, right]
};

struct NormalizedSequence {
    PoseSequence sequence;
    NormalizationReport report;
};

/// Maps body landmarks into a signer-invariant frame (mean neck at (0.5, 0.5),
/// reference body scale 1) and each hand into the unit square of its own
/// sequence-level bounding box. Degenerate parts pass through unchanged and flagged.
NormalizedSequence normalize_sequence(const PoseSequence& seq);

// ------------------------------------------------------------------ augmentation

struct RotateParams {
    double probability = 0.5;
    double max_degrees = 13.0;

    friend bool operator==(const RotateParams&, const RotateParams&) = default;
};

struct RatioParams {
    double probability = 0.5;
    double max_ratio = 0.1;

    friend bool operator==(const RatioParams&, const RatioParams&) = default;
};

struct AugmentationConfig {
    RotateParams rotate{0.5, 13.0};
    RatioParams squeeze{0.5, 0.15};
    RatioParams perspective{0.5, 0.1};
    RotateParams arm_rotate{0.5, 4.0};

    /// All probabilities 0.
    static AugmentationConfig disabled();

    /// Throws ConfigError on out-of-range values.
    void validate() const;

    /// Keys: rotate.probability, rotate.max_degrees, squeeze.probability, squeeze.max_ratio,
    /// perspective.probability, perspective.max_ratio, arm_rotate.probability, arm_rotate.max_degrees.
    KeyValueConfig to_config() const;
    /// Reads the keys above, leaving unspecified fields at their current values.
    void apply(const KeyValueConfig& cfg);

    /// The eight sweepable fields, in a fixed order.
    static const std::array<const char*, 8>& field_names();
    double field(std::string_view name) const;
    void set_field(std::string_view name, double value);

    friend bool operator==(const AugmentationConfig&, const AugmentationConfig&) = default;
};

/// Whether hand landmarks share the body's coordinate frame (raw image space)
/// or live in their own per-hand frame (after normalize_sequence).
enum class CoordinateSpace { Image, Normalized };

/// Applies each enabled augmentation with its probability, in the order rotate,
/// squeeze, perspective, arm rotation. Deterministic in (seq, cfg, seed).
PoseSequence augment(const PoseSequence& seq, const AugmentationConfig& cfg, std::uint64_t seed,
                     CoordinateSpace space = CoordinateSpace::Normalized);

/// Per-sample augmentation seed; independent of the order samples are visited in.
std::uint64_t sample_seed(std::uint64_t global_seed, std::uint64_t epoch, std::uint64_t sample_index);

// Individual transforms. All touch present landmarks only.

/// Rotation about `center`; positive degrees are counterclockwise with y pointing up,
/// which is clockwise on screen in y-down image coordinates.
PoseSequence rotate_sequence(const PoseSequence& seq, double degrees, Point center = {0.5, 0.5});

/// x' = left + (1 - left - right) * x.
PoseSequence squeeze_sequence(const PoseSequence& seq, double left_ratio, double right_ratio);

enum class PerspectiveEdge { Top, Bottom };

/// Moves the two corners of one edge of the unit square horizontally by `ratio`
/// (positive = inward) and maps every point through the bilinear corner interpolation.
PoseSequence perspective_sequence(const PoseSequence& seq, PerspectiveEdge edge, double ratio);

enum class ArmJoint { Elbow, Wrist };

/// Rigidly rotates the chain distal to `joint` on `side` about that joint
/// (elbow: wrist + hand; wrist: hand). No-op when the pivot is absent.
SkeletalFrame rotate_arm_joints(const SkeletalFrame& frame, ArmJoint joint, Side side, double degrees);

/// Rotates `p` about `center` with the convention of rotate_sequence.
Point rotate_point(Point p, Point center, double degrees);

}  // namespace spoterkit
