// Copyright (C) 2026 spoterkit contributors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace spoterkit {

// ------------------------------------------------------------------ schema
//
// Canonical layout: BODY(12) + LEFT_HAND(21) + RIGHT_HAND(21). Hand slots are
// the wrist followed by four joints per finger, thumb to little finger, base
// to tip (the 21-point hand model order).

inline constexpr std::size_t kBodySlots = 12;
inline constexpr std::size_t kHandSlots = 21;
inline constexpr std::size_t kSlotCount = kBodySlots + 2 * kHandSlots;  // 54
inline constexpr std::size_t kHeadSlots = 5;
inline constexpr std::size_t kFeatureDim = 2 * kSlotCount;  // 108

enum class SlotGroup { Body, LeftHand, RightHand };

enum class Side { Left, Right };

/// Body slot indices.
namespace body {
inline constexpr std::size_t nose = 0;
inline constexpr std::size_t neck = 1;
inline constexpr std::size_t left_eye = 2;
inline constexpr std::size_t right_eye = 3;
inline constexpr std::size_t left_ear = 4;
inline constexpr std::size_t right_ear = 5;
inline constexpr std::size_t left_shoulder = 6;
inline constexpr std::size_t right_shoulder = 7;
inline constexpr std::size_t left_elbow = 8;
inline constexpr std::size_t right_elbow = 9;
inline constexpr std::size_t left_wrist = 10;
inline constexpr std::size_t right_wrist = 11;
}  // namespace body

inline constexpr std::size_t kLeftHandOffset = kBodySlots;
inline constexpr std::size_t kRightHandOffset = kBodySlots + kHandSlots;

constexpr std::size_t hand_offset(Side side) noexcept {
    return side == Side::Left ? kLeftHandOffset : kRightHandOffset;
}

class CanonicalSchema {
public:
    static const CanonicalSchema& instance();

    std::span<const std::string> names() const noexcept { return names_; }
    const std::string& name(std::size_t slot) const { return names_.at(slot); }
    std::optional<std::size_t> find(std::string_view name) const;

    static SlotGroup group_of(std::size_t slot) noexcept;
    static bool is_head(std::size_t slot) noexcept { return slot == body::nose || (slot >= body::left_eye && slot <= body::right_ear); }

    /// Names of the 21 hand joints without the side suffix.
    static std::span<const std::string_view> hand_joint_names() noexcept;
    static std::span<const std::string_view> body_names() noexcept;

private:
    CanonicalSchema();
    std::vector<std::string> names_;
};

// ------------------------------------------------------------------ frames

struct Point {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point&, const Point&) = default;
};

/// One video frame as 54 landmarks in normalized image coordinates
/// (origin top-left, y down). Absent slots hold exactly (0, 0).
struct SkeletalFrame {
    std::array<Point, kSlotCount> coords{};
    std::array<bool, kSlotCount> present{};

    void set(std::size_t slot, Point p) {
        coords[slot] = p;
        present[slot] = true;
    }
    void clear(std::size_t slot) {
        coords[slot] = {};
        present[slot] = false;
    }
    std::size_t present_count() const noexcept;

    friend bool operator==(const SkeletalFrame&, const SkeletalFrame&) = default;
};

struct PoseSequence {
    std::vector<SkeletalFrame> frames;
    double fps = 25.0;
    std::optional<std::string> label;
    std::string source_id;

    std::size_t size() const noexcept { return frames.size(); }

    /// Throws EmptyInput / FormatError when the sequence breaks its invariants.
    void validate() const;

    friend bool operator==(const PoseSequence&, const PoseSequence&) = default;
};

// ------------------------------------------------------------------ estimator output

/// A landmark as emitted by an estimator; nullopt means "not reported".
struct RawLandmark {
    double x = 0.0;
    double y = 0.0;
    std::optional<double> confidence;
};

using RawLandmarkList = std::vector<std::optional<RawLandmark>>;

/// Per-frame estimator output: a body list and up to two hand lists.
/// A missing list means that part was not detected in the frame.
struct RawEstimatorFrame {
    std::optional<RawLandmarkList> body;
    std::optional<RawLandmarkList> left_hand;
    std::optional<RawLandmarkList> right_hand;
};

// ------------------------------------------------------------------ landmark map

struct SynthesisRule {
    std::size_t target = 0;
    std::string rule;  // currently only "midpoint"
    std::vector<std::size_t> inputs;
};

/// Declarative mapping from an estimator's native indices to the canonical slots.
struct LandmarkMap {
    std::string estimator_name;
    std::size_t body_arity = 0;
    std::size_t hand_arity = 0;
    /// Canonical body slot -> source body index; nullopt marks a synthesized slot.
    std::array<std::optional<std::size_t>, kBodySlots> body_map{};
    /// Canonical hand joint -> source hand index; same table for both hands.
    std::array<std::size_t, kHandSlots> hand_map{};
    std::vector<SynthesisRule> synthesis_rules;

    /// Coverage and evaluation-order checks; throws ConfigError.
    void validate() const;

    /// Stable digest of the map's content (cache keying).
    std::string digest() const;

    /// Body: nose 0, eyes 2/5, ears 7/8, shoulders 11/12, elbows 13/14, wrists 15/16 of a
    /// 33-point body model; identity over the 21-point hand model; neck = shoulder midpoint.
    static LandmarkMap mediapipe();
};

SkeletalFrame convert_frame(const RawEstimatorFrame& raw, const LandmarkMap& map);

PoseSequence convert_sequence(std::span<const RawEstimatorFrame> raw_frames, double fps,
                              const LandmarkMap& map, std::string source_id = {},
                              std::optional<std::string> label = std::nullopt);

/// Removes frames with no present landmark; keeps at least the first frame.
PoseSequence drop_empty_frames(const PoseSequence& seq);

}  // namespace spoterkit
