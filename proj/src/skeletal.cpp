// Copyright (C) 2026 spoterkit contributors
// SPDX-License-Identifier: Apache-2.0
//

#include "spoterkit/skeletal.hpp"

#include <algorithm>
#include <set>

#include "spoterkit/digest.hpp"
#include "spoterkit/errors.hpp"

namespace spoterkit {

namespace {

constexpr std::array<std::string_view, kBodySlots> kBodyNames = {
    "nose",         "neck",          "leftEye",   "rightEye",   "leftEar",    "rightEar",
    "leftShoulder", "rightShoulder", "leftElbow", "rightElbow", "leftWrist",  "rightWrist"};

constexpr std::array<std::string_view, kHandSlots> kHandJointNames = {
    "wrist",     "thumbCMC",  "thumbMP",   "thumbIP",    "thumbTip",   "indexMCP",   "indexPIP",
    "indexDIP",  "indexTip",  "middleMCP", "middlePIP",  "middleDIP",  "middleTip",  "ringMCP",
    "ringPIP",   "ringDIP",   "ringTip",   "littleMCP",  "littlePIP",  "littleDIP",  "littleTip"};

std::string describe_arity(std::string_view part, std::size_t got, std::size_t want) {
    return std::string(part) + " landmark count " + std::to_string(got) + " does not match map arity " +
           std::to_string(want);
}

}  // namespace

CanonicalSchema::CanonicalSchema() {
    names_.reserve(kSlotCount);
    for (auto n : kBodyNames) names_.emplace_back(n);
    for (auto n : kHandJointNames) names_.push_back(std::string(n) + "_left");
    for (auto n : kHandJointNames) names_.push_back(std::string(n) + "_right");
}

const CanonicalSchema& CanonicalSchema::instance() {
    static const CanonicalSchema schema;
    return schema;
}

std::optional<std::size_t> CanonicalSchema::find(std::string_view name) const {
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - names_.begin());
}

SlotGroup CanonicalSchema::group_of(std::size_t slot) noexcept {
    if (slot < kLeftHandOffset) return SlotGroup::Body;
    if (slot < kRightHandOffset) return SlotGroup::LeftHand;
    return SlotGroup::RightHand;
}

std::span<const std::string_view> CanonicalSchema::hand_joint_names() noexcept { return kHandJointNames; }
std::span<const std::string_view> CanonicalSchema::body_names() noexcept { return kBodyNames; }

std::size_t SkeletalFrame::present_count() const noexcept {
    return static_cast<std::size_t>(std::count(present.begin(), present.end(), true));
}

void PoseSequence::validate() const {
    if (frames.empty()) throw EmptyInput("pose sequence '" + source_id + "' has no frames");
    if (!(fps > 0.0)) throw FormatError("pose sequence '" + source_id + "' has non-positive fps");
    for (std::size_t f = 0; f < frames.size(); ++f) {
        const auto& fr = frames[f];
        for (std::size_t s = 0; s < kSlotCount; ++s) {
            if (!fr.present[s] && (fr.coords[s].x != 0.0 || fr.coords[s].y != 0.0)) {
                throw FormatError("frame " + std::to_string(f) + ": absent slot '" +
                                  CanonicalSchema::instance().name(s) + "' has non-zero coordinates");
            }
        }
    }
}

// ------------------------------------------------------------------ LandmarkMap

void LandmarkMap::validate() const {
    std::set<std::size_t> synthesized;
    for (const auto& r : synthesis_rules) {
        if (r.target >= kBodySlots) throw ConfigError("synthesis rules may only target body slots");
        if (body_map[r.target]) {
            throw ConfigError("slot '" + CanonicalSchema::instance().name(r.target) +
                              "' is both mapped and synthesized");
        }
        if (!synthesized.insert(r.target).second) {
            throw ConfigError("slot '" + CanonicalSchema::instance().name(r.target) + "' synthesized twice");
        }
        if (r.rule != "midpoint") throw ConfigError("unknown synthesis rule '" + r.rule + "'");
        if (r.inputs.size() != 2) throw ConfigError("midpoint rule needs exactly two inputs");
        for (auto in : r.inputs) {
            // inputs must be filled before this rule runs: mapped, or synthesized by an earlier rule
            const bool mapped = in < kBodySlots && body_map[in].has_value();
            const bool earlier = synthesized.count(in) && in != r.target;
            if (!mapped && !earlier) {
                throw ConfigError("synthesis rule for '" + CanonicalSchema::instance().name(r.target) +
                                  "' references a slot not filled earlier");
            }
        }
    }
    for (std::size_t s = 0; s < kBodySlots; ++s) {
        if (!body_map[s] && !synthesized.count(s)) {
            throw ConfigError("body slot '" + CanonicalSchema::instance().name(s) + "' is not covered");
        }
        if (body_map[s] && *body_map[s] >= body_arity) throw ConfigError("body source index out of range");
    }
    for (auto idx : hand_map) {
        if (idx >= hand_arity) throw ConfigError("hand source index out of range");
    }
}

std::string LandmarkMap::digest() const {
    Fnv1a h;
    h.update(estimator_name);
    auto put = [&h](std::size_t v) {
        const auto u = static_cast<std::uint64_t>(v);
        h.update(&u, sizeof u);
    };
    put(body_arity);
    put(hand_arity);
    for (const auto& m : body_map) put(m ? *m : ~std::size_t{0});
    for (auto m : hand_map) put(m);
    for (const auto& r : synthesis_rules) {
        put(r.target);
        h.update(r.rule);
        for (auto i : r.inputs) put(i);
    }
    return h.hex();
}

LandmarkMap LandmarkMap::mediapipe() {
    LandmarkMap m;
    m.estimator_name = "mediapipe";
    m.body_arity = 33;
    m.hand_arity = 21;
    m.body_map[body::nose] = 0;
    m.body_map[body::left_eye] = 2;
    m.body_map[body::right_eye] = 5;
    m.body_map[body::left_ear] = 7;
    m.body_map[body::right_ear] = 8;
    m.body_map[body::left_shoulder] = 11;
    m.body_map[body::right_shoulder] = 12;
    m.body_map[body::left_elbow] = 13;
    m.body_map[body::right_elbow] = 14;
    m.body_map[body::left_wrist] = 15;
    m.body_map[body::right_wrist] = 16;
    for (std::size_t i = 0; i < kHandSlots; ++i) m.hand_map[i] = i;
    m.synthesis_rules.push_back({body::neck, "midpoint", {body::left_shoulder, body::right_shoulder}});
    return m;
}

// ------------------------------------------------------------------ conversion

SkeletalFrame convert_frame(const RawEstimatorFrame& raw, const LandmarkMap& map) {
    if (raw.body && raw.body->size() != map.body_arity) {
        throw SchemaMismatch(describe_arity("body", raw.body->size(), map.body_arity));
    }
    if (raw.left_hand && raw.left_hand->size() != map.hand_arity) {
        throw SchemaMismatch(describe_arity("left hand", raw.left_hand->size(), map.hand_arity));
    }
    if (raw.right_hand && raw.right_hand->size() != map.hand_arity) {
        throw SchemaMismatch(describe_arity("right hand", raw.right_hand->size(), map.hand_arity));
    }

    SkeletalFrame frame;
    if (raw.body) {
        for (std::size_t s = 0; s < kBodySlots; ++s) {
            if (!map.body_map[s]) continue;
            if (const auto& lm = (*raw.body)[*map.body_map[s]]) frame.set(s, {lm->x, lm->y});
        }
    }
    auto copy_hand = [&](const std::optional<RawLandmarkList>& hand, std::size_t offset) {
        if (!hand) return;
        for (std::size_t j = 0; j < kHandSlots; ++j) {
            if (const auto& lm = (*hand)[map.hand_map[j]]) frame.set(offset + j, {lm->x, lm->y});
        }
    };
    copy_hand(raw.left_hand, kLeftHandOffset);
    copy_hand(raw.right_hand, kRightHandOffset);

    for (const auto& rule : map.synthesis_rules) {
        const bool all_present = std::all_of(rule.inputs.begin(), rule.inputs.end(),
                                             [&](std::size_t s) { return frame.present[s]; });
        if (!all_present) continue;
        const Point& a = frame.coords[rule.inputs[0]];
        const Point& b = frame.coords[rule.inputs[1]];
        frame.set(rule.target, {(a.x + b.x) / 2.0, (a.y + b.y) / 2.0});
    }
    return frame;
}

PoseSequence convert_sequence(std::span<const RawEstimatorFrame> raw_frames, double fps, const LandmarkMap& map,
                              std::string source_id, std::optional<std::string> label) {
    if (raw_frames.empty()) throw EmptyInput("no raw frames to convert");
    PoseSequence seq;
    seq.fps = fps;
    seq.source_id = std::move(source_id);
    seq.label = std::move(label);
    seq.frames.reserve(raw_frames.size());
    for (const auto& raw : raw_frames) seq.frames.push_back(convert_frame(raw, map));
    return seq;
}

PoseSequence drop_empty_frames(const PoseSequence& seq) {
    PoseSequence out = seq;
    out.frames.clear();
    for (const auto& f : seq.frames) {
        if (f.present_count() > 0) out.frames.push_back(f);
    }
    if (out.frames.empty() && !seq.frames.empty()) out.frames.push_back(seq.frames.front());
    return out;
}

}  // namespace spoterkit
