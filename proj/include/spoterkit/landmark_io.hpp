// Copyright (C) 2026 spoterkit contributors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "spoterkit/skeletal.hpp"

namespace spoterkit {

// Landmark files hold one clip. The structured form is a single JSON document:
//
//   {"schema_version": 1, "fps": 25, "label": "book" | null, "source_id": "...",
//    "frames": [{"coords": [x0, y0, x1, y1, ... 108 numbers], "present": [54 x 0/1]}, ...]}
//
// The tabular form is CSV: a "# {header object}" line, a column header row
// (frame, <slot>_x, <slot>_y for every slot, then <slot>_present), one row per frame.
// Numbers are written in the shortest decimal form that reads back to the same double.

enum class LandmarkFormat { Structured, Tabular };

inline constexpr int kLandmarkSchemaVersion = 1;

/// .csv selects the tabular form; anything else is structured.
LandmarkFormat format_for_path(const std::filesystem::path& path);

nlohmann::json sequence_to_json(const PoseSequence& seq);
PoseSequence sequence_from_json(const nlohmann::json& doc);

std::string sequence_to_csv(const PoseSequence& seq);
PoseSequence sequence_from_csv(std::string_view text);

/// Parses either form, sniffing the content.
PoseSequence parse_sequence_document(std::string_view text);

void write_sequence(const PoseSequence& seq, const std::filesystem::path& path);
void write_sequence(const PoseSequence& seq, const std::filesystem::path& path, LandmarkFormat format);
PoseSequence read_sequence(const std::filesystem::path& path);

// ------------------------------------------------------------------ landmark maps
//
//   {"estimator_name": "mediapipe", "body_arity": 33, "hand_arity": 21,
//    "body": {"nose": 0, ..., "neck": "synthesized"},
//    "hand": {"wrist": 0, "thumbCMC": 1, ...},
//    "synthesis": [{"target": "neck", "rule": "midpoint", "inputs": ["leftShoulder", "rightShoulder"]}]}

nlohmann::json landmark_map_to_json(const LandmarkMap& map);
LandmarkMap landmark_map_from_json(const nlohmann::json& doc);
LandmarkMap read_landmark_map(const std::filesystem::path& path);

// ------------------------------------------------------------------ raw estimator dumps
//
//   {"fps": 25, "source_id": "...", "label": null,
//    "frames": [{"body": [[x, y] | [x, y, conf] | null, ...] | null,
//                "left_hand": [...] | null, "right_hand": [...] | null}, ...]}

struct RawDump {
    double fps = 25.0;
    std::string source_id;
    std::optional<std::string> label;
    std::vector<RawEstimatorFrame> frames;
};

nlohmann::json raw_frame_to_json(const RawEstimatorFrame& frame);
RawEstimatorFrame raw_frame_from_json(const nlohmann::json& doc);
RawDump raw_dump_from_json(const nlohmann::json& doc);
RawDump read_raw_dump(const std::filesystem::path& path);

// ------------------------------------------------------------------ file helpers

std::string read_text_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Shortest round-trip decimal text for a double.
std::string format_double(double v);

}  // namespace spoterkit
