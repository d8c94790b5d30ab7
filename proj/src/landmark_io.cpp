// Copyright (C) 2026 spoterkit contributors
// SPDX-License-Identifier: Apache-2.0
//

#include "spoterkit/landmark_io.hpp"

#include <atomic>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "spoterkit/errors.hpp"

namespace spoterkit {

using nlohmann::json;

namespace fs = std::filesystem;

namespace {

const json& require(const json& obj, const char* key, std::string_view where) {
    if (!obj.is_object() || !obj.contains(key)) {
        throw FormatError(std::string(where) + ": missing field '" + key + "'");
    }
    return obj.at(key);
}

double require_number(const json& v, std::string_view where) {
    if (!v.is_number()) throw FormatError(std::string(where) + ": expected a number");
    return v.get<double>();
}

void header_from_json(const json& doc, PoseSequence& seq) {
    const json& version = require(doc, "schema_version", "header");
    if (!version.is_number_integer() || version.get<int>() != kLandmarkSchemaVersion) {
        throw FormatError("header: unsupported schema_version " + version.dump());
    }
    seq.fps = require_number(require(doc, "fps", "header"), "header.fps");
    if (!(seq.fps > 0.0)) throw FormatError("header.fps: must be positive");
    const json& label = require(doc, "label", "header");
    if (label.is_null()) {
        seq.label.reset();
    } else if (label.is_string()) {
        seq.label = label.get<std::string>();
    } else {
        throw FormatError("header.label: expected string or null");
    }
    const json& sid = require(doc, "source_id", "header");
    if (!sid.is_string()) throw FormatError("header.source_id: expected string");
    seq.source_id = sid.get<std::string>();
}

json header_to_json(const PoseSequence& seq) {
    json h = json::object();
    h["schema_version"] = kLandmarkSchemaVersion;
    h["fps"] = seq.fps;
    h["label"] = seq.label ? json(*seq.label) : json(nullptr);
    h["source_id"] = seq.source_id;
    return h;
}

std::optional<RawLandmarkList> landmark_list_from_json(const json& v, std::string_view where) {
    if (v.is_null()) return std::nullopt;
    if (!v.is_array()) throw FormatError(std::string(where) + ": expected array or null");
    RawLandmarkList out;
    out.reserve(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const json& lm = v[i];
        if (lm.is_null()) {
            out.emplace_back(std::nullopt);
            continue;
        }
        const std::string at = std::string(where) + "[" + std::to_string(i) + "]";
        if (!lm.is_array() || lm.size() < 2 || lm.size() > 3) {
            throw FormatError(at + ": expected [x, y] or [x, y, confidence]");
        }
        RawLandmark r{require_number(lm[0], at), require_number(lm[1], at), std::nullopt};
        if (lm.size() == 3) r.confidence = require_number(lm[2], at);
        out.emplace_back(r);
    }
    return out;
}

json landmark_list_to_json(const std::optional<RawLandmarkList>& list) {
    if (!list) return nullptr;
    json arr = json::array();
    for (const auto& lm : *list) {
        if (!lm) {
            arr.push_back(nullptr);
        } else if (lm->confidence) {
            arr.push_back({lm->x, lm->y, *lm->confidence});
        } else {
            arr.push_back({lm->x, lm->y});
        }
    }
    return arr;
}

std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

double parse_double_field(std::string_view text, std::size_t line_no, std::string_view column) {
    double v = 0.0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc{} || ptr != end) {
        throw FormatError("line " + std::to_string(line_no) + ", column '" + std::string(column) +
                          "': not a number: '" + std::string(text) + "'");
    }
    return v;
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

LandmarkFormat format_for_path(const fs::path& path) {
    return path.extension() == ".csv" ? LandmarkFormat::Tabular : LandmarkFormat::Structured;
}

// ------------------------------------------------------------------ structured form

json sequence_to_json(const PoseSequence& seq) {
    json doc = header_to_json(seq);
    json frames = json::array();
    for (const auto& f : seq.frames) {
        json coords = json::array();
        json present = json::array();
        for (std::size_t s = 0; s < kSlotCount; ++s) {
            coords.push_back(f.coords[s].x);
            coords.push_back(f.coords[s].y);
            present.push_back(f.present[s] ? 1 : 0);
        }
        frames.push_back({{"coords", std::move(coords)}, {"present", std::move(present)}});
    }
    doc["frames"] = std::move(frames);
    return doc;
}

PoseSequence sequence_from_json(const json& doc) {
    if (!doc.is_object()) throw FormatError("landmark document: expected a JSON object");
    PoseSequence seq;
    header_from_json(doc, seq);
    const json& frames = require(doc, "frames", "landmark document");
    if (!frames.is_array()) throw FormatError("frames: expected an array");
    if (frames.empty()) throw FormatError("frames: at least one frame is required");
    seq.frames.reserve(frames.size());
    for (std::size_t i = 0; i < frames.size(); ++i) {
        const std::string where = "frame " + std::to_string(i);
        const json& coords = require(frames[i], "coords", where);
        const json& present = require(frames[i], "present", where);
        if (!coords.is_array() || coords.size() != kFeatureDim) {
            throw FormatError(where + ": expected " + std::to_string(kFeatureDim) + " coordinates, got " +
                              std::to_string(coords.is_array() ? coords.size() : 0));
        }
        if (!present.is_array() || present.size() != kSlotCount) {
            throw FormatError(where + ": expected " + std::to_string(kSlotCount) + " presence bits, got " +
                              std::to_string(present.is_array() ? present.size() : 0));
        }
        SkeletalFrame fr;
        for (std::size_t s = 0; s < kSlotCount; ++s) {
            const std::string at = where + ", slot '" + CanonicalSchema::instance().name(s) + "'";
            fr.coords[s] = {require_number(coords[2 * s], at), require_number(coords[2 * s + 1], at)};
            const json& bit = present[s];
            if (bit.is_boolean()) {
                fr.present[s] = bit.get<bool>();
            } else if (bit.is_number_integer() && (bit.get<int>() == 0 || bit.get<int>() == 1)) {
                fr.present[s] = bit.get<int>() == 1;
            } else {
                throw FormatError(at + ": presence bit must be 0 or 1");
            }
            if (!fr.present[s] && !(fr.coords[s] == Point{})) {
                throw FormatError(at + ": absent slot must have coordinates (0, 0)");
            }
        }
        seq.frames.push_back(fr);
    }
    return seq;
}

// ------------------------------------------------------------------ tabular form

std::string sequence_to_csv(const PoseSequence& seq) {
    const auto& schema = CanonicalSchema::instance();
    std::string out = "# " + header_to_json(seq).dump() + "\n";
    out += "frame";
    for (const auto& n : schema.names()) out += "," + n + "_x," + n + "_y";
    for (const auto& n : schema.names()) out += "," + n + "_present";
    out += "\n";
    for (std::size_t i = 0; i < seq.frames.size(); ++i) {
        const auto& f = seq.frames[i];
        out += std::to_string(i);
        for (std::size_t s = 0; s < kSlotCount; ++s) {
            out += ',';
            out += format_double(f.coords[s].x);
            out += ',';
            out += format_double(f.coords[s].y);
        }
        for (std::size_t s = 0; s < kSlotCount; ++s) out += f.present[s] ? ",1" : ",0";
        out += "\n";
    }
    return out;
}

PoseSequence sequence_from_csv(std::string_view text) {
    std::vector<std::string_view> lines;
    {
        std::size_t start = 0;
        while (start < text.size()) {
            auto nl = text.find('\n', start);
            if (nl == std::string_view::npos) nl = text.size();
            auto line = text.substr(start, nl - start);
            if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
            lines.push_back(line);
            start = nl + 1;
        }
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    if (lines.size() < 2 || !lines[0].starts_with("#")) {
        throw FormatError("line 1: tabular landmark file must start with a '# {header}' line");
    }
    PoseSequence seq;
    json header = json::parse(lines[0].substr(1), nullptr, false);
    if (header.is_discarded()) throw FormatError("line 1: header is not valid JSON");
    header_from_json(header, seq);

    const auto& schema = CanonicalSchema::instance();
    const auto columns = split_csv_line(lines[1]);
    const std::size_t want_cols = 1 + kFeatureDim + kSlotCount;
    if (columns.size() != want_cols) {
        throw FormatError("line 2: expected " + std::to_string(want_cols) + " columns, got " +
                          std::to_string(columns.size()));
    }
    // columns are located by name, so any column order is accepted
    std::vector<std::size_t> x_col(kSlotCount, 0), y_col(kSlotCount, 0), p_col(kSlotCount, 0);
    std::vector<bool> seen(kSlotCount * 3, false);
    for (std::size_t c = 1; c < columns.size(); ++c) {
        const auto col = columns[c];
        const auto us = col.rfind('_');
        if (us == std::string_view::npos) throw FormatError("line 2: unknown column '" + std::string(col) + "'");
        const auto slot = schema.find(col.substr(0, us));
        const auto suffix = col.substr(us + 1);
        int kind = suffix == "x" ? 0 : suffix == "y" ? 1 : suffix == "present" ? 2 : -1;
        if (!slot || kind < 0 || seen[*slot * 3 + kind]) {
            throw FormatError("line 2: unknown or duplicate column '" + std::string(col) + "'");
        }
        seen[*slot * 3 + kind] = true;
        (kind == 0 ? x_col : kind == 1 ? y_col : p_col)[*slot] = c;
    }

    for (std::size_t li = 2; li < lines.size(); ++li) {
        const std::size_t line_no = li + 1;
        const auto fields = split_csv_line(lines[li]);
        const std::size_t frame_index = li - 2;
        if (fields.size() != want_cols) {
            throw FormatError("line " + std::to_string(line_no) + " (frame " + std::to_string(frame_index) +
                              "): expected " + std::to_string(want_cols) + " fields, got " +
                              std::to_string(fields.size()));
        }
        SkeletalFrame fr;
        for (std::size_t s = 0; s < kSlotCount; ++s) {
            fr.coords[s].x = parse_double_field(fields[x_col[s]], line_no, columns[x_col[s]]);
            fr.coords[s].y = parse_double_field(fields[y_col[s]], line_no, columns[y_col[s]]);
            const auto bit = fields[p_col[s]];
            if (bit != "0" && bit != "1") {
                throw FormatError("line " + std::to_string(line_no) + ", column '" +
                                  std::string(columns[p_col[s]]) + "': presence bit must be 0 or 1");
            }
            fr.present[s] = bit == "1";
            if (!fr.present[s] && !(fr.coords[s] == Point{})) {
                throw FormatError("line " + std::to_string(line_no) + ": absent slot '" + schema.name(s) +
                                  "' must have coordinates (0, 0)");
            }
        }
        seq.frames.push_back(fr);
    }
    if (seq.frames.empty()) throw FormatError("tabular landmark file has no frame rows");
    return seq;
}

PoseSequence parse_sequence_document(std::string_view text) {
    std::size_t i = 0;
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i < text.size() && text[i] == '#') return sequence_from_csv(text.substr(i));
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded()) throw FormatError("landmark document is neither valid JSON nor tabular text");
    return sequence_from_json(doc);
}

void write_sequence(const PoseSequence& seq, const fs::path& path) {
    write_sequence(seq, path, format_for_path(path));
}

void write_sequence(const PoseSequence& seq, const fs::path& path, LandmarkFormat format) {
    seq.validate();
    write_file_atomic(path, format == LandmarkFormat::Tabular ? sequence_to_csv(seq) : sequence_to_json(seq).dump());
}

PoseSequence read_sequence(const fs::path& path) {
    const std::string text = read_text_file(path);
    try {
        return parse_sequence_document(text);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

// ------------------------------------------------------------------ landmark maps

json landmark_map_to_json(const LandmarkMap& map) {
    const auto& schema = CanonicalSchema::instance();
    json body = json::object();
    for (std::size_t s = 0; s < kBodySlots; ++s) {
        body[schema.name(s)] = map.body_map[s] ? json(*map.body_map[s]) : json("synthesized");
    }
    json hand = json::object();
    for (std::size_t j = 0; j < kHandSlots; ++j) hand[std::string(CanonicalSchema::hand_joint_names()[j])] = map.hand_map[j];
    json synth = json::array();
    for (const auto& r : map.synthesis_rules) {
        json inputs = json::array();
        for (auto in : r.inputs) inputs.push_back(schema.name(in));
        synth.push_back({{"target", schema.name(r.target)}, {"rule", r.rule}, {"inputs", inputs}});
    }
    return {{"estimator_name", map.estimator_name},
            {"body_arity", map.body_arity},
            {"hand_arity", map.hand_arity},
            {"body", body},
            {"hand", hand},
            {"synthesis", synth}};
}

LandmarkMap landmark_map_from_json(const json& doc) {
    const auto& schema = CanonicalSchema::instance();
    LandmarkMap map;
    try {
        map.estimator_name = doc.at("estimator_name").get<std::string>();
        map.body_arity = doc.at("body_arity").get<std::size_t>();
        map.hand_arity = doc.at("hand_arity").get<std::size_t>();
        std::array<bool, kBodySlots> body_seen{};
        for (const auto& [name, v] : doc.at("body").items()) {
            const auto slot = schema.find(name);
            if (!slot || *slot >= kBodySlots) throw FormatError("landmark map: unknown body slot '" + name + "'");
            body_seen[*slot] = true;
            if (v.is_string() && v.get<std::string>() == "synthesized") {
                map.body_map[*slot].reset();
            } else {
                map.body_map[*slot] = v.get<std::size_t>();
            }
        }
        for (std::size_t s = 0; s < kBodySlots; ++s) {
            if (!body_seen[s]) throw FormatError("landmark map: body slot '" + schema.name(s) + "' missing");
        }
        std::array<bool, kHandSlots> hand_seen{};
        const auto joints = CanonicalSchema::hand_joint_names();
        for (const auto& [name, v] : doc.at("hand").items()) {
            auto it = std::find(joints.begin(), joints.end(), name);
            if (it == joints.end()) throw FormatError("landmark map: unknown hand joint '" + name + "'");
            const auto j = static_cast<std::size_t>(it - joints.begin());
            hand_seen[j] = true;
            map.hand_map[j] = v.get<std::size_t>();
        }
        for (std::size_t j = 0; j < kHandSlots; ++j) {
            if (!hand_seen[j]) throw FormatError("landmark map: hand joint '" + std::string(joints[j]) + "' missing");
        }
        if (doc.contains("synthesis")) {
            for (const auto& r : doc.at("synthesis")) {
                SynthesisRule rule;
                const auto target = schema.find(r.at("target").get<std::string>());
                if (!target) throw FormatError("landmark map: unknown synthesis target");
                rule.target = *target;
                rule.rule = r.at("rule").get<std::string>();
                for (const auto& in : r.at("inputs")) {
                    const auto slot = schema.find(in.get<std::string>());
                    if (!slot) throw FormatError("landmark map: unknown synthesis input");
                    rule.inputs.push_back(*slot);
                }
                map.synthesis_rules.push_back(std::move(rule));
            }
        }
    } catch (const json::exception& e) {
        throw FormatError(std::string("landmark map: ") + e.what());
    }
    try {
        map.validate();
    } catch (const ConfigError& e) {
        throw FormatError(std::string("landmark map: ") + e.what());
    }
    return map;
}

LandmarkMap read_landmark_map(const fs::path& path) {
    json doc = json::parse(read_text_file(path), nullptr, false);
    if (doc.is_discarded()) throw FormatError(path.string() + ": not valid JSON");
    return landmark_map_from_json(doc);
}

// ------------------------------------------------------------------ raw dumps

json raw_frame_to_json(const RawEstimatorFrame& frame) {
    return {{"body", landmark_list_to_json(frame.body)},
            {"left_hand", landmark_list_to_json(frame.left_hand)},
            {"right_hand", landmark_list_to_json(frame.right_hand)}};
}

RawEstimatorFrame raw_frame_from_json(const json& doc) {
    if (!doc.is_object()) throw FormatError("raw frame: expected an object");
    RawEstimatorFrame f;
    auto get = [&](const char* key) { return doc.contains(key) ? doc.at(key) : json(nullptr); };
    f.body = landmark_list_from_json(get("body"), "body");
    f.left_hand = landmark_list_from_json(get("left_hand"), "left_hand");
    f.right_hand = landmark_list_from_json(get("right_hand"), "right_hand");
    return f;
}

RawDump raw_dump_from_json(const json& doc) {
    RawDump dump;
    if (!doc.is_object()) throw FormatError("raw dump: expected an object");
    dump.fps = require_number(require(doc, "fps", "raw dump"), "raw dump.fps");
    if (doc.contains("source_id") && doc["source_id"].is_string()) dump.source_id = doc["source_id"].get<std::string>();
    if (doc.contains("label") && doc["label"].is_string()) dump.label = doc["label"].get<std::string>();
    const json& frames = require(doc, "frames", "raw dump");
    if (!frames.is_array()) throw FormatError("raw dump.frames: expected an array");
    for (std::size_t i = 0; i < frames.size(); ++i) {
        try {
            dump.frames.push_back(raw_frame_from_json(frames[i]));
        } catch (const FormatError& e) {
            throw FormatError("raw dump frame " + std::to_string(i) + ": " + e.what());
        }
    }
    return dump;
}

RawDump read_raw_dump(const fs::path& path) {
    json doc = json::parse(read_text_file(path), nullptr, false);
    if (doc.is_discarded()) throw FormatError(path.string() + ": not valid JSON");
    return raw_dump_from_json(doc);
}

// ------------------------------------------------------------------ files

std::string read_text_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_atomic(const fs::path& path, std::string_view content) {
    static std::atomic<unsigned> counter{0};
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter++);
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write '" + tmp.string() + "'");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw Error("short write to '" + tmp.string() + "'");
    }
    fs::rename(tmp, path);
}

}  // namespace spoterkit
