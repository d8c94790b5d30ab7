// Copyright (C) 2026 spoterkit contributors
// SPDX-License-Identifier: Apache-2.0
//

#include "spoterkit/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "spoterkit/digest.hpp"
#include "spoterkit/errors.hpp"
#include "spoterkit/landmark_io.hpp"

namespace spoterkit {

namespace fs = std::filesystem;
using nlohmann::json;

static_assert(std::endian::native == std::endian::little, "checkpoint IO assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'S', 'P', 'K', 'T', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kFormatVersion = 1;

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> read_optional(const json& doc, const char* key) {
    if (!doc.contains(key) || doc[key].is_null()) return std::nullopt;
    return doc[key].get<double>();
}

}  // namespace

json EpochMetrics::to_json() const {
    return {{"epoch", epoch},
            {"train_loss", train_loss},
            {"train_top1", train_top1},
            {"val_top1_macro", optional_number(val_top1_macro)},
            {"test_top1_macro", optional_number(test_top1_macro)},
            {"seconds", seconds}};
}

EpochMetrics EpochMetrics::from_json(const json& doc) {
    EpochMetrics m;
    m.epoch = doc.at("epoch").get<std::size_t>();
    m.train_loss = doc.at("train_loss").get<double>();
    m.train_top1 = doc.at("train_top1").get<double>();
    m.val_top1_macro = read_optional(doc, "val_top1_macro");
    m.test_top1_macro = read_optional(doc, "test_top1_macro");
    m.seconds = doc.value("seconds", 0.0);
    return m;
}

std::string Checkpoint::model_id() const {
    Fnv1a h;
    const auto w = model.weights();
    h.update(w.data(), w.size() * sizeof(double));
    h.update(model.config().to_json().dump());
    for (const auto& g : vocabulary.glosses()) {
        h.update(g);
        h.update("\n");
    }
    return "spoter-" + h.hex().substr(0, 12);
}

fs::path metrics_path_for(const fs::path& checkpoint_path) {
    fs::path p = checkpoint_path;
    p += ".metrics.jsonl";
    return p;
}

void save_checkpoint(const Checkpoint& ckpt, const fs::path& path) {
    const auto& layout = ckpt.model.layout();
    json tensors = json::array();
    for (const auto& t : layout.tensors()) {
        tensors.push_back({{"name", t.name}, {"shape", {t.rows, t.cols}}, {"offset", t.offset}});
    }
    const json header = {{"model_config", ckpt.model.config().to_json()},
                         {"vocabulary", ckpt.vocabulary.glosses()},
                         {"train_config_digest", ckpt.train_config_digest},
                         {"selected_epoch", ckpt.selected_epoch},
                         {"weights_count", layout.total()},
                         {"tensors", tensors}};
    const std::string header_text = header.dump();

    std::string blob;
    blob.append(kMagic, sizeof kMagic);
    const std::uint32_t version = kFormatVersion;
    blob.append(reinterpret_cast<const char*>(&version), sizeof version);
    const std::uint64_t header_len = header_text.size();
    blob.append(reinterpret_cast<const char*>(&header_len), sizeof header_len);
    blob += header_text;
    blob.append((8 - blob.size() % 8) % 8, '\0');
    const auto w = ckpt.model.weights();
    blob.append(reinterpret_cast<const char*>(w.data()), w.size() * sizeof(double));
    write_file_atomic(path, blob);

    std::string lines;
    for (const auto& m : ckpt.history) lines += m.to_json().dump() + "\n";
    write_file_atomic(metrics_path_for(path), lines);
}

Checkpoint load_checkpoint(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open checkpoint '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::string blob = ss.str();
    const std::string where = "checkpoint '" + path.string() + "'";

    constexpr std::size_t fixed = sizeof kMagic + sizeof(std::uint32_t) + sizeof(std::uint64_t);
    if (blob.size() < fixed || std::memcmp(blob.data(), kMagic, sizeof kMagic) != 0) {
        throw FormatError(where + ": not a checkpoint archive");
    }
    std::uint32_t version = 0;
    std::memcpy(&version, blob.data() + sizeof kMagic, sizeof version);
    if (version != kFormatVersion) throw FormatError(where + ": unsupported format version " + std::to_string(version));
    std::uint64_t header_len = 0;
    std::memcpy(&header_len, blob.data() + sizeof kMagic + sizeof version, sizeof header_len);
    if (header_len > blob.size() - fixed) throw FormatError(where + ": truncated header");
    json header = json::parse(blob.substr(fixed, header_len), nullptr, false);
    if (header.is_discarded()) throw FormatError(where + ": header is not valid JSON");

    std::size_t data_off = fixed + header_len;
    data_off += (8 - data_off % 8) % 8;
    try {
        ModelConfig cfg = ModelConfig::from_json(header.at("model_config"));
        GlossVocabulary vocab(header.at("vocabulary").get<std::vector<std::string>>());
        if (vocab.size() != cfg.num_classes) throw FormatError(where + ": vocabulary size differs from num_classes");
        const ParameterLayout layout(cfg);
        const auto& tensors = header.at("tensors");
        if (tensors.size() != layout.tensors().size()) throw FormatError(where + ": tensor directory mismatch");
        for (std::size_t i = 0; i < tensors.size(); ++i) {
            const auto& t = layout.tensors()[i];
            const auto& d = tensors[i];
            if (d.at("name").get<std::string>() != t.name || d.at("offset").get<std::size_t>() != t.offset ||
                d.at("shape").at(0).get<std::size_t>() != t.rows || d.at("shape").at(1).get<std::size_t>() != t.cols) {
                throw FormatError(where + ": tensor '" + t.name + "' does not match the model config");
            }
        }
        const std::size_t count = layout.total();
        if (blob.size() < data_off || (blob.size() - data_off) != count * sizeof(double)) {
            throw FormatError(where + ": weight payload has the wrong size");
        }
        std::vector<double> weights(count);
        std::memcpy(weights.data(), blob.data() + data_off, count * sizeof(double));

        Checkpoint ckpt{SpoterModel(cfg, std::move(weights)), std::move(vocab),
                        header.value("train_config_digest", std::string{}), header.value("selected_epoch", std::size_t{0}),
                        {}};
        const fs::path mpath = metrics_path_for(path);
        if (fs::exists(mpath)) {
            std::istringstream lines(read_text_file(mpath));
            std::string line;
            while (std::getline(lines, line)) {
                if (line.empty()) continue;
                ckpt.history.push_back(EpochMetrics::from_json(json::parse(line)));
            }
        }
        return ckpt;
    } catch (const json::exception& e) {
        throw FormatError(where + ": " + e.what());
    }
}

}  // namespace spoterkit
