// Copyright (C) 2026 spoterkit contributors
// SPDX-License-Identifier: Apache-2.0
//

#include "spoterkit/dataset.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <unordered_set>

#include "spoterkit/digest.hpp"
#include "spoterkit/errors.hpp"
#include "spoterkit/landmark_io.hpp"
#include "spoterkit/random.hpp"

namespace spoterkit {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kLandmarkExtension = ".landmarks";
constexpr std::array<const char*, 6> kVideoExtensions = {".mp4", ".avi", ".mov", ".webm", ".mkv", ".m4v"};

std::string id_string(const json& v, std::string_view what) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    throw FormatError(std::string(what) + ": expected a string or integer id");
}

fs::path resolve_video(const IndexEntry& e, const fs::path& videos_dir) {
    if (!e.video.empty()) return videos_dir / e.video;
    for (const char* ext : kVideoExtensions) {
        fs::path p = videos_dir / (e.source_id + ext);
        if (fs::exists(p)) return p;
    }
    return {};
}

}  // namespace

// ------------------------------------------------------------------ vocabulary

GlossVocabulary::GlossVocabulary(std::vector<std::string> glosses) : glosses_(std::move(glosses)) {
    for (std::size_t i = 0; i < glosses_.size(); ++i) {
        if (!index_.emplace(glosses_[i], i).second) throw FormatError("duplicate gloss '" + glosses_[i] + "'");
    }
}

std::optional<std::size_t> GlossVocabulary::index_of(const std::string& gloss) const {
    auto it = index_.find(gloss);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

// ------------------------------------------------------------------ splits

std::string_view split_name(Split split) noexcept {
    switch (split) {
        case Split::Train: return "train";
        case Split::Validation: return "val";
        case Split::Test: return "test";
    }
    return "train";
}

Split parse_split(std::string_view name) {
    if (name == "train") return Split::Train;
    if (name == "val" || name == "validation") return Split::Validation;
    if (name == "test") return Split::Test;
    throw FormatError("unknown split '" + std::string(name) + "'");
}

std::vector<const IndexEntry*> DatasetIndex::entries_for(Split split) const {
    std::vector<const IndexEntry*> out;
    for (const auto& e : entries) {
        if (e.split == split) out.push_back(&e);
    }
    return out;
}

// ------------------------------------------------------------------ index loading

LoadedIndex parse_index(const json& doc, std::size_t subset_size, std::string provenance_path,
                        std::string provenance_digest) {
    if (subset_size < 1) throw FormatError("subset size must be positive");
    LoadedIndex out;
    out.index.provenance_path = std::move(provenance_path);
    out.index.provenance_digest = std::move(provenance_digest);
    std::unordered_set<std::string> seen_ids;
    auto add_entry = [&](IndexEntry e) {
        if (!seen_ids.insert(e.source_id).second) {
            throw FormatError("source_id '" + e.source_id + "' appears more than once");
        }
        out.index.entries.push_back(std::move(e));
    };
    auto read_split = [](const json& inst, const std::string& id) {
        if (!inst.contains("split") || !inst["split"].is_string()) {
            throw MissingSplitError("entry '" + id + "' has no split tag");
        }
        return parse_split(inst["split"].get<std::string>());
    };

    try {
        if (doc.is_array()) {
            std::vector<std::string> glosses;
            for (const auto& g : doc) {
                if (glosses.size() == subset_size) break;
                if (!g.is_object() || !g.contains("gloss") || !g["gloss"].is_string()) {
                    throw FormatError("gloss record " + std::to_string(glosses.size()) + ": missing 'gloss'");
                }
                const std::string gloss = g["gloss"].get<std::string>();
                glosses.push_back(gloss);
                if (!g.contains("instances")) continue;
                for (const auto& inst : g["instances"]) {
                    if (!inst.contains("video_id")) {
                        throw FormatError("gloss '" + gloss + "': instance without video_id");
                    }
                    IndexEntry e;
                    e.source_id = id_string(inst["video_id"], "video_id");
                    e.gloss = gloss;
                    e.split = read_split(inst, e.source_id);
                    if (inst.contains("video") && inst["video"].is_string()) e.video = inst["video"].get<std::string>();
                    add_entry(std::move(e));
                }
            }
            out.vocabulary = GlossVocabulary(std::move(glosses));
        } else if (doc.is_object() && doc.contains("vocabulary") && doc.contains("entries")) {
            std::vector<std::string> all = doc["vocabulary"].get<std::vector<std::string>>();
            std::set<std::string> known(all.begin(), all.end());
            if (all.size() > subset_size) all.resize(subset_size);
            out.vocabulary = GlossVocabulary(all);
            for (const auto& inst : doc["entries"]) {
                IndexEntry e;
                if (!inst.contains("source_id")) throw FormatError("entry without source_id");
                e.source_id = id_string(inst["source_id"], "source_id");
                if (!inst.contains("gloss") || !inst["gloss"].is_string()) {
                    throw FormatError("entry '" + e.source_id + "': missing gloss");
                }
                e.gloss = inst["gloss"].get<std::string>();
                if (!known.count(e.gloss)) {
                    throw FormatError("entry '" + e.source_id + "' references unknown gloss '" + e.gloss + "'");
                }
                e.split = read_split(inst, e.source_id);
                if (!out.vocabulary.contains(e.gloss)) continue;  // outside the subset
                if (inst.contains("video") && inst["video"].is_string()) e.video = inst["video"].get<std::string>();
                add_entry(std::move(e));
            }
        } else {
            throw FormatError("index must be a gloss array or an object with 'vocabulary' and 'entries'");
        }
    } catch (const json::exception& e) {
        throw FormatError(std::string("index: ") + e.what());
    }
    return out;
}

LoadedIndex load_index(const fs::path& path, std::size_t subset_size) {
    const std::string text = read_text_file(path);
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded()) throw FormatError(path.string() + ": not valid JSON");
    try {
        return parse_index(doc, subset_size, path.string(), digest_hex(text));
    } catch (const MissingSplitError& e) {
        throw MissingSplitError(path.string() + ": " + e.what());
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

DatasetStats dataset_stats(const LoadedIndex& loaded) {
    DatasetStats s;
    s.glosses = loaded.vocabulary.size();
    std::vector<std::size_t> per_class(s.glosses, 0);
    for (const auto& e : loaded.index.entries) {
        (e.split == Split::Train ? s.train : e.split == Split::Validation ? s.validation : s.test)++;
        if (auto i = loaded.vocabulary.index_of(e.gloss)) ++per_class[*i];
    }
    if (!per_class.empty()) {
        s.min_per_class = *std::min_element(per_class.begin(), per_class.end());
        s.max_per_class = *std::max_element(per_class.begin(), per_class.end());
    }
    return s;
}

// ------------------------------------------------------------------ cache

LandmarkCache::LandmarkCache(fs::path root, std::string key) : root_(std::move(root)), key_(std::move(key)) {}

std::string LandmarkCache::key_for(const LandmarkMap& map, std::string_view estimator_version) {
    Fnv1a h;
    h.update(map.digest());
    h.update("|");
    h.update(estimator_version);
    return h.hex();
}

LandmarkCache LandmarkCache::resolve(const fs::path& root, std::string_view key) {
    if (!key.empty()) return LandmarkCache(root, std::string(key));
    std::vector<std::string> keys;
    std::error_code ec;
    for (const auto& d : fs::directory_iterator(root, ec)) {
        if (d.is_directory()) keys.push_back(d.path().filename().string());
    }
    if (keys.size() != 1) {
        throw CacheMiss("cannot pick a cache key under '" + root.string() + "': found " + std::to_string(keys.size()) +
                        " key directories");
    }
    return LandmarkCache(root, keys.front());
}

fs::path LandmarkCache::path_for(std::string_view source_id) const {
    return directory() / (std::string(source_id) + kLandmarkExtension);
}

bool LandmarkCache::contains(std::string_view source_id) const { return fs::exists(path_for(source_id)); }

PoseSequence LandmarkCache::load(std::string_view source_id) const {
    const fs::path p = path_for(source_id);
    if (!fs::exists(p)) throw CacheMiss("no cached landmarks for entry '" + std::string(source_id) + "'");
    return read_sequence(p);
}

void LandmarkCache::store(const PoseSequence& seq) const {
    write_sequence(seq, path_for(seq.source_id), LandmarkFormat::Structured);
}

// ------------------------------------------------------------------ materialization

MaterializationReport materialize(const DatasetIndex& index, const LandmarkCache& cache, const fs::path& videos_dir,
                                  EstimatorAdapter* estimator, const ExtractOptions& options) {
    MaterializationReport report;
    for (const auto& e : index.entries) {
        if (cache.contains(e.source_id)) {
            ++report.cached;
            continue;
        }
        auto fail = [&](std::string reason) {
            ++report.missing;
            report.failures.emplace_back(e.source_id, std::move(reason));
        };
        const fs::path video = resolve_video(e, videos_dir);
        if (video.empty() || !fs::exists(video)) {
            fail("video not found");
            continue;
        }
        if (!estimator) {
            fail("no pose estimator available");
            continue;
        }
        try {
            PoseSequence seq = extract_landmarks(video, *estimator, options);
            seq.source_id = e.source_id;
            seq.label = e.gloss;
            cache.store(seq);
            ++report.extracted;
        } catch (const Error& err) {
            fail(err.what());
        }
    }
    return report;
}

// ------------------------------------------------------------------ iteration

std::vector<std::size_t> epoch_order(std::size_t count, Split split, std::uint64_t shuffle_seed, std::uint64_t epoch) {
    std::vector<std::size_t> order(count);
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (split != Split::Train || count < 2) return order;
    Rng rng(derive_seed({shuffle_seed, epoch, 0x5348u}));
    for (std::size_t i = count - 1; i > 0; --i) {
        const auto j = static_cast<std::size_t>(rng.below(i + 1));
        std::swap(order[i], order[j]);
    }
    return order;
}

SplitStream::SplitStream(const DatasetIndex& index, const GlossVocabulary& vocabulary, const LandmarkCache& cache,
                         Split split, std::uint64_t shuffle_seed, std::uint64_t epoch)
    : entries_(index.entries_for(split)), cache_(&cache) {
    labels_.reserve(entries_.size());
    for (const auto* e : entries_) {
        auto label = vocabulary.index_of(e->gloss);
        if (!label) throw VocabularyMismatch("gloss '" + e->gloss + "' of entry '" + e->source_id + "' is not in the vocabulary");
        labels_.push_back(*label);
    }
    order_ = epoch_order(entries_.size(), split, shuffle_seed, epoch);
}

bool SplitStream::next(Sample& out) {
    if (cursor_ >= order_.size()) return false;
    last_ = order_[cursor_++];
    const IndexEntry& e = *entries_[last_];
    out.source_id = e.source_id;
    out.sequence = cache_->load(e.source_id);
    out.label = labels_[last_];
    return true;
}

std::vector<Sample> load_split(const DatasetIndex& index, const GlossVocabulary& vocabulary, const LandmarkCache& cache,
                               Split split, std::uint64_t shuffle_seed, std::uint64_t epoch) {
    SplitStream stream(index, vocabulary, cache, split, shuffle_seed, epoch);
    std::vector<Sample> out;
    out.reserve(stream.size());
    Sample s;
    while (stream.next(s)) out.push_back(s);
    return out;
}

}  // namespace spoterkit
