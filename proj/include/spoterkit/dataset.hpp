// Copyright (C) 2026 spoterkit contributors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "spoterkit/skeletal.hpp"
#include "spoterkit/video.hpp"
#include "spoterkit/vocabulary.hpp"

namespace spoterkit {

enum class Split { Train, Validation, Test };

std::string_view split_name(Split split) noexcept;
/// Accepts "train", "val"/"validation", "test"; throws FormatError otherwise.
Split parse_split(std::string_view name);

struct IndexEntry {
    std::string source_id;
    std::string gloss;
    Split split = Split::Train;
    /// Video file relative to the videos directory; empty means "<source_id>.<ext>".
    std::string video;
};

struct DatasetIndex {
    std::vector<IndexEntry> entries;
    std::string provenance_path;
    std::string provenance_digest;

    std::vector<const IndexEntry*> entries_for(Split split) const;
};

struct LoadedIndex {
    DatasetIndex index;
    GlossVocabulary vocabulary;
};

/// Parses a WLASL-style index and keeps the first `subset_size` glosses in file order.
///
/// Two shapes are accepted (unknown fields are ignored):
///   [{"gloss": "book", "instances": [{"video_id": "69241", "split": "train", ...}, ...]}, ...]
///   {"vocabulary": ["book", ...], "entries": [{"source_id": ..., "gloss": ..., "split": ..., "video": ...}]}
/// Splits are taken verbatim. Throws FormatError / MissingSplitError.
LoadedIndex load_index(const std::filesystem::path& path, std::size_t subset_size = 100);
LoadedIndex parse_index(const nlohmann::json& doc, std::size_t subset_size, std::string provenance_path = {},
                        std::string provenance_digest = {});

struct DatasetStats {
    std::size_t glosses = 0;
    std::size_t train = 0, validation = 0, test = 0;
    std::size_t min_per_class = 0, max_per_class = 0;
};

DatasetStats dataset_stats(const LoadedIndex& loaded);

/// Landmark files under <root>/<key>/<source_id>.landmarks, where the key digests
/// the landmark map and the estimator version.
class LandmarkCache {
public:
    LandmarkCache(std::filesystem::path root, std::string key);

    static std::string key_for(const LandmarkMap& map, std::string_view estimator_version);

    /// Opens <root>/<key> when `key` is given; otherwise the single key directory under
    /// root. Throws CacheMiss when that is ambiguous or absent.
    static LandmarkCache resolve(const std::filesystem::path& root, std::string_view key = {});

    const std::filesystem::path& root() const noexcept { return root_; }
    const std::string& key() const noexcept { return key_; }
    std::filesystem::path directory() const { return root_ / key_; }
    std::filesystem::path path_for(std::string_view source_id) const;

    bool contains(std::string_view source_id) const;
    /// Throws CacheMiss naming the entry.
    PoseSequence load(std::string_view source_id) const;
    /// Atomic write-temp-then-rename.
    void store(const PoseSequence& seq) const;

private:
    std::filesystem::path root_;
    std::string key_;
};

struct MaterializationReport {
    std::size_t extracted = 0;
    std::size_t cached = 0;
    std::size_t missing = 0;
    std::vector<std::pair<std::string, std::string>> failures;  // (source_id, reason)

    friend bool operator==(const MaterializationReport&, const MaterializationReport&) = default;
};

/// Makes sure every entry has a cached landmark file. Entries already cached are
/// skipped; unreadable or missing videos are reported, never fatal. `estimator`
/// may be null, in which case uncached entries are reported missing.
MaterializationReport materialize(const DatasetIndex& index, const LandmarkCache& cache,
                                  const std::filesystem::path& videos_dir, EstimatorAdapter* estimator,
                                  const ExtractOptions& options = {});

/// Visiting order of a split for one epoch. Training entries are shuffled as a pure
/// function of (shuffle_seed, epoch); validation and test keep index order.
std::vector<std::size_t> epoch_order(std::size_t count, Split split, std::uint64_t shuffle_seed, std::uint64_t epoch);

struct Sample {
    std::string source_id;
    PoseSequence sequence;
    std::size_t label = 0;
};

/// Single-consumer stream over one split for one epoch.
class SplitStream {
public:
    /// Labels are resolved through `vocabulary`; throws VocabularyMismatch if a gloss is unknown.
    SplitStream(const DatasetIndex& index, const GlossVocabulary& vocabulary, const LandmarkCache& cache, Split split,
                std::uint64_t shuffle_seed = 0, std::uint64_t epoch = 0);

    std::size_t size() const noexcept { return entries_.size(); }
    /// False once the split is exhausted.
    bool next(Sample& out);
    /// Index-order position of the last sample returned by next().
    std::size_t last_index() const noexcept { return last_; }

private:
    std::vector<const IndexEntry*> entries_;
    std::vector<std::size_t> labels_;
    std::vector<std::size_t> order_;
    const LandmarkCache* cache_;
    std::size_t cursor_ = 0;
    std::size_t last_ = 0;
};

/// Convenience: loads a whole split in epoch order.
std::vector<Sample> load_split(const DatasetIndex& index, const GlossVocabulary& vocabulary, const LandmarkCache& cache,
                               Split split, std::uint64_t shuffle_seed = 0, std::uint64_t epoch = 0);

}  // namespace spoterkit
