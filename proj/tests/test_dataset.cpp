// Copyright (C) 2026 spoterkit contributors
// SPDX-License-Identifier: Apache-2.0
//

#include <gtest/gtest.h>

#include "spoterkit/dataset.hpp"
#include "spoterkit/errors.hpp"
#include "spoterkit/fixture.hpp"
#include "spoterkit/landmark_io.hpp"
#include "support.hpp"

using namespace spoterkit;
using namespace spoterkit::testing;
using nlohmann::json;

namespace {

json wlasl_doc() {
    return json::parse(R"([
      {"gloss": "book", "instances": [
         {"video_id": "1", "split": "train"}, {"video_id": "2", "split": "val"}, {"video_id": "3", "split": "test"}]},
      {"gloss": "drink", "instances": [{"video_id": 4, "split": "train"}]},
      {"gloss": "computer", "instances": [{"video_id": "5", "split": "train"}]}
    ])");
}

}  // namespace

TEST(Index, WlaslShapeKeepsSubsetInFileOrder) {
    const auto loaded = parse_index(wlasl_doc(), 2);
    EXPECT_EQ(loaded.vocabulary.glosses(), (std::vector<std::string>{"book", "drink"}));
    ASSERT_EQ(loaded.index.entries.size(), 4u);
    EXPECT_EQ(loaded.index.entries[3].source_id, "4");
    EXPECT_EQ(loaded.index.entries[1].split, Split::Validation);
    const auto stats = dataset_stats(loaded);
    EXPECT_EQ(stats.train, 2u);
    EXPECT_EQ(stats.validation, 1u);
    EXPECT_EQ(stats.test, 1u);
    EXPECT_EQ(stats.min_per_class, 1u);
    EXPECT_EQ(stats.max_per_class, 3u);
}

TEST(Index, FlatShape) {
    const auto doc = json::parse(R"({"vocabulary": ["a", "b"], "entries": [
        {"source_id": "x", "gloss": "b", "split": "test", "video": "x.mp4"}]})");
    const auto loaded = parse_index(doc, 100);
    ASSERT_EQ(loaded.index.entries.size(), 1u);
    EXPECT_EQ(loaded.index.entries[0].video, "x.mp4");
}

TEST(Index, Errors) {
    auto doc = wlasl_doc();
    doc[0]["instances"][0].erase("split");
    EXPECT_THROW(parse_index(doc, 3), MissingSplitError);
    doc = wlasl_doc();
    doc[1]["instances"][0]["video_id"] = "1";
    EXPECT_THROW(parse_index(doc, 3), FormatError);
    EXPECT_THROW(parse_index(json::parse(R"({"vocabulary": ["a"], "entries": [
        {"source_id": "x", "gloss": "zzz", "split": "train"}]})"), 5),
                 FormatError);
    EXPECT_THROW(parse_index(json::parse("42"), 5), FormatError);
    EXPECT_THROW(GlossVocabulary({"a", "a"}), FormatError);
}

TEST(EpochOrder, TrainShuffledOthersInOrder) {
    const auto a = epoch_order(20, Split::Train, 5, 1);
    EXPECT_EQ(a, epoch_order(20, Split::Train, 5, 1));
    EXPECT_NE(a, epoch_order(20, Split::Train, 5, 2));
    auto sorted = a;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < 20; ++i) EXPECT_EQ(sorted[i], i);
    const auto v = epoch_order(20, Split::Validation, 5, 1);
    for (std::size_t i = 0; i < 20; ++i) EXPECT_EQ(v[i], i);
}

TEST(Cache, StoreLoadAndMiss) {
    TempDir dir;
    LandmarkCache cache(dir.path(), "k1");
    Rng rng(51);
    PoseSequence seq = random_sequence(rng, 3);
    seq.source_id = "abc";
    EXPECT_FALSE(cache.contains("abc"));
    EXPECT_THROW(cache.load("abc"), CacheMiss);
    cache.store(seq);
    EXPECT_TRUE(cache.contains("abc"));
    EXPECT_EQ(cache.load("abc"), seq);
    EXPECT_EQ(LandmarkCache::resolve(dir.path()).key(), "k1");
    std::filesystem::create_directories(dir / "k2");
    EXPECT_THROW(LandmarkCache::resolve(dir.path()), CacheMiss);
}

TEST(Cache, KeyDependsOnMapAndVersion) {
    const auto map = LandmarkMap::mediapipe();
    EXPECT_EQ(LandmarkCache::key_for(map, "1"), LandmarkCache::key_for(map, "1"));
    EXPECT_NE(LandmarkCache::key_for(map, "1"), LandmarkCache::key_for(map, "2"));
}

TEST(Materialize, ExtractsMissingAndSkipsCached) {
    TempDir dir;
    const auto videos = dir / "videos";
    std::filesystem::create_directories(videos);
    write_test_video(videos / "1.avi", 5);
    write_test_video(videos / "3.avi", 4);
    const auto loaded = parse_index(wlasl_doc(), 1);  // book: ids 1, 2, 3
    LandmarkCache cache(dir / "cache", "k");
    Rng rng(52);
    ScriptedEstimator est({full_raw_frame(rng)});

    const auto report = materialize(loaded.index, cache, videos, &est);
    EXPECT_EQ(report.extracted, 2u);
    EXPECT_EQ(report.missing, 1u);
    ASSERT_EQ(report.failures.size(), 1u);
    EXPECT_EQ(report.failures[0].first, "2");
    EXPECT_EQ(cache.load("1").size(), 5u);
    EXPECT_EQ(cache.load("1").label, std::optional<std::string>("book"));

    const auto again = materialize(loaded.index, cache, videos, &est);
    EXPECT_EQ(again.cached, 2u);
    EXPECT_EQ(again.extracted, 0u);
    EXPECT_EQ(est.calls(), 9u);
}

TEST(Materialize, WithoutEstimatorReportsMissing) {
    TempDir dir;
    write_test_video(dir / "1.avi", 2);
    const auto loaded = parse_index(wlasl_doc(), 1);
    const auto report = materialize(loaded.index, LandmarkCache(dir / "cache", "k"), dir.path(), nullptr);
    EXPECT_EQ(report.missing, 3u);
}

TEST(SplitStream, LabelsAndVocabularyMismatch) {
    TempDir dir;
    const Fixture fx = write_fixture(dir.path(), {2, 1, 1, 5, 6, 3});
    const auto train = load_split(fx.loaded.index, fx.loaded.vocabulary, fx.cache, Split::Train);
    EXPECT_EQ(train.size(), 10u);
    for (const auto& s : train) EXPECT_EQ(fx.loaded.vocabulary.gloss(s.label), *s.sequence.label);
    EXPECT_THROW(load_split(fx.loaded.index, GlossVocabulary({"book"}), fx.cache, Split::Test), VocabularyMismatch);
}

TEST(Fixture, Reproducible) {
    TempDir a, b;
    write_fixture(a.path(), {2, 1, 1, 5, 6, 3});
    const Fixture fb = write_fixture(b.path(), {2, 1, 1, 5, 6, 3});
    const auto fa_cache = LandmarkCache::resolve(a / "cache");
    for (const auto& e : fb.loaded.index.entries) EXPECT_EQ(fa_cache.load(e.source_id), fb.cache.load(e.source_id));
}
