// Copyright (C) 2026 spoterkit contributors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line entry point.

#include <cstdlib>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "spoterkit/bench.hpp"
#include "spoterkit/errors.hpp"
#include "spoterkit/fixture.hpp"
#include "spoterkit/landmark_io.hpp"
#include "spoterkit/service.hpp"
#include "spoterkit/sweep.hpp"
#include "spoterkit/train.hpp"

namespace fs = std::filesystem;
using namespace spoterkit;
using nlohmann::json;

namespace {

LandmarkMap load_map(const std::string& path) { return path.empty() ? LandmarkMap::mediapipe() : read_landmark_map(path); }

std::vector<std::size_t> parse_lengths(const std::string& text) {
    std::vector<std::size_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t pos = 0;
        const unsigned long v = std::stoul(item, &pos);
        if (pos != item.size() || v == 0) throw ConfigError("--lengths: '" + item + "' is not a positive integer");
        out.push_back(v);
    }
    if (out.empty()) throw ConfigError("--lengths is empty");
    return out;
}

void print_metrics(const ClassificationMetrics& m, const GlossVocabulary& vocab, Split split) {
    json per_class = json::object();
    for (std::size_t i = 0; i < m.per_class_accuracy.size(); ++i) {
        if (m.per_class_accuracy[i]) per_class[vocab.gloss(i)] = *m.per_class_accuracy[i];
    }
    std::cout << json{{"split", split_name(split)},
                      {"samples", m.samples},
                      {"top1_macro", m.top1_macro},
                      {"top1_micro", m.top1_micro},
                      {"top5_micro", m.top5_micro},
                      {"per_class_accuracy", per_class}}
                     .dump(2)
              << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pose-based isolated sign recognition toolkit"};
    app.require_subcommand(1);

    // extract
    auto* extract = app.add_subcommand("extract", "Run the pose estimator over a video and write landmarks");
    std::string ex_video, ex_out, ex_map;
    double ex_max = 0.0;
    extract->add_option("--video", ex_video, "Input video")->required();
    extract->add_option("--out", ex_out, "Output landmark file (.json or .csv)")->required();
    extract->add_option("--map", ex_map, "Landmark map JSON (default: MediaPipe)");
    extract->add_option("--max-duration", ex_max, "Reject clips longer than this many seconds");

    // convert
    auto* convert = app.add_subcommand("convert", "Convert a raw estimator dump to the canonical format");
    std::string cv_in, cv_out, cv_map;
    bool cv_drop = false;
    convert->add_option("--in", cv_in, "Raw dump JSON")->required();
    convert->add_option("--out", cv_out, "Output landmark file (.json or .csv)")->required();
    convert->add_option("--map", cv_map, "Landmark map JSON (default: MediaPipe)");
    convert->add_flag("--drop-empty", cv_drop, "Drop frames without any detected landmark");

    // preprocess normalize
    auto* pre = app.add_subcommand("preprocess", "Preprocessing operations");
    pre->require_subcommand(1);
    auto* normalize = pre->add_subcommand("normalize", "Normalize a landmark file");
    std::string nm_in, nm_out;
    normalize->add_option("--in", nm_in)->required();
    normalize->add_option("--out", nm_out)->required();

    // dataset
    auto* dataset = app.add_subcommand("dataset", "Dataset index and landmark cache");
    dataset->require_subcommand(1);
    auto* materialize_cmd = dataset->add_subcommand("materialize", "Extract landmarks for every indexed video");
    std::string ds_index, ds_videos, ds_cache, ds_map;
    std::size_t ds_subset = 100;
    double ds_max = 0.0;
    materialize_cmd->add_option("--index", ds_index)->required();
    materialize_cmd->add_option("--videos", ds_videos)->required();
    materialize_cmd->add_option("--cache", ds_cache)->required();
    materialize_cmd->add_option("--subset", ds_subset, "Number of glosses to keep");
    materialize_cmd->add_option("--map", ds_map);
    materialize_cmd->add_option("--max-duration", ds_max);
    auto* stats = dataset->add_subcommand("stats", "Summarize an index");
    stats->add_option("--index", ds_index)->required();
    stats->add_option("--subset", ds_subset);

    // train
    auto* train_cmd = app.add_subcommand("train", "Train a model");
    std::string tr_index, tr_cache, tr_key, tr_config, tr_out;
    std::size_t tr_subset = 100;
    train_cmd->add_option("--index", tr_index)->required();
    train_cmd->add_option("--cache", tr_cache)->required();
    train_cmd->add_option("--cache-key", tr_key, "Cache key directory (default: the only one present)");
    train_cmd->add_option("--config", tr_config, "key = value run config");
    train_cmd->add_option("--out", tr_out, "Checkpoint path")->required();
    train_cmd->add_option("--subset", tr_subset);

    // evaluate
    auto* eval_cmd = app.add_subcommand("evaluate", "Score a checkpoint on one split");
    std::string ev_ckpt, ev_split = "test", ev_index, ev_cache, ev_key;
    std::size_t ev_subset = 100;
    eval_cmd->add_option("--ckpt", ev_ckpt)->required();
    eval_cmd->add_option("--split", ev_split);
    eval_cmd->add_option("--index", ev_index)->required();
    eval_cmd->add_option("--cache", ev_cache)->required();
    eval_cmd->add_option("--cache-key", ev_key);
    eval_cmd->add_option("--subset", ev_subset);

    // predict
    auto* predict_cmd = app.add_subcommand("predict", "Top-k glosses for one landmark file");
    std::string pr_ckpt, pr_in;
    std::size_t pr_k = 5;
    predict_cmd->add_option("--ckpt", pr_ckpt)->required();
    predict_cmd->add_option("--landmarks", pr_in)->required();
    predict_cmd->add_option("-k", pr_k);

    // bench
    auto* bench_cmd = app.add_subcommand("bench", "Inference latency and parameter count");
    std::string bn_ckpt, bn_lengths = "50,100,200", bn_out;
    std::size_t bn_reps = 20;
    bench_cmd->add_option("--ckpt", bn_ckpt)->required();
    bench_cmd->add_option("--lengths", bn_lengths);
    bench_cmd->add_option("--reps", bn_reps);
    bench_cmd->add_option("--out", bn_out, "Also write the report here");

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "Random search over augmentation parameters");
    std::string sw_space, sw_index, sw_cache, sw_key, sw_out, sw_config;
    std::size_t sw_trials = 20, sw_subset = 100;
    std::uint64_t sw_seed = 0;
    std::optional<std::size_t> sw_max_new;
    sweep_cmd->add_option("--space", sw_space)->required();
    sweep_cmd->add_option("--trials", sw_trials);
    sweep_cmd->add_option("--index", sw_index)->required();
    sweep_cmd->add_option("--cache", sw_cache)->required();
    sweep_cmd->add_option("--cache-key", sw_key);
    sweep_cmd->add_option("--out", sw_out)->required();
    sweep_cmd->add_option("--config", sw_config, "Base run config (model and optimizer settings)");
    sweep_cmd->add_option("--sweep-seed", sw_seed);
    sweep_cmd->add_option("--max-new-trials", sw_max_new, "Stop after this many new trials");
    sweep_cmd->add_option("--subset", sw_subset);

    // serve
    auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP inference service");
    std::string sv_ckpt, sv_host = "0.0.0.0", sv_map;
    int sv_port = 0;
    std::vector<std::string> sv_origins;
    double sv_max_video = 15.0, sv_max_mb = 50.0;
    serve_cmd->add_option("--ckpt", sv_ckpt, "Checkpoint (env SPOTERKIT_CKPT)");
    serve_cmd->add_option("--port", sv_port, "Port (env SPOTERKIT_PORT, default 8000)");
    serve_cmd->add_option("--host", sv_host);
    serve_cmd->add_option("--allow-origin", sv_origins, "CORS origin; repeatable");
    serve_cmd->add_option("--max-video-seconds", sv_max_video);
    serve_cmd->add_option("--max-payload-mb", sv_max_mb);
    serve_cmd->add_option("--map", sv_map);

    // fixture
    auto* fixture_cmd = app.add_subcommand("fixture", "Write the synthetic five-gloss dataset");
    std::string fx_out;
    FixtureOptions fx_opts;
    fixture_cmd->add_option("--out", fx_out)->required();
    fixture_cmd->add_option("--train-per-class", fx_opts.train_per_class);
    fixture_cmd->add_option("--seed", fx_opts.seed);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*extract) {
            auto estimator = make_configured_estimator(load_map(ex_map));
            ExtractOptions opts;
            opts.max_duration_s = ex_max;
            write_sequence(extract_landmarks(ex_video, *estimator, opts), ex_out);
        } else if (*convert) {
            const RawDump dump = read_raw_dump(cv_in);
            PoseSequence seq = convert_sequence(dump.frames, dump.fps, load_map(cv_map), dump.source_id, dump.label);
            if (cv_drop) seq = drop_empty_frames(seq);
            write_sequence(seq, cv_out);
        } else if (*normalize) {
            const auto result = normalize_sequence(read_sequence(nm_in));
            write_sequence(result.sequence, nm_out);
            if (result.report.body_degenerate) std::cerr << "warning: body normalization is degenerate\n";
        } else if (*materialize_cmd) {
            const auto loaded = load_index(ds_index, ds_subset);
            const LandmarkMap map = load_map(ds_map);
            std::unique_ptr<EstimatorAdapter> estimator;
            try {
                estimator = make_configured_estimator(map);
            } catch (const EstimatorUnavailable& e) {
                std::cerr << "warning: " << e.what() << "; only cached entries are available\n";
            }
            const std::string key =
                LandmarkCache::key_for(map, estimator ? estimator->version() : std::string("unavailable"));
            ExtractOptions opts;
            opts.max_duration_s = ds_max;
            const auto report = materialize(loaded.index, LandmarkCache(ds_cache, key), ds_videos, estimator.get(), opts);
            json failures = json::array();
            for (const auto& [id, reason] : report.failures) failures.push_back({{"source_id", id}, {"reason", reason}});
            std::cout << json{{"cache_key", key},
                              {"extracted", report.extracted},
                              {"cached", report.cached},
                              {"missing", report.missing},
                              {"failures", failures}}
                             .dump(2)
                      << "\n";
        } else if (*stats) {
            const auto s = dataset_stats(load_index(ds_index, ds_subset));
            std::cout << json{{"glosses", s.glosses},
                              {"train", s.train},
                              {"val", s.validation},
                              {"test", s.test},
                              {"min_per_class", s.min_per_class},
                              {"max_per_class", s.max_per_class}}
                             .dump(2)
                      << "\n";
        } else if (*train_cmd) {
            ModelConfig model_cfg;
            TrainConfig train_cfg;
            if (!tr_config.empty()) load_run_config(tr_config, model_cfg, train_cfg);
            const auto loaded = load_index(tr_index, tr_subset);
            const auto cache = LandmarkCache::resolve(tr_cache, tr_key);
            const Checkpoint ckpt =
                train({loaded.index, loaded.vocabulary, cache}, model_cfg, train_cfg, [](const EpochMetrics& m) {
                    std::cerr << m.to_json().dump() << "\n";
                });
            save_checkpoint(ckpt, tr_out);
            std::cout << json{{"checkpoint", tr_out}, {"model_id", ckpt.model_id()}, {"selected_epoch", ckpt.selected_epoch}}
                             .dump(2)
                      << "\n";
        } else if (*eval_cmd) {
            const Checkpoint ckpt = load_checkpoint(ev_ckpt);
            const auto loaded = load_index(ev_index, ev_subset);
            const Split split = parse_split(ev_split);
            print_metrics(evaluate(ckpt, loaded.index, LandmarkCache::resolve(ev_cache, ev_key), split), ckpt.vocabulary,
                          split);
        } else if (*predict_cmd) {
            const Checkpoint ckpt = load_checkpoint(pr_ckpt);
            const Prediction p = predict_topk(normalize_sequence(read_sequence(pr_in)).sequence, ckpt, pr_k);
            json out = json::array();
            for (const auto& s : p.ranked) out.push_back({{"gloss", s.gloss}, {"probability", s.probability}});
            std::cout << json{{"predictions", out}, {"model_id", ckpt.model_id()}}.dump(2) << "\n";
        } else if (*bench_cmd) {
            const Checkpoint ckpt = load_checkpoint(bn_ckpt);
            const auto report = benchmark_inference(ckpt.model, parse_lengths(bn_lengths), bn_reps);
            json doc = report.to_json();
            doc["analytic_parameter_count"] = count_parameters(ckpt.model.config());
            doc["model_id"] = ckpt.model_id();
            std::cout << doc.dump(2) << "\n";
            if (!bn_out.empty()) write_file_atomic(bn_out, doc.dump(2) + "\n");
        } else if (*sweep_cmd) {
            ModelConfig model_cfg;
            TrainConfig base;
            if (!sw_config.empty()) load_run_config(sw_config, model_cfg, base);
            const auto space = SearchSpace::load(sw_space);
            const auto loaded = load_index(sw_index, sw_subset);
            const auto cache = LandmarkCache::resolve(sw_cache, sw_key);
            const TrainInputs inputs{loaded.index, loaded.vocabulary, cache};
            SweepOptions opts;
            opts.n_trials = sw_trials;
            opts.sweep_seed = sw_seed;
            opts.train_seed = base.global_seed;
            opts.out_dir = sw_out;
            opts.max_new_trials = sw_max_new;
            const auto result = run_sweep(space, opts, training_runner(inputs, model_cfg, base));
            std::cout << json{{"trials_recorded", result.ledger.size()},
                              {"newly_run", result.newly_run},
                              {"best", result.best ? result.best->to_json() : json(nullptr)}}
                             .dump(2)
                      << "\n";
        } else if (*serve_cmd) {
            if (sv_ckpt.empty()) {
                if (const char* env = std::getenv(kCheckpointEnv)) sv_ckpt = env;
            }
            if (sv_ckpt.empty()) throw ConfigError("no checkpoint: pass --ckpt or set SPOTERKIT_CKPT");
            if (sv_port == 0) {
                const char* env = std::getenv(kPortEnv);
                sv_port = env ? std::atoi(env) : 8000;
            }
            ServiceOptions opts;
            if (!sv_origins.empty()) opts.allowed_origins = sv_origins;
            opts.max_video_seconds = sv_max_video;
            opts.max_payload_bytes = static_cast<std::size_t>(sv_max_mb * 1024 * 1024);
            std::unique_ptr<EstimatorAdapter> estimator;
            try {
                estimator = make_configured_estimator(load_map(sv_map));
            } catch (const EstimatorUnavailable& e) {
                std::cerr << "warning: " << e.what() << "; video requests will return 503\n";
            }
            InferenceService service(load_checkpoint(sv_ckpt), std::move(estimator), opts);
            std::cerr << "serving " << service.model_id() << " on " << sv_host << ":" << sv_port << "\n";
            if (!serve(service, sv_host, sv_port)) throw ConfigError("cannot bind " + sv_host + ":" + std::to_string(sv_port));
        } else if (*fixture_cmd) {
            const Fixture fx = write_fixture(fx_out, fx_opts);
            std::cout << json{{"index", fx.index_path.string()}, {"cache", fx.cache.directory().string()}}.dump(2)
                      << "\n";
        }
    } catch (const NonFiniteLoss& e) {
        std::cerr << "error: non-finite loss on sample '" << e.sample_id() << "'\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
