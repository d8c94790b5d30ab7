// Copyright (C) 2026 spoterkit contributors
// SPDX-License-Identifier: Apache-2.0
//

#include "spoterkit/service.hpp"

#include <unistd.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <csignal>
#include <cstdlib>
#include <thread>

#include "httplib.h"
#include "spoterkit/errors.hpp"
#include "spoterkit/landmark_io.hpp"
#include "spoterkit/preprocess.hpp"
#include "spoterkit/train.hpp"

namespace spoterkit {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

ApiResponse error(int status, std::string message) { return {status, {{"error", std::move(message)}}}; }

bool any_detection(const PoseSequence& seq) {
    return std::any_of(seq.frames.begin(), seq.frames.end(), [](const SkeletalFrame& f) { return f.present_count() > 0; });
}

// Uploaded bytes go to a private temporary file that OpenCV can open.
class TempFile {
public:
    explicit TempFile(std::string_view bytes) {
        std::string tmpl = (fs::temp_directory_path() / "spoterkit-upload-XXXXXX").string();
        const int fd = ::mkstemp(tmpl.data());
        if (fd < 0) throw FormatError("cannot create a temporary file for the upload");
        path_ = tmpl;
        std::size_t off = 0;
        while (off < bytes.size()) {
            const ssize_t n = ::write(fd, bytes.data() + off, bytes.size() - off);
            if (n <= 0) break;
            off += static_cast<std::size_t>(n);
        }
        ::close(fd);
        if (off != bytes.size()) throw FormatError("cannot buffer the upload");
    }
    ~TempFile() {
        std::error_code ec;
        fs::remove(path_, ec);
    }
    TempFile(const TempFile&) = delete;
    TempFile& operator=(const TempFile&) = delete;

    const fs::path& path() const noexcept { return path_; }

private:
    fs::path path_;
};

void send(httplib::Response& res, const ApiResponse& r) {
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
}

std::optional<std::string> query_k(const httplib::Request& req) {
    if (!req.has_param("k")) return std::nullopt;
    return req.get_param_value("k");
}

volatile std::sig_atomic_t g_stop = 0;

void on_signal(int) { g_stop = 1; }

}  // namespace

InferenceService::InferenceService(Checkpoint checkpoint, std::unique_ptr<EstimatorAdapter> estimator,
                                   ServiceOptions options)
    : ckpt_(std::move(checkpoint)),
      model_id_(ckpt_.model_id()),
      estimator_(std::move(estimator)),
      options_(std::move(options)) {}

InferenceService::~InferenceService() = default;

ApiResponse InferenceService::health() const { return {200, {{"status", "ok"}, {"model_id", model_id_}}}; }

ApiResponse InferenceService::classes() const {
    return {200, {{"classes", ckpt_.vocabulary.glosses()}, {"model_id", model_id_}}};
}

std::optional<ApiResponse> InferenceService::parse_k(const std::optional<std::string>& k, std::size_t& out) const {
    out = 5;
    if (k) {
        long long v = 0;
        const auto [ptr, ec] = std::from_chars(k->data(), k->data() + k->size(), v);
        if (k->empty() || ec != std::errc() || ptr != k->data() + k->size()) {
            return error(400, "query parameter 'k' must be an integer");
        }
        if (v < 1) return error(400, "query parameter 'k' must be at least 1");
        out = static_cast<std::size_t>(v);
    }
    if (out > ckpt_.vocabulary.size()) {
        return error(400, "query parameter 'k' must not exceed the number of classes (" +
                              std::to_string(ckpt_.vocabulary.size()) + ")");
    }
    return std::nullopt;
}

ApiResponse InferenceService::respond(const PoseSequence& raw, std::size_t k, double extract_ms) const {
    const auto t0 = Clock::now();
    const PoseSequence normalized = normalize_sequence(raw).sequence;
    const Prediction pred = predict_topk(normalized, ckpt_, k);
    const double infer_ms = ms_since(t0);
    json preds = json::array();
    for (const auto& p : pred.ranked) preds.push_back({{"gloss", p.gloss}, {"probability", p.probability}});
    return {200,
            {{"predictions", preds},
             {"model_id", model_id_},
             {"timing", {{"extract_ms", extract_ms}, {"infer_ms", infer_ms}}}}};
}

ApiResponse InferenceService::predict_landmarks(std::string_view document, const std::optional<std::string>& k) const {
    std::size_t kk = 0;
    if (auto err = parse_k(k, kk)) return *err;
    if (document.size() > options_.max_payload_bytes) return error(413, "payload exceeds the size limit");
    PoseSequence seq;
    try {
        seq = parse_sequence_document(document);
        seq.validate();
    } catch (const Error& e) {
        return error(400, std::string("invalid landmark document: ") + e.what());
    }
    if (seq.frames.empty()) return error(400, "invalid landmark document: 'frames' is empty");
    if (!any_detection(seq)) return error(422, "no landmark present in any frame");
    return respond(seq, kk, 0.0);
}

ApiResponse InferenceService::predict_video(std::string_view bytes, const std::optional<std::string>& k) {
    std::size_t kk = 0;
    if (auto err = parse_k(k, kk)) return *err;
    if (bytes.size() > options_.max_payload_bytes) return error(413, "payload exceeds the size limit");
    if (bytes.empty()) return error(400, "field 'video': no frames decoded (empty upload)");
    if (!estimator_) return error(503, "pose estimator unavailable; set " + std::string(kEstimatorEnv));

    const auto t0 = Clock::now();
    PoseSequence seq;
    try {
        TempFile tmp(bytes);
        ExtractOptions opts;
        opts.max_duration_s = options_.max_video_seconds;
        std::unique_lock lock(estimator_mutex_, std::defer_lock);
        if (!estimator_->reentrant()) lock.lock();
        seq = extract_landmarks(tmp.path(), *estimator_, opts);
    } catch (const VideoTooLong& e) {
        return error(413, std::string("field 'video': ") + e.what());
    } catch (const VideoDecodeError& e) {
        return error(400, std::string("field 'video': ") + e.what());
    } catch (const EstimatorUnavailable& e) {
        return error(503, e.what());
    } catch (const SchemaMismatch& e) {
        return error(503, std::string("pose estimator returned malformed landmarks: ") + e.what());
    }
    const double extract_ms = ms_since(t0);
    if (!any_detection(seq)) return error(422, "no person detected in any frame");
    return respond(seq, kk, extract_ms);
}

void InferenceService::mount(httplib::Server& server) {
    server.set_payload_max_length(options_.max_payload_bytes);

    server.set_post_routing_handler([this](const httplib::Request& req, httplib::Response& res) {
        if (!req.has_header("Origin")) return;
        const std::string origin = req.get_header_value("Origin");
        const auto& allowed = options_.allowed_origins;
        if (std::find(allowed.begin(), allowed.end(), origin) == allowed.end()) return;
        res.set_header("Access-Control-Allow-Origin", origin);
        res.set_header("Vary", "Origin");
        res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
    });

    server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
        if (!res.body.empty()) return;
        const std::string message = res.status == 413 ? "payload exceeds the size limit"
                                    : res.status == 404 ? "no such endpoint"
                                                        : httplib::status_message(res.status);
        res.set_content(json{{"error", message}}.dump(), "application/json");
    });

    server.Get("/api/health", [this](const httplib::Request&, httplib::Response& res) { send(res, health()); });
    server.Get("/api/classes", [this](const httplib::Request&, httplib::Response& res) { send(res, classes()); });
    server.Options("/api/predict", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    server.Post("/api/predict", [this](const httplib::Request& req, httplib::Response& res) {
        const auto k = query_k(req);
        if (req.is_multipart_form_data()) {
            if (!req.has_file("video")) return send(res, error(400, "multipart request is missing the 'video' part"));
            if (req.files.size() != 1) return send(res, error(400, "multipart request must contain only the 'video' part"));
            return send(res, predict_video(req.get_file_value("video").content, k));
        }
        const std::string type = req.get_header_value("Content-Type");
        if (type.rfind("video/", 0) == 0 || type == "application/octet-stream") {
            return send(res, predict_video(req.body, k));
        }
        if (!type.empty() && type.find("json") == std::string::npos && type.find("csv") == std::string::npos &&
            type.rfind("text/plain", 0) != 0) {
            return send(res, error(400, "unsupported Content-Type '" + type +
                                            "'; send a landmark document or a multipart 'video' part"));
        }
        send(res, predict_landmarks(req.body, k));
    });
}

bool serve(InferenceService& service, const std::string& host, int port) {
    httplib::Server server;
    service.mount(server);
    if (!server.bind_to_port(host, port)) return false;
    g_stop = 0;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::thread watcher([&] {
        while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(50));
        server.stop();
    });
    server.listen_after_bind();
    g_stop = 1;
    watcher.join();
    return true;
}

}  // namespace spoterkit
