// Copyright (C) 2026 spoterkit contributors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstddef>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "spoterkit/checkpoint.hpp"
#include "spoterkit/video.hpp"

namespace httplib {
class Server;
}

namespace spoterkit {

inline constexpr const char* kCheckpointEnv = "SPOTERKIT_CKPT";
inline constexpr const char* kPortEnv = "SPOTERKIT_PORT";

struct ServiceOptions {
    std::size_t max_payload_bytes = 50u * 1024u * 1024u;
    /// Longer clips are rejected with 413.
    double max_video_seconds = 15.0;
    /// Origins that receive CORS headers.
    std::vector<std::string> allowed_origins = {"http://localhost:5173", "http://127.0.0.1:5173",
                                                "http://localhost:3000", "http://127.0.0.1:3000"};
};

struct ApiResponse {
    int status = 200;
    nlohmann::json body;
};

/// Request handling for the HTTP API, usable without a socket.
///
///   GET  /api/health   -> {"status": "ok", "model_id": ...}
///   GET  /api/classes  -> {"classes": [...], "model_id": ...}
///   POST /api/predict  -> {"predictions": [{"gloss", "probability"}], "model_id",
///                          "timing": {"extract_ms", "infer_ms"}}
///
/// /api/predict takes either a landmark document (application/json or text/csv body)
/// or a multipart/form-data upload with a `video` part, plus an optional `k` query
/// parameter (default 5). Errors are {"error": message} with status 400, 413, 422 or 503.
class InferenceService {
public:
    /// `estimator` may be null; video requests then answer 503.
    InferenceService(Checkpoint checkpoint, std::unique_ptr<EstimatorAdapter> estimator, ServiceOptions options = {});
    ~InferenceService();

    const Checkpoint& checkpoint() const noexcept { return ckpt_; }
    const std::string& model_id() const noexcept { return model_id_; }
    const ServiceOptions& options() const noexcept { return options_; }
    bool has_estimator() const noexcept { return estimator_ != nullptr; }

    ApiResponse health() const;
    ApiResponse classes() const;
    ApiResponse predict_landmarks(std::string_view document, const std::optional<std::string>& k) const;
    ApiResponse predict_video(std::string_view bytes, const std::optional<std::string>& k);

    /// Installs the routes, CORS handling, payload cap and JSON error bodies.
    void mount(httplib::Server& server);

private:
    std::optional<ApiResponse> parse_k(const std::optional<std::string>& k, std::size_t& out) const;
    ApiResponse respond(const PoseSequence& raw, std::size_t k, double extract_ms) const;

    Checkpoint ckpt_;
    std::string model_id_;
    std::unique_ptr<EstimatorAdapter> estimator_;
    std::mutex estimator_mutex_;
    ServiceOptions options_;
};

/// Serves until the process receives SIGINT/SIGTERM. Returns false if binding fails.
bool serve(InferenceService& service, const std::string& host, int port);

}  // namespace spoterkit
