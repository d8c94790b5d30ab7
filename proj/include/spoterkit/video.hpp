// Copyright (C) 2026 spoterkit contributors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "spoterkit/errors.hpp"
#include "spoterkit/skeletal.hpp"

namespace spoterkit {

/// An 8-bit interleaved BGR image.
struct Image {
    int width = 0;
    int height = 0;
    int channels = 3;
    std::vector<std::uint8_t> pixels;
};

/// Sequential frame reader over a video container (OpenCV backend).
class VideoReader {
public:
    /// Throws VideoDecodeError if the file cannot be opened as a video.
    explicit VideoReader(const std::filesystem::path& path);
    ~VideoReader();
    VideoReader(const VideoReader&) = delete;
    VideoReader& operator=(const VideoReader&) = delete;

    double fps() const noexcept { return fps_; }

    /// Reads the next frame; false at end of stream.
    bool next(Image& out);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    double fps_ = 0.0;
};

/// Writes an MJPG/AVI clip; used by tests and the fixture tooling.
void write_video(const std::filesystem::path& path, const std::vector<Image>& frames, double fps);

/// A whole-body pose estimator producing body + hand landmark lists per frame.
///
/// Adapters are not assumed reentrant: callers sharing one instance across
/// threads must serialize access unless reentrant() returns true.
class EstimatorAdapter {
public:
    virtual ~EstimatorAdapter() = default;

    virtual std::string name() const = 0;
    /// Version string of the backend; part of the landmark cache key.
    virtual std::string version() const = 0;
    virtual const LandmarkMap& landmark_map() const = 0;
    virtual bool reentrant() const { return false; }

    virtual RawEstimatorFrame estimate(const Image& frame) = 0;
};

/// Runs an external estimator process and talks to it over stdin/stdout.
///
/// Protocol: on start the process prints one JSON line
///   {"estimator": <name>, "version": <string>}   or   {"error": <message>}.
/// For each frame it receives "FRAME <width> <height> <channels>\n" followed by
/// width*height*channels BGR bytes, and answers with one raw-frame JSON line
/// ({"body": ..., "left_hand": ..., "right_hand": ...}). Closing stdin ends it.
/// One instance per worker.
class SubprocessEstimator final : public EstimatorAdapter {
public:
    /// Throws EstimatorUnavailable when the process cannot start or reports an error.
    SubprocessEstimator(std::string command, LandmarkMap map);
    ~SubprocessEstimator() override;

    std::string name() const override { return name_; }
    std::string version() const override { return version_; }
    const LandmarkMap& landmark_map() const override { return map_; }

    RawEstimatorFrame estimate(const Image& frame) override;

private:
    std::string read_line();
    void shutdown() noexcept;

    LandmarkMap map_;
    std::string name_;
    std::string version_;
    int pid_ = -1;
    int to_child_ = -1;
    std::FILE* from_child_ = nullptr;
};

/// Environment variable naming the estimator command used by the CLI and service.
inline constexpr const char* kEstimatorEnv = "SPOTERKIT_ESTIMATOR";

/// Builds the estimator configured through SPOTERKIT_ESTIMATOR; throws EstimatorUnavailable if unset.
std::unique_ptr<EstimatorAdapter> make_configured_estimator(const LandmarkMap& map);

struct ExtractOptions {
    /// Reject clips longer than this many seconds (0 = unlimited).
    double max_duration_s = 0.0;
};

/// Decodes every frame, runs the estimator on each and converts to the canonical
/// schema. Throws VideoDecodeError ("no frames decoded" for empty clips).
PoseSequence extract_landmarks(const std::filesystem::path& video_path, EstimatorAdapter& estimator,
                               const ExtractOptions& options = {});

/// Thrown by extract_landmarks when a clip exceeds ExtractOptions::max_duration_s.
class VideoTooLong : public VideoDecodeError {
public:
    using VideoDecodeError::VideoDecodeError;
};

}  // namespace spoterkit
