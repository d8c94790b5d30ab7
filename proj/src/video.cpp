// Copyright (C) 2026 spoterkit contributors
// SPDX-License-Identifier: Apache-2.0
//

#include "spoterkit/video.hpp"

#include <csignal>
#include <cstdlib>
#include <cstring>
#include <fcntl.h>
#include <sys/wait.h>
#include <unistd.h>

#include <opencv2/core/utils/logger.hpp>
#include <opencv2/imgproc.hpp>
#include <opencv2/videoio.hpp>

#include "json.hpp"
#include "spoterkit/errors.hpp"
#include "spoterkit/landmark_io.hpp"

namespace spoterkit {

namespace fs = std::filesystem;

namespace {

void quiet_opencv() {
    static const bool once = [] {
        cv::utils::logging::setLogLevel(cv::utils::logging::LOG_LEVEL_SILENT);
        return true;
    }();
    (void)once;
}

void write_all(int fd, const void* data, std::size_t size) {
    const auto* p = static_cast<const char*>(data);
    while (size > 0) {
        const ssize_t n = ::write(fd, p, size);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw EstimatorUnavailable(std::string("estimator process write failed: ") + std::strerror(errno));
        }
        p += n;
        size -= static_cast<std::size_t>(n);
    }
}

}  // namespace

// ------------------------------------------------------------------ VideoReader

struct VideoReader::Impl {
    cv::VideoCapture capture;
    cv::Mat scratch;
};

VideoReader::VideoReader(const fs::path& path) : impl_(std::make_unique<Impl>()) {
    quiet_opencv();
    std::error_code ec;
    if (!fs::is_regular_file(path, ec)) throw VideoDecodeError("video file not found: " + path.string());
    if (fs::file_size(path, ec) == 0) throw VideoDecodeError("no frames decoded: empty video file");
    bool opened = false;
    try {
        opened = impl_->capture.open(path.string(), cv::CAP_FFMPEG) ||
                 impl_->capture.open(path.string(), cv::CAP_ANY);
    } catch (const cv::Exception&) {
        opened = false;
    }
    if (!opened) throw VideoDecodeError("cannot decode video: " + path.string());
    fps_ = impl_->capture.get(cv::CAP_PROP_FPS);
    if (!(fps_ > 0.0) || !std::isfinite(fps_)) fps_ = 25.0;
}

VideoReader::~VideoReader() = default;

bool VideoReader::next(Image& out) {
    cv::Mat& m = impl_->scratch;
    try {
        if (!impl_->capture.read(m) || m.empty()) return false;
    } catch (const cv::Exception& e) {
        throw VideoDecodeError(std::string("video decode failed: ") + e.what());
    }
    if (m.type() != CV_8UC3) {
        cv::Mat converted;
        if (m.channels() == 1) {
            cv::cvtColor(m, converted, cv::COLOR_GRAY2BGR);
        } else if (m.channels() == 4) {
            cv::cvtColor(m, converted, cv::COLOR_BGRA2BGR);
        } else {
            m.convertTo(converted, CV_8UC3);
        }
        m = converted;
    }
    out.width = m.cols;
    out.height = m.rows;
    out.channels = 3;
    out.pixels.resize(static_cast<std::size_t>(m.cols) * m.rows * 3);
    for (int r = 0; r < m.rows; ++r) {
        std::memcpy(out.pixels.data() + static_cast<std::size_t>(r) * m.cols * 3, m.ptr(r),
                    static_cast<std::size_t>(m.cols) * 3);
    }
    return true;
}

void write_video(const fs::path& path, const std::vector<Image>& frames, double fps) {
    quiet_opencv();
    if (frames.empty()) throw VideoDecodeError("write_video: no frames");
    const cv::Size size(frames.front().width, frames.front().height);
    cv::VideoWriter writer(path.string(), cv::CAP_OPENCV_MJPEG, cv::VideoWriter::fourcc('M', 'J', 'P', 'G'), fps,
                           size);
    if (!writer.isOpened()) throw VideoDecodeError("cannot open video writer for " + path.string());
    for (const auto& img : frames) {
        cv::Mat m(img.height, img.width, CV_8UC3, const_cast<std::uint8_t*>(img.pixels.data()));
        writer.write(m);
    }
}

// ------------------------------------------------------------------ SubprocessEstimator

SubprocessEstimator::SubprocessEstimator(std::string command, LandmarkMap map) : map_(std::move(map)) {
    map_.validate();
    std::signal(SIGPIPE, SIG_IGN);
    int in_pipe[2];   // parent -> child
    int out_pipe[2];  // child -> parent
    if (::pipe(in_pipe) != 0) throw EstimatorUnavailable("pipe() failed");
    if (::pipe(out_pipe) != 0) {
        ::close(in_pipe[0]);
        ::close(in_pipe[1]);
        throw EstimatorUnavailable("pipe() failed");
    }
    const pid_t pid = ::fork();
    if (pid < 0) throw EstimatorUnavailable("fork() failed");
    if (pid == 0) {
        ::dup2(in_pipe[0], STDIN_FILENO);
        ::dup2(out_pipe[1], STDOUT_FILENO);
        ::close(in_pipe[0]);
        ::close(in_pipe[1]);
        ::close(out_pipe[0]);
        ::close(out_pipe[1]);
        ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        ::_exit(127);
    }
    ::close(in_pipe[0]);
    ::close(out_pipe[1]);
    ::fcntl(in_pipe[1], F_SETFD, FD_CLOEXEC);
    ::fcntl(out_pipe[0], F_SETFD, FD_CLOEXEC);
    pid_ = pid;
    to_child_ = in_pipe[1];
    from_child_ = ::fdopen(out_pipe[0], "r");

    std::string hello;
    try {
        hello = read_line();
    } catch (const EstimatorUnavailable& e) {
        shutdown();
        throw EstimatorUnavailable("estimator command '" + command + "' did not start: " + e.what());
    }
    auto doc = nlohmann::json::parse(hello, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
        shutdown();
        throw EstimatorUnavailable("estimator command '" + command + "' sent an invalid handshake");
    }
    if (doc.contains("error")) {
        shutdown();
        throw EstimatorUnavailable("estimator unavailable: " + doc["error"].dump());
    }
    name_ = doc.value("estimator", std::string("external"));
    version_ = doc.value("version", std::string("unknown"));
}

SubprocessEstimator::~SubprocessEstimator() { shutdown(); }

void SubprocessEstimator::shutdown() noexcept {
    if (to_child_ >= 0) {
        ::close(to_child_);
        to_child_ = -1;
    }
    if (from_child_) {
        std::fclose(from_child_);
        from_child_ = nullptr;
    }
    if (pid_ > 0) {
        int status = 0;
        ::waitpid(pid_, &status, 0);
        pid_ = -1;
    }
}

std::string SubprocessEstimator::read_line() {
    if (!from_child_) throw EstimatorUnavailable("estimator process is not running");
    std::string line;
    int c;
    while ((c = std::fgetc(from_child_)) != EOF) {
        if (c == '\n') return line;
        line.push_back(static_cast<char>(c));
    }
    if (line.empty()) throw EstimatorUnavailable("estimator process closed its output");
    return line;
}

RawEstimatorFrame SubprocessEstimator::estimate(const Image& frame) {
    if (to_child_ < 0) throw EstimatorUnavailable("estimator process is not running");
    const std::string header = "FRAME " + std::to_string(frame.width) + " " + std::to_string(frame.height) + " " +
                               std::to_string(frame.channels) + "\n";
    write_all(to_child_, header.data(), header.size());
    write_all(to_child_, frame.pixels.data(), frame.pixels.size());
    const std::string reply = read_line();
    auto doc = nlohmann::json::parse(reply, nullptr, false);
    if (doc.is_discarded()) throw EstimatorUnavailable("estimator returned invalid JSON");
    if (doc.is_object() && doc.contains("error")) throw EstimatorUnavailable("estimator error: " + doc["error"].dump());
    return raw_frame_from_json(doc);
}

std::unique_ptr<EstimatorAdapter> make_configured_estimator(const LandmarkMap& map) {
    const char* cmd = std::getenv(kEstimatorEnv);
    if (!cmd || !*cmd) {
        throw EstimatorUnavailable(std::string("no pose estimator configured; set ") + kEstimatorEnv +
                                   " to an estimator command (see tools/mediapipe_estimator.py)");
    }
    return std::make_unique<SubprocessEstimator>(cmd, map);
}

// ------------------------------------------------------------------ extraction

PoseSequence extract_landmarks(const fs::path& video_path, EstimatorAdapter& estimator, const ExtractOptions& options) {
    VideoReader reader(video_path);
    std::vector<RawEstimatorFrame> raw;
    Image img;
    while (reader.next(img)) {
        if (options.max_duration_s > 0.0 &&
            static_cast<double>(raw.size() + 1) / reader.fps() > options.max_duration_s + 1e-9) {
            throw VideoTooLong("video exceeds the maximum duration of " + format_double(options.max_duration_s) + " s");
        }
        raw.push_back(estimator.estimate(img));
    }
    if (raw.empty()) throw VideoDecodeError("no frames decoded");
    return convert_sequence(raw, reader.fps(), estimator.landmark_map(), video_path.stem().string());
}

}  // namespace spoterkit
