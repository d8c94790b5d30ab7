// Copyright (C) 2026 spoterkit contributors
// SPDX-License-Identifier: Apache-2.0
//
// In-process HTTP server on an ephemeral port.

#pragma once

#include <thread>

// Eigen must precede httplib: <resolv.h> defines a `_res` macro.
#include "spoterkit/service.hpp"
#include "httplib.h"

namespace spoterkit::testing {

class LiveServer {
public:
    explicit LiveServer(InferenceService& service) {
        service.mount(server_);
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~LiveServer() {
        server_.stop();
        thread_.join();
    }
    LiveServer(const LiveServer&) = delete;
    LiveServer& operator=(const LiveServer&) = delete;

    httplib::Client client() const {
        httplib::Client c("127.0.0.1", port_);
        c.set_read_timeout(60, 0);
        return c;
    }

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

}  // namespace spoterkit::testing
