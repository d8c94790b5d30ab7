// Copyright (C) 2026 spoterkit contributors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace spoterkit {

/// Flat `key = value` configuration. `#` starts a comment; blank lines are ignored.
class KeyValueConfig {
public:
    static KeyValueConfig parse(std::string_view text);
    static KeyValueConfig load(const std::filesystem::path& path);

    bool contains(const std::string& key) const { return values_.count(key) != 0; }
    const std::map<std::string, std::string>& entries() const noexcept { return values_; }

    void set(const std::string& key, std::string value) { values_[key] = std::move(value); }

    std::optional<std::string> get(const std::string& key) const;
    /// Typed getters throw ConfigError naming the key on malformed values.
    std::optional<double> get_double(const std::string& key) const;
    std::optional<long long> get_int(const std::string& key) const;

    std::string to_string() const;

private:
    std::map<std::string, std::string> values_;
};

}  // namespace spoterkit
