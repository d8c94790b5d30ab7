// Copyright (C) 2026 spoterkit contributors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace spoterkit {

/// Ordered gloss list with contiguous indices 0..N-1.
class GlossVocabulary {
public:
    GlossVocabulary() = default;
    /// Throws FormatError on duplicate glosses.
    explicit GlossVocabulary(std::vector<std::string> glosses);

    std::size_t size() const noexcept { return glosses_.size(); }
    bool empty() const noexcept { return glosses_.empty(); }
    const std::vector<std::string>& glosses() const noexcept { return glosses_; }
    const std::string& gloss(std::size_t index) const { return glosses_.at(index); }
    std::optional<std::size_t> index_of(const std::string& gloss) const;
    bool contains(const std::string& gloss) const { return index_.count(gloss) != 0; }

    friend bool operator==(const GlossVocabulary& a, const GlossVocabulary& b) { return a.glosses_ == b.glosses_; }

private:
    std::vector<std::string> glosses_;
    std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace spoterkit
