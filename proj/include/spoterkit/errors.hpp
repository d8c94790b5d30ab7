// Copyright (C) 2026 spoterkit contributors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <stdexcept>
#include <string>

namespace spoterkit {

/// Base class of every error thrown by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define SPOTERKIT_DEFINE_ERROR(Name)      \
    class Name : public Error {           \
    public:                               \
        using Error::Error;               \
    }

SPOTERKIT_DEFINE_ERROR(SchemaMismatch);
SPOTERKIT_DEFINE_ERROR(EmptyInput);
SPOTERKIT_DEFINE_ERROR(FormatError);
SPOTERKIT_DEFINE_ERROR(VideoDecodeError);
SPOTERKIT_DEFINE_ERROR(EstimatorUnavailable);
SPOTERKIT_DEFINE_ERROR(ConfigError);
SPOTERKIT_DEFINE_ERROR(MissingSplitError);
SPOTERKIT_DEFINE_ERROR(CacheMiss);
SPOTERKIT_DEFINE_ERROR(DimensionMismatch);
SPOTERKIT_DEFINE_ERROR(VocabularyMismatch);
SPOTERKIT_DEFINE_ERROR(InvalidK);
SPOTERKIT_DEFINE_ERROR(SpaceError);

#undef SPOTERKIT_DEFINE_ERROR

/// Raised by the trainer when a loss turns NaN/inf; carries the sample that caused it.
class NonFiniteLoss : public Error {
public:
    explicit NonFiniteLoss(std::string sample_id)
        : Error("non-finite loss on sample '" + sample_id + "'"), sample_id_(std::move(sample_id)) {}

    const std::string& sample_id() const noexcept { return sample_id_; }

private:
    std::string sample_id_;
};

}  // namespace spoterkit
