// Copyright (C) 2026 spoterkit contributors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"
#include "spoterkit/config.hpp"
#include "spoterkit/random.hpp"
#include "spoterkit/skeletal.hpp"

namespace spoterkit {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Encoder-decoder transformer over per-frame landmark vectors. The model width is
/// the input width (no input projection); a single learned class query is decoded
/// against the encoded frames and a linear head produces class logits.
struct ModelConfig {
    std::size_t input_dim = kFeatureDim;
    std::size_t num_classes = 100;
    std::size_t encoder_layers = 6;
    std::size_t decoder_layers = 6;
    std::size_t attention_heads = 9;
    std::size_t feedforward_dim = 2048;
    double dropout = 0.1;
    /// Rows of the learned positional table; frames past the end reuse the last row.
    std::size_t max_positions = 256;

    std::size_t width() const noexcept { return input_dim; }

    /// Throws ConfigError (or DimensionMismatch for input_dim) on invalid values.
    void validate() const;

    nlohmann::json to_json() const;
    static ModelConfig from_json(const nlohmann::json& doc);
    /// Reads `model.*` keys.
    void apply(const KeyValueConfig& cfg);

    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Closed-form trainable parameter count of one multi-head attention block,
/// feed-forward block, encoder layer, decoder layer and of the whole model.
std::size_t attention_parameters(const ModelConfig& cfg);
std::size_t feedforward_parameters(const ModelConfig& cfg);
std::size_t encoder_layer_parameters(const ModelConfig& cfg);
std::size_t decoder_layer_parameters(const ModelConfig& cfg);
std::size_t count_parameters(const ModelConfig& cfg);

struct TensorSpec {
    std::string name;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::size_t offset = 0;

    std::size_t size() const noexcept { return rows * cols; }
};

/// Names, shapes and offsets of every weight tensor inside the flat parameter buffer.
class ParameterLayout {
public:
    explicit ParameterLayout(const ModelConfig& cfg);

    const std::vector<TensorSpec>& tensors() const noexcept { return tensors_; }
    std::size_t total() const noexcept { return total_; }
    const TensorSpec& find(const std::string& name) const;

private:
    std::size_t add(std::string name, std::size_t rows, std::size_t cols);

    std::vector<TensorSpec> tensors_;
    std::unordered_map<std::string, std::size_t> index_;
    std::size_t total_ = 0;
};

/// Per-frame flattening in schema order: x then y per slot.
Matrix sequence_to_input(const PoseSequence& seq);

/// Activations recorded by a training-mode forward pass.
struct ForwardTape {
    ForwardTape();
    ~ForwardTape();
    ForwardTape(ForwardTape&&) noexcept;
    ForwardTape& operator=(ForwardTape&&) noexcept;

    struct Impl;
    std::unique_ptr<Impl> impl;
};

class SpoterModel {
public:
    /// Random initialization (Xavier-uniform weights, zero biases, unit norms).
    SpoterModel(ModelConfig cfg, std::uint64_t init_seed);
    /// Wraps existing weights; throws DimensionMismatch if the size is wrong.
    SpoterModel(ModelConfig cfg, std::vector<double> weights);

    const ModelConfig& config() const noexcept { return cfg_; }
    const ParameterLayout& layout() const noexcept { return layout_; }
    std::span<double> weights() noexcept { return weights_; }
    std::span<const double> weights() const noexcept { return weights_; }

    /// Inference-mode logits; deterministic.
    std::vector<double> forward(const PoseSequence& seq) const;
    std::vector<double> forward(const Matrix& input) const;

    /// Training-mode forward recording what backward() needs. `dropout_rng` may be
    /// null to disable dropout.
    std::vector<double> forward(const Matrix& input, Rng* dropout_rng, ForwardTape& tape) const;

    /// Accumulates d(loss)/d(weights) into `grads` (same layout as weights()).
    void backward(const ForwardTape& tape, std::span<const double> dlogits, std::span<double> grads) const;

private:
    ModelConfig cfg_;
    ParameterLayout layout_;
    std::vector<double> weights_;
};

/// Softmax cross-entropy of `logits` against `target`; writes dL/dlogits.
double cross_entropy(std::span<const double> logits, std::size_t target, std::span<double> dlogits);

}  // namespace spoterkit
