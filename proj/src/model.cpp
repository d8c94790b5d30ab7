// Copyright (C) 2026 spoterkit contributors
// SPDX-License-Identifier: Apache-2.0
//

#include "spoterkit/model.hpp"

#include <algorithm>
#include <cmath>

#include "spoterkit/errors.hpp"

namespace spoterkit {

namespace {

constexpr double kLayerNormEps = 1e-5;

using MatMap = Eigen::Map<Matrix>;
using ConstMatMap = Eigen::Map<const Matrix>;
using RowMap = Eigen::Map<Eigen::RowVectorXd>;
using ConstRowMap = Eigen::Map<const Eigen::RowVectorXd>;

struct LinearOffsets {
    std::size_t weight = 0;
    std::size_t bias = 0;
    std::size_t out = 0;
    std::size_t in = 0;
};

struct NormOffsets {
    std::size_t weight = 0;
    std::size_t bias = 0;
};

struct AttentionOffsets {
    LinearOffsets q, k, v, out;
};

struct LayerOffsets {
    AttentionOffsets attn;
    LinearOffsets linear1, linear2;
    NormOffsets norm1, norm2;
};

struct ModelOffsets {
    std::size_t pos = 0;
    std::size_t query = 0;
    std::vector<LayerOffsets> encoder, decoder;
    NormOffsets encoder_norm, decoder_norm;
    LinearOffsets head;
};

LinearOffsets linear_offsets(const ParameterLayout& layout, const std::string& prefix) {
    const auto& w = layout.find(prefix + ".weight");
    const auto& b = layout.find(prefix + ".bias");
    return {w.offset, b.offset, w.rows, w.cols};
}

NormOffsets norm_offsets(const ParameterLayout& layout, const std::string& prefix) {
    return {layout.find(prefix + ".weight").offset, layout.find(prefix + ".bias").offset};
}

LayerOffsets layer_offsets(const ParameterLayout& layout, const std::string& prefix, const char* attn) {
    LayerOffsets l;
    const std::string a = prefix + "." + attn;
    l.attn = {linear_offsets(layout, a + ".q_proj"), linear_offsets(layout, a + ".k_proj"),
              linear_offsets(layout, a + ".v_proj"), linear_offsets(layout, a + ".out_proj")};
    l.linear1 = linear_offsets(layout, prefix + ".linear1");
    l.linear2 = linear_offsets(layout, prefix + ".linear2");
    l.norm1 = norm_offsets(layout, prefix + ".norm1");
    l.norm2 = norm_offsets(layout, prefix + ".norm2");
    return l;
}

ModelOffsets model_offsets(const ModelConfig& cfg, const ParameterLayout& layout) {
    ModelOffsets m;
    m.pos = layout.find("pos_embedding").offset;
    m.query = layout.find("class_query").offset;
    for (std::size_t i = 0; i < cfg.encoder_layers; ++i) {
        m.encoder.push_back(layer_offsets(layout, "encoder." + std::to_string(i), "self_attn"));
    }
    for (std::size_t i = 0; i < cfg.decoder_layers; ++i) {
        m.decoder.push_back(layer_offsets(layout, "decoder." + std::to_string(i), "cross_attn"));
    }
    m.encoder_norm = norm_offsets(layout, "encoder.norm");
    m.decoder_norm = norm_offsets(layout, "decoder.norm");
    m.head = linear_offsets(layout, "head");
    return m;
}

// ------------------------------------------------------------------ caches

struct NormCache {
    Matrix xhat;
    Eigen::VectorXd inv_std;
};

struct AttentionCache {
    Matrix q_in, kv_in, q, k, v, o;
    std::vector<Matrix> weights;  // per head, Tq x Tk
};

struct FeedForwardCache {
    Matrix in, pre, hidden, mask;
};

struct LayerCache {
    AttentionCache attn;
    Matrix mask_attn, mask_ff;
    NormCache norm1, norm2;
    FeedForwardCache ff;
};

// ------------------------------------------------------------------ primitives

class Kernels {
public:
    Kernels(const ModelConfig& cfg, const double* w, Rng* rng) : cfg_(cfg), w_(w), rng_(rng) {}

    Matrix linear(const Matrix& x, const LinearOffsets& o) const {
        ConstMatMap weight(w_ + o.weight, o.out, o.in);
        ConstRowMap bias(w_ + o.bias, o.out);
        Matrix y = x * weight.transpose();
        y.rowwise() += bias;
        return y;
    }

    Matrix norm(const Matrix& x, const NormOffsets& o, NormCache* cache) const {
        const auto d = x.cols();
        ConstRowMap gamma(w_ + o.weight, d);
        ConstRowMap beta(w_ + o.bias, d);
        Matrix y(x.rows(), d);
        Matrix xhat(x.rows(), d);
        Eigen::VectorXd inv(x.rows());
        for (Eigen::Index r = 0; r < x.rows(); ++r) {
            const double mean = x.row(r).mean();
            const double var = (x.row(r).array() - mean).square().mean();
            inv(r) = 1.0 / std::sqrt(var + kLayerNormEps);
            xhat.row(r) = (x.row(r).array() - mean) * inv(r);
            y.row(r) = xhat.row(r).array() * gamma.array() + beta.array();
        }
        if (cache) *cache = {std::move(xhat), std::move(inv)};
        return y;
    }

    /// Inverted-dropout mask, or an empty matrix when dropout is off.
    Matrix dropout_mask(Eigen::Index rows, Eigen::Index cols) const {
        if (!rng_ || cfg_.dropout <= 0.0) return {};
        const double keep = 1.0 - cfg_.dropout;
        Matrix m(rows, cols);
        for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng_->bernoulli(keep) ? 1.0 / keep : 0.0;
        return m;
    }

    static void apply_mask(Matrix& x, const Matrix& mask) {
        if (mask.size() != 0) x.array() *= mask.array();
    }

    Matrix attention(const Matrix& q_in, const Matrix& kv_in, const AttentionOffsets& o, AttentionCache* cache) const {
        const std::size_t heads = cfg_.attention_heads;
        const auto dh = static_cast<Eigen::Index>(cfg_.width() / heads);
        const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
        Matrix q = linear(q_in, o.q);
        Matrix k = linear(kv_in, o.k);
        Matrix v = linear(kv_in, o.v);
        Matrix out_heads(q.rows(), q.cols());
        std::vector<Matrix> weights;
        if (cache) weights.reserve(heads);
        for (std::size_t h = 0; h < heads; ++h) {
            const auto c0 = static_cast<Eigen::Index>(h) * dh;
            Matrix s = (q.middleCols(c0, dh) * k.middleCols(c0, dh).transpose()) * scale;
            for (Eigen::Index r = 0; r < s.rows(); ++r) {
                const double mx = s.row(r).maxCoeff();
                s.row(r) = (s.row(r).array() - mx).exp();
                s.row(r) /= s.row(r).sum();
            }
            out_heads.middleCols(c0, dh) = s * v.middleCols(c0, dh);
            if (cache) weights.push_back(std::move(s));
        }
        Matrix out = linear(out_heads, o.out);
        if (cache) {
            cache->q_in = q_in;
            cache->kv_in = kv_in;
            cache->q = std::move(q);
            cache->k = std::move(k);
            cache->v = std::move(v);
            cache->o = std::move(out_heads);
            cache->weights = std::move(weights);
        }
        return out;
    }

    Matrix feedforward(const Matrix& x, const LinearOffsets& l1, const LinearOffsets& l2, FeedForwardCache* cache) const {
        Matrix pre = linear(x, l1);
        Matrix hidden = pre.cwiseMax(0.0);
        Matrix mask = dropout_mask(hidden.rows(), hidden.cols());
        apply_mask(hidden, mask);
        Matrix out = linear(hidden, l2);
        if (cache) *cache = {x, std::move(pre), std::move(hidden), std::move(mask)};
        return out;
    }

    /// Post-norm block: x -> norm1(x + attn) -> norm2(. + ff).
    Matrix layer(const Matrix& x, const Matrix& memory, const LayerOffsets& o, LayerCache* cache) const {
        Matrix a = attention(x, memory, o.attn, cache ? &cache->attn : nullptr);
        Matrix mask_a = dropout_mask(a.rows(), a.cols());
        apply_mask(a, mask_a);
        Matrix h1 = norm(x + a, o.norm1, cache ? &cache->norm1 : nullptr);
        Matrix f = feedforward(h1, o.linear1, o.linear2, cache ? &cache->ff : nullptr);
        Matrix mask_f = dropout_mask(f.rows(), f.cols());
        apply_mask(f, mask_f);
        Matrix h2 = norm(h1 + f, o.norm2, cache ? &cache->norm2 : nullptr);
        if (cache) {
            cache->mask_attn = std::move(mask_a);
            cache->mask_ff = std::move(mask_f);
        }
        return h2;
    }

private:
    const ModelConfig& cfg_;
    const double* w_;
    Rng* rng_;
};

class Gradients {
public:
    Gradients(const ModelConfig& cfg, const double* w, double* g) : cfg_(cfg), w_(w), g_(g) {}

    Matrix linear(const Matrix& dy, const Matrix& x, const LinearOffsets& o) const {
        ConstMatMap weight(w_ + o.weight, o.out, o.in);
        MatMap dweight(g_ + o.weight, o.out, o.in);
        RowMap dbias(g_ + o.bias, o.out);
        dweight.noalias() += dy.transpose() * x;
        dbias += dy.colwise().sum();
        return dy * weight;
    }

    Matrix norm(const Matrix& dy, const NormCache& c, const NormOffsets& o) const {
        const auto d = dy.cols();
        ConstRowMap gamma(w_ + o.weight, d);
        RowMap dgamma(g_ + o.weight, d);
        RowMap dbeta(g_ + o.bias, d);
        dgamma += (dy.array() * c.xhat.array()).colwise().sum().matrix();
        dbeta += dy.colwise().sum();
        Matrix dx(dy.rows(), d);
        const double n = static_cast<double>(d);
        for (Eigen::Index r = 0; r < dy.rows(); ++r) {
            Eigen::RowVectorXd dxhat = dy.row(r).array() * gamma.array();
            const double sum = dxhat.sum();
            const double dot = dxhat.dot(c.xhat.row(r));
            dx.row(r) = (c.inv_std(r) / n) * (n * dxhat.array() - sum - c.xhat.row(r).array() * dot);
        }
        return dx;
    }

    /// Returns (d q_in, d kv_in).
    std::pair<Matrix, Matrix> attention(const Matrix& dout, const AttentionCache& c, const AttentionOffsets& o) const {
        const std::size_t heads = cfg_.attention_heads;
        const auto dh = static_cast<Eigen::Index>(cfg_.width() / heads);
        const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
        Matrix d_heads = linear(dout, c.o, o.out);
        Matrix dq(c.q.rows(), c.q.cols());
        Matrix dk(c.k.rows(), c.k.cols());
        Matrix dv(c.v.rows(), c.v.cols());
        for (std::size_t h = 0; h < heads; ++h) {
            const auto c0 = static_cast<Eigen::Index>(h) * dh;
            const Matrix& a = c.weights[h];
            const auto doh = d_heads.middleCols(c0, dh);
            Matrix da = doh * c.v.middleCols(c0, dh).transpose();
            dv.middleCols(c0, dh) = a.transpose() * doh;
            Eigen::VectorXd row_dot = (da.array() * a.array()).rowwise().sum();
            Matrix ds = a.array() * (da.colwise() - row_dot).array();
            ds *= scale;
            dq.middleCols(c0, dh) = ds * c.k.middleCols(c0, dh);
            dk.middleCols(c0, dh) = ds.transpose() * c.q.middleCols(c0, dh);
        }
        Matrix dq_in = linear(dq, c.q_in, o.q);
        Matrix dkv_in = linear(dk, c.kv_in, o.k);
        dkv_in += linear(dv, c.kv_in, o.v);
        return {std::move(dq_in), std::move(dkv_in)};
    }

    Matrix feedforward(const Matrix& dout, const FeedForwardCache& c, const LinearOffsets& l1,
                       const LinearOffsets& l2) const {
        Matrix dhidden = linear(dout, c.hidden, l2);
        if (c.mask.size() != 0) dhidden.array() *= c.mask.array();
        dhidden.array() *= (c.pre.array() > 0.0).cast<double>();
        return linear(dhidden, c.in, l1);
    }

    /// Returns (d x, d memory); for self-attention layers the caller sums both.
    std::pair<Matrix, Matrix> layer(const Matrix& dy, const LayerCache& c, const LayerOffsets& o) const {
        Matrix dr2 = norm(dy, c.norm2, o.norm2);
        Matrix df = dr2;
        if (c.mask_ff.size() != 0) df.array() *= c.mask_ff.array();
        Matrix dh1 = dr2 + feedforward(df, c.ff, o.linear1, o.linear2);
        Matrix dr1 = norm(dh1, c.norm1, o.norm1);
        Matrix da = dr1;
        if (c.mask_attn.size() != 0) da.array() *= c.mask_attn.array();
        auto [dq, dkv] = attention(da, c.attn, o.attn);
        return {dr1 + dq, std::move(dkv)};
    }

private:
    const ModelConfig& cfg_;
    const double* w_;
    double* g_;
};

}  // namespace

struct ForwardTape::Impl {
    ModelOffsets offsets;
    Eigen::Index frames = 0;
    std::vector<LayerCache> encoder, decoder;
    NormCache encoder_norm, decoder_norm;
    Matrix memory;
    Matrix decoder_out;
};

ForwardTape::ForwardTape() : impl(std::make_unique<Impl>()) {}
ForwardTape::~ForwardTape() = default;
ForwardTape::ForwardTape(ForwardTape&&) noexcept = default;
ForwardTape& ForwardTape::operator=(ForwardTape&&) noexcept = default;

// ------------------------------------------------------------------ ModelConfig

void ModelConfig::validate() const {
    if (input_dim != kFeatureDim) {
        throw DimensionMismatch("input_dim must be " + std::to_string(kFeatureDim) + " (2 x " +
                                std::to_string(kSlotCount) + " landmarks), got " + std::to_string(input_dim));
    }
    if (num_classes < 1) throw ConfigError("num_classes must be positive");
    if (encoder_layers < 1 || decoder_layers < 1) throw ConfigError("encoder/decoder layer counts must be positive");
    if (attention_heads < 1 || width() % attention_heads != 0) {
        throw ConfigError("attention_heads must divide the model width " + std::to_string(width()));
    }
    if (feedforward_dim < 1) throw ConfigError("feedforward_dim must be positive");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must be in [0, 1)");
    if (max_positions < 1) throw ConfigError("max_positions must be positive");
}

nlohmann::json ModelConfig::to_json() const {
    return {{"input_dim", input_dim},
            {"num_classes", num_classes},
            {"encoder_layers", encoder_layers},
            {"decoder_layers", decoder_layers},
            {"attention_heads", attention_heads},
            {"feedforward_dim", feedforward_dim},
            {"dropout", dropout},
            {"max_positions", max_positions}};
}

ModelConfig ModelConfig::from_json(const nlohmann::json& doc) {
    ModelConfig c;
    try {
        c.input_dim = doc.at("input_dim").get<std::size_t>();
        c.num_classes = doc.at("num_classes").get<std::size_t>();
        c.encoder_layers = doc.at("encoder_layers").get<std::size_t>();
        c.decoder_layers = doc.at("decoder_layers").get<std::size_t>();
        c.attention_heads = doc.at("attention_heads").get<std::size_t>();
        c.feedforward_dim = doc.at("feedforward_dim").get<std::size_t>();
        c.dropout = doc.at("dropout").get<double>();
        c.max_positions = doc.at("max_positions").get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("model config: ") + e.what());
    }
    c.validate();
    return c;
}

void ModelConfig::apply(const KeyValueConfig& cfg) {
    auto read_count = [&](const char* key, std::size_t& slot) {
        if (auto v = cfg.get_int(key)) {
            if (*v < 0) throw ConfigError(std::string(key) + " must be non-negative");
            slot = static_cast<std::size_t>(*v);
        }
    };
    read_count("model.input_dim", input_dim);
    read_count("model.encoder_layers", encoder_layers);
    read_count("model.decoder_layers", decoder_layers);
    read_count("model.attention_heads", attention_heads);
    read_count("model.feedforward_dim", feedforward_dim);
    read_count("model.max_positions", max_positions);
    if (auto v = cfg.get_double("model.dropout")) dropout = *v;
}

// ------------------------------------------------------------------ parameter counting

std::size_t attention_parameters(const ModelConfig& cfg) {
    const std::size_t d = cfg.width();
    return 4 * d * d + 4 * d;  // q, k, v and output projections with biases
}

std::size_t feedforward_parameters(const ModelConfig& cfg) {
    const std::size_t d = cfg.width();
    const std::size_t f = cfg.feedforward_dim;
    return 2 * d * f + f + d;
}

std::size_t encoder_layer_parameters(const ModelConfig& cfg) {
    return attention_parameters(cfg) + feedforward_parameters(cfg) + 2 * (2 * cfg.width());
}

std::size_t decoder_layer_parameters(const ModelConfig& cfg) {
    return attention_parameters(cfg) + feedforward_parameters(cfg) + 2 * (2 * cfg.width());
}

std::size_t count_parameters(const ModelConfig& cfg) {
    const std::size_t d = cfg.width();
    return cfg.max_positions * d                              // positional table
           + d                                                // class query
           + cfg.encoder_layers * encoder_layer_parameters(cfg) + 2 * d  // encoder stack + final norm
           + cfg.decoder_layers * decoder_layer_parameters(cfg) + 2 * d  // decoder stack + final norm
           + d * cfg.num_classes + cfg.num_classes;           // head
}

// ------------------------------------------------------------------ layout

std::size_t ParameterLayout::add(std::string name, std::size_t rows, std::size_t cols) {
    index_.emplace(name, tensors_.size());
    tensors_.push_back({std::move(name), rows, cols, total_});
    total_ += rows * cols;
    return tensors_.back().offset;
}

ParameterLayout::ParameterLayout(const ModelConfig& cfg) {
    const std::size_t d = cfg.width();
    const std::size_t f = cfg.feedforward_dim;
    auto add_linear = [&](const std::string& p, std::size_t out, std::size_t in) {
        add(p + ".weight", out, in);
        add(p + ".bias", 1, out);
    };
    auto add_norm = [&](const std::string& p) {
        add(p + ".weight", 1, d);
        add(p + ".bias", 1, d);
    };
    auto add_layer = [&](const std::string& p, const char* attn) {
        for (const char* proj : {"q_proj", "k_proj", "v_proj", "out_proj"}) {
            add_linear(p + "." + attn + "." + proj, d, d);
        }
        add_linear(p + ".linear1", f, d);
        add_linear(p + ".linear2", d, f);
        add_norm(p + ".norm1");
        add_norm(p + ".norm2");
    };
    add("pos_embedding", cfg.max_positions, d);
    add("class_query", 1, d);
    for (std::size_t i = 0; i < cfg.encoder_layers; ++i) add_layer("encoder." + std::to_string(i), "self_attn");
    add_norm("encoder.norm");
    for (std::size_t i = 0; i < cfg.decoder_layers; ++i) add_layer("decoder." + std::to_string(i), "cross_attn");
    add_norm("decoder.norm");
    add_linear("head", cfg.num_classes, d);
}

const TensorSpec& ParameterLayout::find(const std::string& name) const {
    if (auto it = index_.find(name); it != index_.end()) return tensors_[it->second];
    throw Error("no tensor named '" + name + "'");
}

// ------------------------------------------------------------------ model

Matrix sequence_to_input(const PoseSequence& seq) {
    Matrix x(static_cast<Eigen::Index>(seq.frames.size()), static_cast<Eigen::Index>(kFeatureDim));
    for (std::size_t t = 0; t < seq.frames.size(); ++t) {
        const auto& f = seq.frames[t];
        for (std::size_t s = 0; s < kSlotCount; ++s) {
            x(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(2 * s)) = f.coords[s].x;
            x(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(2 * s + 1)) = f.coords[s].y;
        }
    }
    return x;
}

SpoterModel::SpoterModel(ModelConfig cfg, std::uint64_t init_seed)
    : cfg_((cfg.validate(), std::move(cfg))), layout_(cfg_), weights_(layout_.total(), 0.0) {
    Rng rng(init_seed);
    for (const auto& t : layout_.tensors()) {
        double* p = weights_.data() + t.offset;
        const bool is_bias = t.name.ends_with(".bias");
        const bool is_norm = t.name.find("norm") != std::string::npos;
        if (t.name == "pos_embedding" || t.name == "class_query") {
            for (std::size_t i = 0; i < t.size(); ++i) p[i] = rng.uniform(-0.1, 0.1);
        } else if (is_norm) {
            std::fill(p, p + t.size(), is_bias ? 0.0 : 1.0);
        } else if (is_bias) {
            std::fill(p, p + t.size(), 0.0);
        } else {
            const double bound = std::sqrt(6.0 / static_cast<double>(t.rows + t.cols));
            for (std::size_t i = 0; i < t.size(); ++i) p[i] = rng.uniform(-bound, bound);
        }
    }
}

SpoterModel::SpoterModel(ModelConfig cfg, std::vector<double> weights)
    : cfg_((cfg.validate(), std::move(cfg))), layout_(cfg_), weights_(std::move(weights)) {
    if (weights_.size() != layout_.total()) {
        throw DimensionMismatch("weight buffer holds " + std::to_string(weights_.size()) + " values, config needs " +
                                std::to_string(layout_.total()));
    }
}

std::vector<double> SpoterModel::forward(const PoseSequence& seq) const { return forward(sequence_to_input(seq)); }

std::vector<double> SpoterModel::forward(const Matrix& input) const {
    ForwardTape tape;
    tape.impl.reset();  // inference keeps no activations
    return forward(input, nullptr, tape);
}

std::vector<double> SpoterModel::forward(const Matrix& input, Rng* dropout_rng, ForwardTape& tape) const {
    if (input.cols() != static_cast<Eigen::Index>(cfg_.input_dim)) {
        throw DimensionMismatch("frame vectors have " + std::to_string(input.cols()) + " values, model expects " +
                                std::to_string(cfg_.input_dim));
    }
    if (input.rows() < 1) throw DimensionMismatch("sequence must contain at least one frame");

    ForwardTape::Impl* rec = tape.impl.get();
    ModelOffsets local_offsets;
    if (rec) {
        rec->offsets = model_offsets(cfg_, layout_);
        rec->frames = input.rows();
        rec->encoder.assign(cfg_.encoder_layers, {});
        rec->decoder.assign(cfg_.decoder_layers, {});
    } else {
        local_offsets = model_offsets(cfg_, layout_);
    }
    const ModelOffsets& off = rec ? rec->offsets : local_offsets;
    const Kernels k(cfg_, weights_.data(), dropout_rng);
    const auto d = static_cast<Eigen::Index>(cfg_.width());

    ConstMatMap pos(weights_.data() + off.pos, static_cast<Eigen::Index>(cfg_.max_positions), d);
    Matrix h = input;
    for (Eigen::Index t = 0; t < h.rows(); ++t) {
        h.row(t) += pos.row(std::min<Eigen::Index>(t, pos.rows() - 1));
    }
    for (std::size_t i = 0; i < cfg_.encoder_layers; ++i) {
        h = k.layer(h, h, off.encoder[i], rec ? &rec->encoder[i] : nullptr);
    }
    Matrix memory = k.norm(h, off.encoder_norm, rec ? &rec->encoder_norm : nullptr);

    Matrix q = ConstRowMap(weights_.data() + off.query, d);
    for (std::size_t i = 0; i < cfg_.decoder_layers; ++i) {
        q = k.layer(q, memory, off.decoder[i], rec ? &rec->decoder[i] : nullptr);
    }
    Matrix out = k.norm(q, off.decoder_norm, rec ? &rec->decoder_norm : nullptr);
    Matrix logits = k.linear(out, off.head);
    if (rec) {
        rec->memory = std::move(memory);
        rec->decoder_out = std::move(out);
    }
    return {logits.data(), logits.data() + logits.size()};
}

void SpoterModel::backward(const ForwardTape& tape, std::span<const double> dlogits, std::span<double> grads) const {
    if (!tape.impl) throw Error("backward() needs a tape recorded by a training-mode forward()");
    if (grads.size() != weights_.size()) throw DimensionMismatch("gradient buffer size does not match weights");
    if (dlogits.size() != cfg_.num_classes) throw DimensionMismatch("dlogits size does not match num_classes");
    const ForwardTape::Impl& rec = *tape.impl;
    const ModelOffsets& off = rec.offsets;
    const Gradients g(cfg_, weights_.data(), grads.data());
    const auto d = static_cast<Eigen::Index>(cfg_.width());

    Matrix dlog = ConstRowMap(dlogits.data(), static_cast<Eigen::Index>(dlogits.size()));
    Matrix dout = g.linear(dlog, rec.decoder_out, off.head);
    Matrix dq = g.norm(dout, rec.decoder_norm, off.decoder_norm);
    Matrix dmemory = Matrix::Zero(rec.memory.rows(), d);
    for (std::size_t i = cfg_.decoder_layers; i-- > 0;) {
        auto [dx, dmem] = g.layer(dq, rec.decoder[i], off.decoder[i]);
        dq = std::move(dx);
        dmemory += dmem;
    }
    RowMap(grads.data() + off.query, d) += dq.row(0);

    Matrix dh = g.norm(dmemory, rec.encoder_norm, off.encoder_norm);
    for (std::size_t i = cfg_.encoder_layers; i-- > 0;) {
        auto [dx, dkv] = g.layer(dh, rec.encoder[i], off.encoder[i]);
        dh = dx + dkv;
    }
    MatMap dpos(grads.data() + off.pos, static_cast<Eigen::Index>(cfg_.max_positions), d);
    for (Eigen::Index t = 0; t < dh.rows(); ++t) {
        dpos.row(std::min<Eigen::Index>(t, dpos.rows() - 1)) += dh.row(t);
    }
}

double cross_entropy(std::span<const double> logits, std::size_t target, std::span<double> dlogits) {
    if (target >= logits.size()) throw DimensionMismatch("target class out of range");
    const double mx = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double l : logits) sum += std::exp(l - mx);
    const double log_z = mx + std::log(sum);
    for (std::size_t i = 0; i < logits.size(); ++i) {
        dlogits[i] = std::exp(logits[i] - log_z) - (i == target ? 1.0 : 0.0);
    }
    return log_z - logits[target];
}

}  // namespace spoterkit
