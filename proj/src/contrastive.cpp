#include "bapg/contrastive.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "bapg/error.hpp"

namespace bapg {

namespace {

constexpr double kNormEps = 1e-12;

struct ForwardState {
    std::vector<double> hidden_act; // tanh(W1 r + b1)
    std::vector<double> pre_norm;   // v = W2 a + b2
    double norm = 0.0;              // |v|
    std::vector<double> embedding;  // v / (|v| + eps)
};

ForwardState forward(std::span<const double> raw, const EncoderParams& p) {
    ForwardState st;
    st.hidden_act.resize(p.hidden_dim);
    for (std::size_t i = 0; i < p.hidden_dim; ++i) {
        st.hidden_act[i] = std::tanh(dot(p.w1.row(i), raw) + p.b1[i]);
    }
    st.pre_norm.resize(p.embed_dim);
    for (std::size_t i = 0; i < p.embed_dim; ++i) {
        st.pre_norm[i] = dot(p.w2.row(i), st.hidden_act) + p.b2[i];
    }
    st.norm = l2_norm(st.pre_norm);
    const double denom = st.norm + kNormEps;
    st.embedding.resize(p.embed_dim);
    for (std::size_t i = 0; i < p.embed_dim; ++i) st.embedding[i] = st.pre_norm[i] / denom;
    return st;
}

// Backprop one input's embedding gradient into the parameter gradients.
void backward(std::span<const double> raw, const EncoderParams& p, const ForwardState& st,
              const std::vector<double>& d_embedding, ParamGradients& g) {
    // Through x = v / (|v| + eps):
    //   dL/dv = g/denom - v (v.g) / (|v| denom^2)
    const double denom = st.norm + kNormEps;
    const double vg = dot(st.pre_norm, d_embedding);
    std::vector<double> d_v(p.embed_dim);
    for (std::size_t i = 0; i < p.embed_dim; ++i) {
        double val = d_embedding[i] / denom;
        if (st.norm > 0.0) val -= st.pre_norm[i] * vg / (st.norm * denom * denom);
        d_v[i] = val;
    }

    std::vector<double> d_act(p.hidden_dim, 0.0);
    for (std::size_t i = 0; i < p.embed_dim; ++i) {
        for (std::size_t j = 0; j < p.hidden_dim; ++j) {
            g.w2(i, j) += d_v[i] * st.hidden_act[j];
            d_act[j] += p.w2(i, j) * d_v[i];
        }
        g.b2[i] += d_v[i];
    }

    for (std::size_t i = 0; i < p.hidden_dim; ++i) {
        const double dz = d_act[i] * (1.0 - st.hidden_act[i] * st.hidden_act[i]);
        for (std::size_t j = 0; j < p.input_dim; ++j) g.w1(i, j) += dz * raw[j];
        g.b1[i] += dz;
    }
}

ParamGradients zero_gradients(const EncoderParams& p) {
    ParamGradients g;
    g.w1 = Matrix(p.hidden_dim, p.input_dim);
    g.b1.assign(p.hidden_dim, 0.0);
    g.w2 = Matrix(p.embed_dim, p.hidden_dim);
    g.b2.assign(p.embed_dim, 0.0);
    return g;
}

void accumulate(ParamGradients& into, const ParamGradients& from) {
    for (std::size_t i = 0; i < into.w1.data.size(); ++i) into.w1.data[i] += from.w1.data[i];
    for (std::size_t i = 0; i < into.b1.size(); ++i) into.b1[i] += from.b1[i];
    for (std::size_t i = 0; i < into.w2.data.size(); ++i) into.w2.data[i] += from.w2.data[i];
    for (std::size_t i = 0; i < into.b2.size(); ++i) into.b2[i] += from.b2[i];
}

void apply_update(EncoderParams& p, const ParamGradients& g, double lr, double decay,
                  double grad_scale) {
    const auto step = [&](double& param, double grad) {
        param -= lr * (grad * grad_scale + decay * param);
    };
    for (std::size_t i = 0; i < p.w1.data.size(); ++i) step(p.w1.data[i], g.w1.data[i]);
    for (std::size_t i = 0; i < p.b1.size(); ++i) step(p.b1[i], g.b1[i]);
    for (std::size_t i = 0; i < p.w2.data.size(); ++i) step(p.w2.data[i], g.w2.data[i]);
    for (std::size_t i = 0; i < p.b2.size(); ++i) step(p.b2[i], g.b2[i]);
}

} // namespace

void EncoderParams::validate() const {
    if (input_dim < 1 || hidden_dim < 1 || embed_dim < 1) {
        throw ValidationError("encoder params: dimensions must be >= 1");
    }
    if (w1.rows != hidden_dim || w1.cols != input_dim || b1.size() != hidden_dim ||
        w2.rows != embed_dim || w2.cols != hidden_dim || b2.size() != embed_dim) {
        throw ValidationError("encoder params: tensor shapes inconsistent with dims");
    }
    const auto finite = [](const std::vector<double>& v) {
        for (double x : v)
            if (!std::isfinite(x)) return false;
        return true;
    };
    if (!finite(w1.data) || !finite(b1) || !finite(w2.data) || !finite(b2)) {
        throw ValidationError("encoder params: non-finite entry");
    }
}

void TrainConfig::validate() const {
    if (!(learning_rate >= 0.0)) throw ValidationError("train config: learning_rate must be >= 0");
    if (epochs < 1) throw ValidationError("train config: epochs must be >= 1");
    if (batch_size < 1) throw ValidationError("train config: batch_size must be >= 1");
    if (!(margin >= 0.0)) throw ValidationError("train config: margin must be >= 0");
    if (!(weight_decay >= 0.0)) throw ValidationError("train config: weight_decay must be >= 0");
    if (hidden_dim < 1 || embed_dim < 1) {
        throw ValidationError("train config: hidden_dim and embed_dim must be >= 1");
    }
}

EncoderParams init_encoder(std::size_t input_dim, std::size_t hidden_dim,
                           std::size_t embed_dim, Rng& rng) {
    EncoderParams p;
    p.input_dim = input_dim;
    p.hidden_dim = hidden_dim;
    p.embed_dim = embed_dim;
    p.w1 = Matrix(hidden_dim, input_dim);
    p.b1.assign(hidden_dim, 0.0);
    p.w2 = Matrix(embed_dim, hidden_dim);
    p.b2.assign(embed_dim, 0.0);

    const double s1 = 1.0 / std::sqrt(static_cast<double>(input_dim));
    for (double& w : p.w1.data) w = rng.uniform_real(-s1, s1);
    for (double& b : p.b1) b = rng.uniform_real(-s1, s1);
    const double s2 = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
    for (double& w : p.w2.data) w = rng.uniform_real(-s2, s2);
    for (double& b : p.b2) b = rng.uniform_real(-s2, s2);
    return p;
}

std::vector<double> encode(std::span<const double> raw, const EncoderParams& params) {
    if (raw.size() != params.input_dim) {
        throw ValidationError("encode: input length " + std::to_string(raw.size()) +
                              " does not match encoder input dim " +
                              std::to_string(params.input_dim));
    }
    return forward(raw, params).embedding;
}

EmbeddingSequence encode_sequence(const FrameFeatureSequence& features,
                                  const EncoderParams& params) {
    features.validate();
    EmbeddingSequence emb;
    emb.video_id = features.video_id;
    emb.interval_seconds = features.interval_seconds;
    emb.embeddings = Matrix(features.num_frames(), params.embed_dim);
    for (std::size_t i = 0; i < features.num_frames(); ++i) {
        const auto x = encode(features.features.row(i), params);
        std::copy(x.begin(), x.end(), emb.embeddings.row(i).begin());
    }
    return emb;
}

double triplet_loss(double s_ap, double s_an, double margin, LossMode mode) {
    if (s_ap < -1.0 - 1e-9 || s_ap > 1.0 + 1e-9 || s_an < -1.0 - 1e-9 || s_an > 1.0 + 1e-9) {
        throw ValidationError("triplet_loss: similarities must lie in [-1, 1]");
    }
    if (mode == LossMode::Literal) {
        return std::max(s_an - margin, 0.0) - s_ap;
    }
    return std::max(margin + s_an - s_ap, 0.0);
}

double loss_gradients(std::span<const double> anchor_raw,
                      std::span<const double> positive_raw,
                      std::span<const double> negative_raw,
                      const EncoderParams& params, double margin, LossMode mode,
                      ParamGradients& grads) {
    params.validate();
    const ForwardState fa = forward(anchor_raw, params);
    const ForwardState fp = forward(positive_raw, params);
    const ForwardState fn = forward(negative_raw, params);

    const double s_ap = dot(fa.embedding, fp.embedding);
    const double s_an = dot(fa.embedding, fn.embedding);

    double loss;
    double dl_dsap;
    double dl_dsan;
    if (mode == LossMode::Literal) {
        const double hinge = s_an - margin;
        loss = std::max(hinge, 0.0) - s_ap;
        dl_dsap = -1.0;
        dl_dsan = hinge > 0.0 ? 1.0 : 0.0;
    } else {
        const double hinge = margin + s_an - s_ap;
        loss = std::max(hinge, 0.0);
        dl_dsap = hinge > 0.0 ? -1.0 : 0.0;
        dl_dsan = hinge > 0.0 ? 1.0 : 0.0;
    }

    grads = zero_gradients(params);
    if (dl_dsap == 0.0 && dl_dsan == 0.0) return loss; // flat region

    const std::size_t e = params.embed_dim;
    std::vector<double> d_anchor(e), d_pos(e), d_neg(e);
    for (std::size_t i = 0; i < e; ++i) {
        d_anchor[i] = dl_dsap * fp.embedding[i] + dl_dsan * fn.embedding[i];
        d_pos[i] = dl_dsap * fa.embedding[i];
        d_neg[i] = dl_dsan * fa.embedding[i];
    }

    backward(anchor_raw, params, fa, d_anchor, grads);
    if (dl_dsap != 0.0) backward(positive_raw, params, fp, d_pos, grads);
    if (dl_dsan != 0.0) backward(negative_raw, params, fn, d_neg, grads);
    return loss;
}

TrainResult train_encoder(
    const std::vector<std::pair<FrameFeatureSequence, SamplePools>>& dataset,
    const TrainConfig& cfg) {
    cfg.validate();

    std::vector<std::pair<std::size_t, std::size_t>> trainable; // (video, instance)
    std::size_t input_dim = 0;
    for (std::size_t v = 0; v < dataset.size(); ++v) {
        const auto& [features, pools] = dataset[v];
        features.validate();
        if (input_dim == 0) input_dim = features.dim();
        if (features.dim() != input_dim) {
            throw ValidationError("train_encoder: inconsistent feature dim in video '" +
                                  features.video_id + "'");
        }
        for (std::size_t n = 0; n < pools.num_instances(); ++n) {
            if (pools.instance_trainable(n)) trainable.emplace_back(v, n);
        }
    }
    if (trainable.empty()) {
        throw ValidationError("train_encoder: no instance has at least 2 positives "
                              "and 1 hard negative");
    }

    Rng rng(cfg.seed);
    TrainResult result;
    result.params = init_encoder(input_dim, cfg.hidden_dim, cfg.embed_dim, rng);

    std::vector<std::size_t> order(trainable.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    const std::size_t batch = static_cast<std::size_t>(cfg.batch_size);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss = 0.0;

        for (std::size_t begin = 0; begin < order.size(); begin += batch) {
            const std::size_t end = std::min(begin + batch, order.size());
            ParamGradients batch_grads = zero_gradients(result.params);
            ParamGradients grads;

            for (std::size_t i = begin; i < end; ++i) {
                const auto& [v, n] = trainable[order[i]];
                const auto& [features, pools] = dataset[v];
                const Triplet t = draw_triplet(pools, n, rng);
                epoch_loss += loss_gradients(features.features.row(t.anchor),
                                             features.features.row(t.positive),
                                             features.features.row(t.hard_negative),
                                             result.params, cfg.margin, cfg.loss_mode, grads);
                accumulate(batch_grads, grads);
            }
            apply_update(result.params, batch_grads, cfg.learning_rate, cfg.weight_decay,
                         1.0 / static_cast<double>(end - begin));
        }
        result.epoch_loss.push_back(epoch_loss / static_cast<double>(order.size()));
    }
    return result;
}

} // namespace bapg
