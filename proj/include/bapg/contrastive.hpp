#ifndef BAPG_CONTRASTIVE_HPP
#define BAPG_CONTRASTIVE_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bapg/core.hpp"
#include "bapg/matrix.hpp"
#include "bapg/rng.hpp"
#include "bapg/sample_pool.hpp"

namespace bapg {

enum class LossMode {
    // [s_an - gamma]_+ - s_ap, exactly as written; with gamma = 1 and cosine
    // similarities the hinge is dead almost everywhere.
    Literal,
    // [gamma + s_an - s_ap]_+, the conventional triplet hinge. Default.
    Standard,
};

// One-hidden-layer encoder x = normalize(W2 tanh(W1 r + b1) + b2).
struct EncoderParams {
    std::size_t input_dim = 0;  // d
    std::size_t hidden_dim = 0; // h
    std::size_t embed_dim = 0;  // e
    Matrix w1;                  // h x d
    std::vector<double> b1;     // h
    Matrix w2;                  // e x h
    std::vector<double> b2;     // e

    void validate() const;
};

struct TrainConfig {
    double learning_rate = 0.15;
    int epochs = 200;
    int batch_size = 32;
    double margin = 1.0;
    LossMode loss_mode = LossMode::Standard;
    std::uint64_t seed = 1;
    double weight_decay = 4e-4;
    std::size_t hidden_dim = 32;
    std::size_t embed_dim = 16;

    void validate() const;
};

// Gradients of the triplet loss w.r.t. every encoder parameter.
struct ParamGradients {
    Matrix w1;
    std::vector<double> b1;
    Matrix w2;
    std::vector<double> b2;
};

struct TrainResult {
    EncoderParams params;
    std::vector<double> epoch_loss; // mean triplet loss per epoch
};

// Seeded symmetric init, uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
EncoderParams init_encoder(std::size_t input_dim, std::size_t hidden_dim,
                           std::size_t embed_dim, Rng& rng);

// Forward pass; output has unit norm (denominator |v| + 1e-12).
std::vector<double> encode(std::span<const double> raw, const EncoderParams& params);

EmbeddingSequence encode_sequence(const FrameFeatureSequence& features,
                                  const EncoderParams& params);

double triplet_loss(double s_ap, double s_an, double margin, LossMode mode);

// Loss value plus analytic chain-rule gradients through normalization,
// similarity and hinge (subgradient 0 at the kink).
double loss_gradients(std::span<const double> anchor_raw,
                      std::span<const double> positive_raw,
                      std::span<const double> negative_raw,
                      const EncoderParams& params, double margin, LossMode mode,
                      ParamGradients& grads);

// Mini-batch gradient descent with weight decay over per-instance triplet
// draws; bitwise deterministic for a given seed.
TrainResult train_encoder(
    const std::vector<std::pair<FrameFeatureSequence, SamplePools>>& dataset,
    const TrainConfig& cfg);

} // namespace bapg

#endif
