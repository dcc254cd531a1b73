#pragma once

#include <cstdint>
#include <vector>

#include "histad/nn.hpp"
#include "histad/tensor.hpp"

namespace histad::gan {

// Anything that yields fixed-dimension sample batches in a deterministic order.
class BatchSource {
public:
    virtual ~BatchSource() = default;
    virtual std::size_t dim() const = 0;
    virtual Tensor next_batch(std::size_t n) = 0;
};

struct GanConfig {
    std::size_t data_dim = 1;
    std::size_t latent_dim = 2;
    double latent_std = 1.0;
    std::size_t n_epochs = 5;
    std::size_t batches_per_epoch = 200;
    std::size_t batch_size = 64;
    std::size_t n_critic = 5;
    double gp_coefficient = 10.0;
    std::size_t saves_per_epoch = 50;
    std::uint64_t seed = 42;
    std::vector<std::size_t> g_hidden{16, 16};
    std::vector<std::size_t> d_hidden{16, 16};
    double leaky_slope = 0.2;
    double learning_rate = 5e-4;
    double g_init_offset = 0.0;  // added to the generator output bias at init

    nn::MlpSpec generator_spec() const;
    nn::MlpSpec discriminator_spec() const;
    void validate() const;

    bool operator==(const GanConfig&) const = default;
};

struct Checkpoint {
    double t = 0.0;  // training time in epochs
    std::size_t index = 0;
    nn::NetworkWeights generator;
    nn::NetworkWeights discriminator;

    bool operator==(const Checkpoint&) const = default;
};

struct CheckpointStore {
    static constexpr std::uint16_t kFormatVersion = 1;

    GanConfig config;
    std::vector<Checkpoint> checkpoints;

    void validate() const;  // t strictly increasing, weights finite

    bool operator==(const CheckpointStore&) const = default;
};

struct WganLosses {
    double critic_loss = 0.0;
    double generator_loss = 0.0;
    double penalty = 0.0;
};

// Standard WGAN-GP loss values for the given batches:
//   critic_loss    = mean D(G(z)) - mean D(x_real) + gp * penalty
//   generator_loss = -mean D(G(z))
// Diagnostic quantities; the trainer below optimizes the adversarial
// objective with the opposite critic orientation (D negative on real data)
// so that discriminator snapshots average into a useful detector init.
WganLosses wgan_losses(const nn::NetworkWeights& d_weights, const nn::MlpSpec& d_spec,
                       const nn::NetworkWeights& g_weights, const nn::MlpSpec& g_spec,
                       const Tensor& real_batch, const Tensor& z_batch, double gp_coefficient,
                       const std::vector<double>& eps);

// Adversarial training with gradient penalty, snapshotting generator and
// discriminator states saves_per_epoch times per epoch (plus the initial
// state at t = 0). Deterministic given config.seed.
CheckpointStore train_wgan(const GanConfig& config, BatchSource& dataset);

}  // namespace histad::gan
