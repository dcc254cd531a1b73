#pragma once

#include "histad/gan.hpp"
#include "histad/nn.hpp"
#include "histad/rng.hpp"

namespace histad::hist {

struct HistoryParams {
    double alpha = 1.0;
    double beta = 3.0;
    bool case2 = false;        // widen half the latent draws
    double wide_factor = 3.0;  // std multiplier for the wide latent

    bool operator==(const HistoryParams&) const = default;
};

// Inverse-CDF draw from the truncated-exponential time density
// c * 1_[alpha, n_epochs] * exp(-beta t); uniform on the interval when beta = 0.
double sample_time(double alpha, double beta, double n_epochs, double u);

// Exact probability mass of [a, b] under that density (for histogram oracles).
double time_mass(double alpha, double beta, double n_epochs, double a, double b);

// The generator-history distribution over a recorded checkpoint store:
// sample a training time, map it to the nearest eligible checkpoint, and
// push a latent draw through that generator.
class HistoryDistribution {
public:
    HistoryDistribution(const gan::CheckpointStore& store, HistoryParams params);

    const HistoryParams& params() const { return params_; }
    const gan::CheckpointStore& store() const { return *store_; }
    double n_epochs() const { return n_epochs_; }
    std::size_t eligible_count() const { return eligible_.size(); }

    // Closest eligible checkpoint by |t - checkpoint.t|; ties break later;
    // times below the first eligible checkpoint clamp to it.
    const gan::Checkpoint& nearest_checkpoint(double t) const;

    // n samples from the history distribution. Draw order is fixed by the
    // rng stream, so outputs are deterministic and independent of how
    // checkpoints are grouped internally for batching.
    Tensor sample(std::size_t n, RandomStream& rng) const;

    // Weight-average initialization for the detector: the exp(-beta t)
    // weighted mean of eligible discriminator states.
    nn::NetworkWeights init_dtv() const;

    // Fraction of data samples with at least one of n_history_samples
    // history samples within `radius` (Euclidean).
    double support_coverage(const Tensor& data_samples, double radius,
                            std::size_t n_history_samples, RandomStream& rng) const;

private:
    const gan::CheckpointStore* store_;
    HistoryParams params_;
    double n_epochs_;
    std::vector<std::size_t> eligible_;  // store indices with t in [alpha, n_epochs], sorted by t
};

}  // namespace histad::hist
