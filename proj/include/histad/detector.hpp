#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "histad/history.hpp"
#include "histad/nn.hpp"
#include "histad/oracle.hpp"
#include "histad/rng.hpp"
#include "histad/tensor.hpp"

namespace histad::dtv {

using oracle::boundary_distance;  // max(0, |v| - 1)

enum class InitMode { weight_average, random };

struct DetectorConfig {
    std::size_t input_dim = 1;
    std::vector<std::size_t> hidden{32, 32};
    double leaky_slope = 0.2;
    double lambda = 10.0;           // boundary-penalty weight
    std::size_t steps = 2000;
    std::size_t batch_size = 256;
    double learning_rate = 1e-3;
    bool decay_lr = true;           // linear decay to zero over `steps`
    InitMode init_mode = InitMode::weight_average;
    std::uint64_t seed = 7;

    nn::MlpSpec spec() const;
    void validate() const;

    bool operator==(const DetectorConfig&) const = default;
};

struct Detector {
    nn::MlpSpec spec;
    nn::NetworkWeights weights;
    DetectorConfig config;
    std::vector<double> loss_trace;  // one entry per training step
};

struct DtvLoss {
    double value = 0.0;      // data_gap + lambda * penalty
    double data_term = 0.0;  // mean D over the real batch
    double hist_term = 0.0;  // mean D over the history batch
    double penalty = 0.0;    // pooled mean of boundary_distance(D)^2
};

// Eq-10 objective on one pair of batches. The pooled penalty mean runs over
// the concatenation of both batches. If `grads` is non-null it receives the
// parameter gradient (overwritten, not accumulated).
DtvLoss dtv_loss(const nn::NetworkWeights& w, const nn::MlpSpec& spec, const Tensor& real_batch,
                 const Tensor& hist_batch, double lambda, nn::NetworkWeights* grads = nullptr);

// Batch provider; each call must advance its own stream.
using SampleFn = std::function<Tensor(std::size_t)>;

// Core loop over two samplers. `init` supplies the starting weights when
// init_mode == weight_average; random mode draws fresh ones from the seed.
Detector train_dtv(const DetectorConfig& config, const SampleFn& draw_real,
                   const SampleFn& draw_hist, const nn::NetworkWeights* init = nullptr);

// Pipeline entry point: real batches from `data`, history batches from the
// checkpoint sampler, initialization from Eq. 14 when requested.
Detector train_dtv(const hist::HistoryDistribution& history, gan::BatchSource& data,
                   const DetectorConfig& config);

std::vector<double> score(const Detector& det, const Tensor& batch);

struct LossEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n = 0;
};

// Monte-Carlo estimate of the Eq-10 population loss of a fixed detector,
// with the standard error of the estimate. Splits the pooled penalty evenly
// across the two sources (exact for equal draw counts).
LossEstimate estimate_loss(const nn::NetworkWeights& w, const nn::MlpSpec& spec,
                           const SampleFn& draw_real, const SampleFn& draw_hist, double lambda,
                           std::size_t n_samples);

}  // namespace histad::dtv
