#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "histad/detector.hpp"
#include "histad/gan.hpp"
#include "histad/rng.hpp"
#include "histad/tensor.hpp"

namespace histad::metrics {

// Area under the precision-recall curve, positive class = label 1. Scores
// are ranked descending; a tie block is one threshold step. Needs both
// classes present.
double auprc(const std::vector<double>& scores, const std::vector<int>& labels);

struct Histogram {
    std::vector<double> edges;    // n_bins + 1 ascending
    std::vector<double> density;  // per-bin, integrates to 1

    double integral() const;
};

// Equal-width density histogram over the empirical score range. A
// degenerate range widens to +-1/2 around the common value.
Histogram score_histogram(const std::vector<double>& scores, std::size_t n_bins);

// Mean detector score on `normal_batch` perturbed with N(0, sigma^2) noise,
// one entry per sigma. Fresh noise per sigma; sigma = 0 scores the clean
// batch bit-identically.
std::vector<double> noise_sweep(const dtv::Detector& det, const Tensor& normal_batch,
                                const std::vector<double>& sigmas, RandomStream& rng);

// Detector scores along the linear latent path (1-t) z1 + t z2 through one
// generator checkpoint; `steps` points with both endpoints included.
std::vector<std::pair<double, double>> latent_interpolation(const gan::Checkpoint& checkpoint,
                                                            const nn::MlpSpec& generator_spec,
                                                            const dtv::Detector& det,
                                                            const std::vector<double>& z1,
                                                            const std::vector<double>& z2,
                                                            std::size_t steps);

}  // namespace histad::metrics
