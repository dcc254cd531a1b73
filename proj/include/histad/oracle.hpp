#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "histad/rng.hpp"

namespace histad::oracle {

// Analytic 1D density: a mixture of Gaussians and uniform intervals whose
// weights sum to 1. Powers the closed-form checks of the detector objective.
class Density1D {
public:
    struct Gaussian {
        double weight, mean, std;
    };
    struct Uniform {
        double weight, lo, hi;
    };

    static Density1D gaussian(double mean, double std);
    static Density1D uniform(double lo, double hi);
    static Density1D mixture(std::vector<Gaussian> gaussians, std::vector<Uniform> uniforms = {});

    double operator()(double x) const;
    double support_lo() const { return lo_; }  // covers all but ~1e-15 of the mass
    double support_hi() const { return hi_; }
    // Interval endpoints where the density jumps (uniform edges).
    std::vector<double> breakpoints() const;
    double sample(RandomStream& rng) const;

    const std::vector<Gaussian>& gaussians() const { return gaussians_; }
    const std::vector<Uniform>& uniforms() const { return uniforms_; }

private:
    Density1D() = default;
    std::vector<Gaussian> gaussians_;
    std::vector<Uniform> uniforms_;
    double lo_ = 0.0, hi_ = 0.0;
};

// Composite-Simpson nodes and weights over a working interval, split at the
// densities' jump points so every piece is smooth. Node positions at piece
// boundaries are nudged one-sided so piecewise-constant densities integrate
// exactly.
struct QuadratureGrid {
    std::vector<double> nodes;
    std::vector<double> weights;

    double integrate(const std::function<double(double)>& f) const {
        double acc = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) acc += weights[i] * f(nodes[i]);
        return acc;
    }
};

class DensityPair {
public:
    DensityPair(Density1D data, Density1D hist, double lambda = 10.0,
                std::size_t resolution = std::size_t{1} << 14);

    // Total variation distance, computed as (1/2) integral |p_data - p_hist|.
    double tv_distance() const;

    // Hahn-decomposition optimum: +1 where p_hist > p_data, -1 otherwise
    // (ties resolve to -1; they are a measure-zero set).
    int optimal_dtv_star(double x) const;

    // Optimal correction (p_hist - p_data) / (lambda * (p_hist + p_data));
    // nullopt outside the support of both densities.
    std::optional<double> delta_star(double x) const;

    // Closed-form minimum of the detector objective:
    // -2*delta - (1/2 lambda) * integral (p_hist - p_data)^2 / (p_hist + p_data).
    double min_loss() const;

    // Point-wise objective density l(D(x)).
    double pointwise_loss(const std::function<double(double)>& D, double x) const;

    double integrate(const std::function<double(double)>& f) const { return grid_.integrate(f); }

    const Density1D& data() const { return data_; }
    const Density1D& hist() const { return hist_; }
    double lambda() const { return lambda_; }
    const QuadratureGrid& grid() const { return grid_; }

private:
    Density1D data_, hist_;
    double lambda_;
    QuadratureGrid grid_;
};

// Distance from v to the interval [-1, 1]: max(0, |v| - 1).
double boundary_distance(double v);

}  // namespace histad::oracle
