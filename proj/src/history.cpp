#include "histad/history.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "histad/errors.hpp"

namespace histad::hist {

double sample_time(double alpha, double beta, double n_epochs, double u) {
    if (!(alpha >= 0.0 && alpha < n_epochs))
        throw ContractError("sample_time: need 0 <= alpha < n_epochs");
    if (beta < 0.0) throw ContractError("sample_time: beta must be >= 0");
    if (!(u >= 0.0 && u < 1.0)) throw ContractError("sample_time: u must be in [0,1)");
    if (beta == 0.0) return alpha + u * (n_epochs - alpha);
    const double ea = std::exp(-beta * alpha);
    const double en = std::exp(-beta * n_epochs);
    return -std::log(ea - u * (ea - en)) / beta;
}

double time_mass(double alpha, double beta, double n_epochs, double a, double b) {
    a = std::max(a, alpha);
    b = std::min(b, n_epochs);
    if (b <= a) return 0.0;
    if (beta == 0.0) return (b - a) / (n_epochs - alpha);
    const double denom = std::exp(-beta * alpha) - std::exp(-beta * n_epochs);
    return (std::exp(-beta * a) - std::exp(-beta * b)) / denom;
}

HistoryDistribution::HistoryDistribution(const gan::CheckpointStore& store, HistoryParams params)
    : store_(&store), params_(params), n_epochs_(static_cast<double>(store.config.n_epochs)) {
    if (!(params_.alpha >= 0.0 && params_.alpha < n_epochs_))
        throw ContractError("HistoryDistribution: need 0 <= alpha < n_epochs");
    if (params_.beta < 0.0) throw ContractError("HistoryDistribution: beta must be >= 0");
    if (params_.case2 && !(params_.wide_factor > 1.0))
        throw ContractError("HistoryDistribution: wide_factor must exceed 1");

    eligible_.resize(store.checkpoints.size());
    std::iota(eligible_.begin(), eligible_.end(), 0);
    std::sort(eligible_.begin(), eligible_.end(), [&](std::size_t a, std::size_t b) {
        return store.checkpoints[a].t < store.checkpoints[b].t;
    });
    std::erase_if(eligible_, [&](std::size_t i) {
        const double t = store.checkpoints[i].t;
        return t < params_.alpha || t > n_epochs_;
    });
    if (eligible_.empty())
        throw ContractError("HistoryDistribution: no checkpoint with t in [alpha, n_epochs]");
}

const gan::Checkpoint& HistoryDistribution::nearest_checkpoint(double t) const {
    const auto& cps = store_->checkpoints;
    auto it = std::lower_bound(eligible_.begin(), eligible_.end(), t,
                               [&](std::size_t i, double val) { return cps[i].t < val; });
    if (it == eligible_.begin()) return cps[*it];
    if (it == eligible_.end()) return cps[*(it - 1)];
    const double after = cps[*it].t - t;
    const double before = t - cps[*(it - 1)].t;
    return after <= before ? cps[*it] : cps[*(it - 1)];  // tie goes to the later one
}

Tensor HistoryDistribution::sample(std::size_t n, RandomStream& rng) const {
    if (n < 1) throw ContractError("HistoryDistribution::sample: n must be >= 1");
    const gan::GanConfig& cfg = store_->config;
    const nn::MlpSpec g_spec = cfg.generator_spec();
    const std::size_t zdim = cfg.latent_dim;

    // Fixed draw order: per sample, time first, then (for case 2) the
    // width coin, then the latent vector.
    std::vector<const gan::Checkpoint*> picks(n);
    Tensor z{n, zdim};
    for (std::size_t s = 0; s < n; ++s) {
        const double t = sample_time(params_.alpha, params_.beta, n_epochs_, rng.uniform());
        picks[s] = &nearest_checkpoint(t);
        double std = cfg.latent_std;
        if (params_.case2 && rng.uniform() < 0.5) std *= params_.wide_factor;
        for (std::size_t j = 0; j < zdim; ++j) z.at(s, j) = std * rng.normal();
    }

    // Group rows by checkpoint so each generator runs once, then scatter
    // back into sample order.
    Tensor out{n, cfg.data_dim};
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return picks[a] < picks[b]; });
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && picks[order[j]] == picks[order[i]]) ++j;
        Tensor zb{j - i, zdim};
        for (std::size_t r = i; r < j; ++r)
            std::copy(z.row(order[r]), z.row(order[r]) + zdim, zb.row(r - i));
        const Tensor xb = nn::forward(picks[order[i]]->generator, g_spec, zb);
        for (std::size_t r = i; r < j; ++r)
            std::copy(xb.row(r - i), xb.row(r - i) + cfg.data_dim, out.row(order[r]));
        i = j;
    }
    return out;
}

nn::NetworkWeights HistoryDistribution::init_dtv() const {
    std::vector<std::pair<const nn::NetworkWeights*, double>> items;
    items.reserve(eligible_.size());
    for (std::size_t i : eligible_) {
        const gan::Checkpoint& c = store_->checkpoints[i];
        items.emplace_back(&c.discriminator, std::exp(-params_.beta * c.t));
    }
    return nn::average_weights(items);
}

double HistoryDistribution::support_coverage(const Tensor& data_samples, double radius,
                                             std::size_t n_history_samples,
                                             RandomStream& rng) const {
    if (!(radius > 0.0)) throw ContractError("support_coverage: radius must be positive");
    const Tensor hist_samples = sample(n_history_samples, rng);
    const std::size_t dim = data_samples.cols();
    if (hist_samples.cols() != dim)
        throw ContractError("support_coverage: dimension mismatch");

    const double r2 = radius * radius;
    const std::int64_t nd = static_cast<std::int64_t>(data_samples.rows());
    std::size_t covered = 0;
#pragma omp parallel for schedule(static) reduction(+ : covered)
    for (std::int64_t s = 0; s < nd; ++s) {
        const double* xs = data_samples.row(s);
        bool hit = false;
        for (std::size_t h = 0; h < hist_samples.rows() && !hit; ++h) {
            const double* hs = hist_samples.row(h);
            double d2 = 0.0;
            for (std::size_t j = 0; j < dim; ++j) {
                const double d = xs[j] - hs[j];
                d2 += d * d;
            }
            hit = d2 <= r2;
        }
        covered += hit ? 1 : 0;
    }
    return static_cast<double>(covered) / static_cast<double>(data_samples.rows());
}

}  // namespace histad::hist
