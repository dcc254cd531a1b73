#include "histad/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "histad/errors.hpp"

namespace histad::metrics {

double auprc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size() || scores.empty())
        throw ContractError("auprc: scores and labels must be non-empty and equal length");
    std::size_t total_pos = 0;
    for (double s : scores)
        if (!std::isfinite(s)) throw ContractError("auprc: non-finite score");
    for (int l : labels) {
        if (l != 0 && l != 1) throw ContractError("auprc: labels must be 0 or 1");
        total_pos += static_cast<std::size_t>(l);
    }
    if (total_pos == 0 || total_pos == labels.size())
        throw ContractError("auprc: both classes must be present");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scores[a] > scores[b];
    });

    double area = 0.0;
    double prev_recall = 0.0;
    std::size_t tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;  // the whole tie block enters at once
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            tp += static_cast<std::size_t>(labels[order[j]]);
            fp += static_cast<std::size_t>(1 - labels[order[j]]);
            ++j;
        }
        const double recall = static_cast<double>(tp) / static_cast<double>(total_pos);
        const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
        area += (recall - prev_recall) * precision;
        prev_recall = recall;
        i = j;
    }
    return area;
}

double Histogram::integral() const {
    double total = 0.0;
    for (std::size_t b = 0; b < density.size(); ++b)
        total += density[b] * (edges[b + 1] - edges[b]);
    return total;
}

Histogram score_histogram(const std::vector<double>& scores, std::size_t n_bins) {
    if (scores.empty()) throw ContractError("score_histogram: no scores");
    if (n_bins < 1) throw ContractError("score_histogram: n_bins must be >= 1");
    // min/max_element skip NaN (every comparison is false), so check each
    // score rather than the extremes.
    for (double s : scores)
        if (!std::isfinite(s)) throw ContractError("score_histogram: non-finite score");
    double lo = *std::min_element(scores.begin(), scores.end());
    double hi = *std::max_element(scores.begin(), scores.end());
    if (lo == hi) {
        lo -= 0.5;
        hi += 0.5;
    }

    Histogram h;
    h.edges.resize(n_bins + 1);
    for (std::size_t b = 0; b <= n_bins; ++b)
        h.edges[b] = lo + (hi - lo) * static_cast<double>(b) / static_cast<double>(n_bins);
    h.edges.back() = hi;

    const double width = (hi - lo) / static_cast<double>(n_bins);
    std::vector<std::size_t> counts(n_bins, 0);
    for (double s : scores) {
        auto b = static_cast<std::size_t>((s - lo) / width);
        ++counts[std::min(b, n_bins - 1)];
    }
    h.density.resize(n_bins);
    const double norm = static_cast<double>(scores.size()) * width;
    for (std::size_t b = 0; b < n_bins; ++b)
        h.density[b] = static_cast<double>(counts[b]) / norm;
    return h;
}

std::vector<double> noise_sweep(const dtv::Detector& det, const Tensor& normal_batch,
                                const std::vector<double>& sigmas, RandomStream& rng) {
    require_matrix(normal_batch, det.spec.layer_dims.front(), "noise_sweep batch");
    for (std::size_t k = 0; k + 1 < sigmas.size(); ++k)
        if (sigmas[k] > sigmas[k + 1])
            throw ContractError("noise_sweep: sigmas must be non-decreasing");
    std::vector<double> means;
    means.reserve(sigmas.size());
    for (double sigma : sigmas) {
        if (sigma < 0.0) throw ContractError("noise_sweep: sigma must be >= 0");
        Tensor noisy = normal_batch;
        for (double& v : noisy.data) v += sigma * rng.normal();
        const std::vector<double> s = dtv::score(det, noisy);
        means.push_back(std::accumulate(s.begin(), s.end(), 0.0) /
                        static_cast<double>(s.size()));
    }
    return means;
}

std::vector<std::pair<double, double>> latent_interpolation(const gan::Checkpoint& checkpoint,
                                                            const nn::MlpSpec& generator_spec,
                                                            const dtv::Detector& det,
                                                            const std::vector<double>& z1,
                                                            const std::vector<double>& z2,
                                                            std::size_t steps) {
    const std::size_t zdim = generator_spec.layer_dims.front();
    if (z1.size() != zdim || z2.size() != zdim)
        throw ContractError("latent_interpolation: latent size mismatch");
    if (steps < 2) throw ContractError("latent_interpolation: steps must be >= 2");

    Tensor z{steps, zdim};
    std::vector<double> ts(steps);
    for (std::size_t i = 0; i < steps; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(steps - 1);
        ts[i] = t;
        for (std::size_t j = 0; j < zdim; ++j)
            z.at(i, j) = (1.0 - t) * z1[j] + t * z2[j];
    }
    const Tensor x = nn::forward(checkpoint.generator, generator_spec, z);
    const std::vector<double> s = dtv::score(det, x);
    std::vector<std::pair<double, double>> out(steps);
    for (std::size_t i = 0; i < steps; ++i) out[i] = {ts[i], s[i]};
    return out;
}

}  // namespace histad::metrics
