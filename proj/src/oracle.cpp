#include "histad/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "histad/errors.hpp"

namespace histad::oracle {

namespace {
constexpr double kSigmaRange = 8.0;
constexpr double kInvSqrt2Pi = 0.39894228040143267793994605993438;
}  // namespace

Density1D Density1D::gaussian(double mean, double std) {
    return mixture({{1.0, mean, std}});
}

Density1D Density1D::uniform(double lo, double hi) {
    return mixture({}, {{1.0, lo, hi}});
}

Density1D Density1D::mixture(std::vector<Gaussian> gaussians, std::vector<Uniform> uniforms) {
    Density1D d;
    d.gaussians_ = std::move(gaussians);
    d.uniforms_ = std::move(uniforms);
    double total = 0.0;
    bool first = true;
    for (const auto& g : d.gaussians_) {
        if (g.weight < 0.0 || g.std <= 0.0) throw ContractError("Density1D: bad gaussian component");
        total += g.weight;
        const double lo = g.mean - kSigmaRange * g.std, hi = g.mean + kSigmaRange * g.std;
        d.lo_ = first ? lo : std::min(d.lo_, lo);
        d.hi_ = first ? hi : std::max(d.hi_, hi);
        first = false;
    }
    for (const auto& u : d.uniforms_) {
        if (u.weight < 0.0 || !(u.hi > u.lo)) throw ContractError("Density1D: bad uniform component");
        total += u.weight;
        d.lo_ = first ? u.lo : std::min(d.lo_, u.lo);
        d.hi_ = first ? u.hi : std::max(d.hi_, u.hi);
        first = false;
    }
    if (first) throw ContractError("Density1D: empty mixture");
    if (std::abs(total - 1.0) > 1e-12)
        throw ContractError("Density1D: component weights sum to " + std::to_string(total));
    return d;
}

double Density1D::operator()(double x) const {
    double p = 0.0;
    for (const auto& g : gaussians_) {
        const double z = (x - g.mean) / g.std;
        p += g.weight * kInvSqrt2Pi / g.std * std::exp(-0.5 * z * z);
    }
    for (const auto& u : uniforms_)
        if (x >= u.lo && x <= u.hi) p += u.weight / (u.hi - u.lo);
    return p;
}

std::vector<double> Density1D::breakpoints() const {
    std::vector<double> pts;
    for (const auto& u : uniforms_) {
        pts.push_back(u.lo);
        pts.push_back(u.hi);
    }
    return pts;
}

double Density1D::sample(RandomStream& rng) const {
    double u = rng.uniform();
    for (const auto& g : gaussians_) {
        if (u < g.weight) return g.mean + g.std * rng.normal();
        u -= g.weight;
    }
    for (const auto& un : uniforms_) {
        if (u < un.weight) return rng.uniform(un.lo, un.hi);
        u -= un.weight;
    }
    // Weight roundoff can leave u marginally above the last component.
    if (!gaussians_.empty()) {
        const auto& g = gaussians_.back();
        return g.mean + g.std * rng.normal();
    }
    const auto& un = uniforms_.back();
    return rng.uniform(un.lo, un.hi);
}

DensityPair::DensityPair(Density1D data, Density1D hist, double lambda, std::size_t resolution)
    : data_(std::move(data)), hist_(std::move(hist)), lambda_(lambda) {
    if (!(lambda > 0.0)) throw ContractError("DensityPair: lambda must be positive");
    if (resolution < 64) throw ContractError("DensityPair: resolution too small");

    const double lo = std::min(data_.support_lo(), hist_.support_lo());
    const double hi = std::max(data_.support_hi(), hist_.support_hi());

    std::vector<double> cuts{lo, hi};
    for (double b : data_.breakpoints())
        if (b > lo && b < hi) cuts.push_back(b);
    for (double b : hist_.breakpoints())
        if (b > lo && b < hi) cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    const double span = hi - lo;
    for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
        const double a = cuts[p], b = cuts[p + 1];
        // Even subinterval count proportional to piece length, at least 32.
        std::size_t m = static_cast<std::size_t>(static_cast<double>(resolution) * (b - a) / span);
        m = std::max<std::size_t>(m, 32);
        if (m % 2) ++m;
        const double h = (b - a) / static_cast<double>(m);
        const double nudge = (b - a) * 1e-12;
        for (std::size_t j = 0; j <= m; ++j) {
            double x = a + h * static_cast<double>(j);
            double coeff = (j == 0 || j == m) ? 1.0 : (j % 2 ? 4.0 : 2.0);
            if (j == 0) x += nudge;  // one-sided values at jump points
            if (j == m) x -= nudge;
            grid_.nodes.push_back(x);
            grid_.weights.push_back(coeff * h / 3.0);
        }
    }
}

double DensityPair::tv_distance() const {
    const double v =
        0.5 * grid_.integrate([this](double x) { return std::abs(data_(x) - hist_(x)); });
    return std::clamp(v, 0.0, 1.0);
}

int DensityPair::optimal_dtv_star(double x) const {
    return hist_(x) > data_(x) ? 1 : -1;
}

std::optional<double> DensityPair::delta_star(double x) const {
    const double pd = data_(x), ph = hist_(x);
    const double sum = pd + ph;
    if (sum <= 0.0) return std::nullopt;
    return (ph - pd) / (lambda_ * sum);
}

double DensityPair::min_loss() const {
    const double correction = grid_.integrate([this](double x) {
        const double pd = data_(x), ph = hist_(x);
        const double sum = pd + ph;
        if (sum <= 0.0) return 0.0;
        const double diff = ph - pd;
        return diff * diff / sum;
    });
    return -2.0 * tv_distance() - correction / (2.0 * lambda_);
}

double DensityPair::pointwise_loss(const std::function<double(double)>& D, double x) const {
    const double pd = data_(x), ph = hist_(x);
    const double v = D(x);
    const double bd = boundary_distance(v);
    return (pd - ph) * v + lambda_ * 0.5 * (pd + ph) * bd * bd;
}

double boundary_distance(double v) {
    return std::max(0.0, std::abs(v) - 1.0);
}

}  // namespace histad::oracle
