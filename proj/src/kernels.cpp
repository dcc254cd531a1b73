#include "histad/kernels.hpp"

#include <cstdint>

namespace histad::kernels {

namespace serial {

void linear_forward(const double* x, const double* w, const double* bias, double* y,
                    std::size_t batch, std::size_t in, std::size_t out) {
    for (std::size_t b = 0; b < batch; ++b) {
        const double* xb = x + b * in;
        double* yb = y + b * out;
        for (std::size_t o = 0; o < out; ++o) {
            const double* wo = w + o * in;
            double acc = bias ? bias[o] : 0.0;
            for (std::size_t i = 0; i < in; ++i) acc += xb[i] * wo[i];
            yb[o] = acc;
        }
    }
}

void linear_backward_input(const double* dy, const double* w, double* dx,
                           std::size_t batch, std::size_t in, std::size_t out) {
    for (std::size_t b = 0; b < batch; ++b) {
        const double* dyb = dy + b * out;
        double* dxb = dx + b * in;
        for (std::size_t i = 0; i < in; ++i) {
            double acc = 0.0;
            for (std::size_t o = 0; o < out; ++o) acc += dyb[o] * w[o * in + i];
            dxb[i] = acc;
        }
    }
}

void linear_backward_params(const double* dy, const double* x, double* dw, double* db,
                            std::size_t batch, std::size_t in, std::size_t out) {
    for (std::size_t o = 0; o < out; ++o) {
        double* dwo = dw + o * in;
        for (std::size_t i = 0; i < in; ++i) {
            double acc = 0.0;
            for (std::size_t b = 0; b < batch; ++b) acc += dy[b * out + o] * x[b * in + i];
            dwo[i] += acc;
        }
        if (db) {
            double acc = 0.0;
            for (std::size_t b = 0; b < batch; ++b) acc += dy[b * out + o];
            db[o] += acc;
        }
    }
}

void leaky_relu(const double* a, double* h, std::size_t n, double slope) {
    for (std::size_t j = 0; j < n; ++j) h[j] = a[j] >= 0.0 ? a[j] : slope * a[j];
}

void leaky_relu_grad(const double* a, const double* dh, double* da, std::size_t n, double slope) {
    for (std::size_t j = 0; j < n; ++j) da[j] = a[j] >= 0.0 ? dh[j] : slope * dh[j];
}

}  // namespace serial

// Below a few thousand flops the fork/join overhead dominates; the `if`
// clauses keep tiny nets on one thread. The arithmetic per element is the
// same either way, so results do not depend on the threshold.
namespace {
constexpr std::size_t kParallelCutoff = 1 << 13;
}

void linear_forward(const double* x, const double* w, const double* bias, double* y,
                    std::size_t batch, std::size_t in, std::size_t out) {
    const std::int64_t nb = static_cast<std::int64_t>(batch);
#pragma omp parallel for schedule(static) if (batch * in * out > kParallelCutoff)
    for (std::int64_t b = 0; b < nb; ++b) {
        const double* xb = x + b * in;
        double* yb = y + b * out;
        for (std::size_t o = 0; o < out; ++o) {
            const double* wo = w + o * in;
            double acc = bias ? bias[o] : 0.0;
            for (std::size_t i = 0; i < in; ++i) acc += xb[i] * wo[i];
            yb[o] = acc;
        }
    }
}

void linear_backward_input(const double* dy, const double* w, double* dx,
                           std::size_t batch, std::size_t in, std::size_t out) {
    const std::int64_t nb = static_cast<std::int64_t>(batch);
#pragma omp parallel for schedule(static) if (batch * in * out > kParallelCutoff)
    for (std::int64_t b = 0; b < nb; ++b) {
        const double* dyb = dy + b * out;
        double* dxb = dx + b * in;
        for (std::size_t i = 0; i < in; ++i) {
            double acc = 0.0;
            for (std::size_t o = 0; o < out; ++o) acc += dyb[o] * w[o * in + i];
            dxb[i] = acc;
        }
    }
}

void linear_backward_params(const double* dy, const double* x, double* dw, double* db,
                            std::size_t batch, std::size_t in, std::size_t out) {
    const std::int64_t no = static_cast<std::int64_t>(out);
    // Parallel over output neurons; the batch reduction stays serial per
    // element so the summation order is fixed.
#pragma omp parallel for schedule(static) if (batch * in * out > kParallelCutoff)
    for (std::int64_t o = 0; o < no; ++o) {
        double* dwo = dw + o * in;
        for (std::size_t i = 0; i < in; ++i) {
            double acc = 0.0;
            for (std::size_t b = 0; b < batch; ++b) acc += dy[b * out + o] * x[b * in + i];
            dwo[i] += acc;
        }
        if (db) {
            double acc = 0.0;
            for (std::size_t b = 0; b < batch; ++b) acc += dy[b * out + o];
            db[o] += acc;
        }
    }
}

void leaky_relu(const double* a, double* h, std::size_t n, double slope) {
    const std::int64_t nn = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static) if (n > kParallelCutoff)
    for (std::int64_t j = 0; j < nn; ++j) h[j] = a[j] >= 0.0 ? a[j] : slope * a[j];
}

void leaky_relu_grad(const double* a, const double* dh, double* da, std::size_t n, double slope) {
    const std::int64_t nn = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static) if (n > kParallelCutoff)
    for (std::int64_t j = 0; j < nn; ++j) da[j] = a[j] >= 0.0 ? dh[j] : slope * dh[j];
}

}  // namespace histad::kernels
