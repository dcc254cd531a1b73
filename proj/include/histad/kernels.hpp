#pragma once

#include <cstddef>

// Batched dense kernels behind the network engine. The OpenMP variants
// parallelize only across independent output elements -- every reduction
// (over the batch or the input dimension) runs serially inside one element
// in a fixed order -- so they are bit-identical to the serial reference for
// any thread count. tests/test_kernels.cpp asserts that equivalence and
// tools/bench_kernels.cpp times the two against each other.
namespace histad::kernels {

namespace serial {

// y[b,o] = sum_i x[b,i] * w[o,i] + bias[o]    (bias may be null)
void linear_forward(const double* x, const double* w, const double* bias, double* y,
                    std::size_t batch, std::size_t in, std::size_t out);

// dx[b,i] = sum_o dy[b,o] * w[o,i]
void linear_backward_input(const double* dy, const double* w, double* dx,
                           std::size_t batch, std::size_t in, std::size_t out);

// dw[o,i] += sum_b dy[b,o] * x[b,i];  db[o] += sum_b dy[b,o]   (db may be null)
void linear_backward_params(const double* dy, const double* x, double* dw, double* db,
                            std::size_t batch, std::size_t in, std::size_t out);

void leaky_relu(const double* a, double* h, std::size_t n, double slope);

// da[j] = dh[j] * (a[j] >= 0 ? 1 : slope)
void leaky_relu_grad(const double* a, const double* dh, double* da, std::size_t n, double slope);

}  // namespace serial

void linear_forward(const double* x, const double* w, const double* bias, double* y,
                    std::size_t batch, std::size_t in, std::size_t out);
void linear_backward_input(const double* dy, const double* w, double* dx,
                           std::size_t batch, std::size_t in, std::size_t out);
void linear_backward_params(const double* dy, const double* x, double* dw, double* db,
                            std::size_t batch, std::size_t in, std::size_t out);
void leaky_relu(const double* a, double* h, std::size_t n, double slope);
void leaky_relu_grad(const double* a, const double* dh, double* da, std::size_t n, double slope);

}  // namespace histad::kernels
