#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "histad/rng.hpp"
#include "histad/tensor.hpp"

namespace histad::nn {

// Fully-connected net: LeakyReLU hidden layers, identity output.
struct MlpSpec {
    std::vector<std::size_t> layer_dims;  // input dim first, output dim last
    double leaky_slope = 0.2;

    std::size_t input_dim() const { return layer_dims.front(); }
    std::size_t output_dim() const { return layer_dims.back(); }
    std::size_t n_layers() const { return layer_dims.size() - 1; }

    void validate() const;
    bool operator==(const MlpSpec&) const = default;

    static MlpSpec make(std::size_t in, const std::vector<std::size_t>& hidden, std::size_t out,
                        double slope = 0.2);
};

struct NetworkWeights {
    std::vector<Tensor> weights;  // per layer, (out x in)
    std::vector<Tensor> biases;   // per layer, (out)

    static NetworkWeights zeros(const MlpSpec& spec);
    // Uniform in +-sqrt(1/fan_in) per layer.
    static NetworkWeights random_init(const MlpSpec& spec, RandomStream& rng);

    std::size_t n_layers() const { return weights.size(); }
    std::size_t param_count() const;
    bool all_finite() const;
    bool shape_matches(const MlpSpec& spec) const;
    void fill(double v);
    // this += c * other
    void axpy(double c, const NetworkWeights& other);

    bool operator==(const NetworkWeights&) const = default;
};

// Activations recorded during forward, consumed by the backward passes.
struct ForwardTrace {
    Tensor input;
    std::vector<Tensor> pre;   // a_k = W_k h_{k-1} + b_k
    std::vector<Tensor> post;  // h_k = activation(a_k)
};

// Deterministic batched forward pass; outputs shape (batch, output_dim).
Tensor forward(const NetworkWeights& w, const MlpSpec& spec, const Tensor& batch,
               ForwardTrace* trace = nullptr);

// Scalar loss of the outputs, returning (value, dLoss/dOutputs).
using LossFn = std::function<std::pair<double, Tensor>(const Tensor& outputs)>;

struct GradResult {
    double loss = 0.0;
    NetworkWeights grads;
};

// Reverse-mode gradients of loss_fn(forward(batch)) w.r.t. every parameter.
GradResult param_grads(const NetworkWeights& w, const MlpSpec& spec, const LossFn& loss_fn,
                       const Tensor& batch);

// Backprop a given output gradient through a recorded forward pass,
// accumulating into grads (if non-null) and writing dLoss/dInput (if non-null).
void backprop(const NetworkWeights& w, const MlpSpec& spec, const ForwardTrace& trace,
              const Tensor& output_grad, NetworkWeights* grads, Tensor* input_grad);

// Per-sample gradient of the scalar network output w.r.t. its input.
Tensor input_grad(const NetworkWeights& w, const MlpSpec& spec, const Tensor& x);

struct PenaltyResult {
    double value = 0.0;
    NetworkWeights grads;
    std::size_t zero_grad_samples = 0;  // reported, not fatal
};

// mean over the batch of (||grad_x D(x_hat)|| - 1)^2 at
// x_hat = eps*x_real + (1-eps)*x_fake, with parameter gradients obtained by
// differentiating through the input-gradient computation (double backprop).
// LeakyReLU has zero curvature almost everywhere, so the activation masks are
// treated as locally constant; biases get exactly zero gradient from this term.
PenaltyResult gradient_penalty(const NetworkWeights& w, const MlpSpec& spec, const Tensor& x_real,
                               const Tensor& x_fake, const std::vector<double>& eps);

struct LrSchedule {
    double initial = 5e-4;
    std::size_t decay_steps = 0;  // 0 = constant rate

    // Rate applied at 1-based step k: linear decay to 0 over decay_steps.
    double at(std::size_t step) const {
        if (decay_steps == 0) return initial;
        if (step > decay_steps) return 0.0;
        return initial * (static_cast<double>(decay_steps - (step - 1)) / static_cast<double>(decay_steps));
    }
};

struct AdamState {
    std::size_t step = 0;
    double beta1 = 0.5;
    double beta2 = 0.9;
    double eps = 1e-8;
    LrSchedule lr;
    NetworkWeights m, v;

    static AdamState create(const MlpSpec& spec, LrSchedule lr, double beta1 = 0.5,
                            double beta2 = 0.9);
};

// Standard bias-corrected Adam update at the scheduled rate.
void adam_step(AdamState& state, NetworkWeights& w, const NetworkWeights& grads);

// Coefficient-normalized convex combination, parameter-wise.
NetworkWeights average_weights(const std::vector<std::pair<const NetworkWeights*, double>>& items);

}  // namespace histad::nn
