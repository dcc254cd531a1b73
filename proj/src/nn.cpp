#include "histad/nn.hpp"

#include <cmath>
#include <string>

#include "histad/errors.hpp"
#include "histad/kernels.hpp"

namespace histad::nn {

void MlpSpec::validate() const {
    if (layer_dims.size() < 2) throw ContractError("MlpSpec: need at least input and output dims");
    for (std::size_t d : layer_dims)
        if (d < 1) throw ContractError("MlpSpec: all layer dims must be >= 1");
    if (!(leaky_slope > 0.0 && leaky_slope < 1.0))
        throw ContractError("MlpSpec: leaky slope must be in (0, 1)");
}

MlpSpec MlpSpec::make(std::size_t in, const std::vector<std::size_t>& hidden, std::size_t out,
                      double slope) {
    MlpSpec spec;
    spec.layer_dims.push_back(in);
    for (std::size_t h : hidden) spec.layer_dims.push_back(h);
    spec.layer_dims.push_back(out);
    spec.leaky_slope = slope;
    spec.validate();
    return spec;
}

NetworkWeights NetworkWeights::zeros(const MlpSpec& spec) {
    spec.validate();
    NetworkWeights w;
    for (std::size_t k = 0; k + 1 < spec.layer_dims.size(); ++k) {
        w.weights.emplace_back(Tensor{spec.layer_dims[k + 1], spec.layer_dims[k]});
        w.biases.emplace_back(Tensor{spec.layer_dims[k + 1]});
    }
    return w;
}

NetworkWeights NetworkWeights::random_init(const MlpSpec& spec, RandomStream& rng) {
    NetworkWeights w = zeros(spec);
    for (std::size_t k = 0; k < w.weights.size(); ++k) {
        const double bound = std::sqrt(1.0 / static_cast<double>(spec.layer_dims[k]));
        for (double& v : w.weights[k].data) v = rng.uniform(-bound, bound);
        for (double& v : w.biases[k].data) v = rng.uniform(-bound, bound);
    }
    return w;
}

std::size_t NetworkWeights::param_count() const {
    std::size_t n = 0;
    for (const Tensor& t : weights) n += t.size();
    for (const Tensor& t : biases) n += t.size();
    return n;
}

bool NetworkWeights::all_finite() const {
    for (const Tensor& t : weights)
        if (!t.all_finite()) return false;
    for (const Tensor& t : biases)
        if (!t.all_finite()) return false;
    return true;
}

bool NetworkWeights::shape_matches(const MlpSpec& spec) const {
    if (weights.size() != spec.n_layers() || biases.size() != spec.n_layers()) return false;
    for (std::size_t k = 0; k < weights.size(); ++k) {
        if (weights[k].shape != std::vector<std::size_t>{spec.layer_dims[k + 1], spec.layer_dims[k]})
            return false;
        if (biases[k].shape != std::vector<std::size_t>{spec.layer_dims[k + 1]}) return false;
    }
    return true;
}

void NetworkWeights::fill(double v) {
    for (Tensor& t : weights) std::fill(t.data.begin(), t.data.end(), v);
    for (Tensor& t : biases) std::fill(t.data.begin(), t.data.end(), v);
}

void NetworkWeights::axpy(double c, const NetworkWeights& other) {
    if (weights.size() != other.weights.size())
        throw ContractError("NetworkWeights::axpy: layer count mismatch");
    for (std::size_t k = 0; k < weights.size(); ++k) {
        if (weights[k].shape != other.weights[k].shape)
            throw ContractError("NetworkWeights::axpy: shape mismatch at layer " + std::to_string(k));
        for (std::size_t j = 0; j < weights[k].size(); ++j)
            weights[k].data[j] += c * other.weights[k].data[j];
        for (std::size_t j = 0; j < biases[k].size(); ++j)
            biases[k].data[j] += c * other.biases[k].data[j];
    }
}

Tensor forward(const NetworkWeights& w, const MlpSpec& spec, const Tensor& batch,
               ForwardTrace* trace) {
    if (!w.shape_matches(spec)) throw ContractError("forward: weights do not match spec");
    require_matrix(batch, spec.input_dim(), "forward batch");
    const std::size_t n = batch.rows();
    const std::size_t layers = spec.n_layers();

    if (trace) {
        trace->input = batch;
        trace->pre.assign(layers, Tensor{});
        trace->post.assign(layers, Tensor{});
    }

    Tensor h = batch;
    for (std::size_t k = 0; k < layers; ++k) {
        const std::size_t in = spec.layer_dims[k];
        const std::size_t out = spec.layer_dims[k + 1];
        Tensor a{n, out};
        kernels::linear_forward(h.data.data(), w.weights[k].data.data(), w.biases[k].data.data(),
                                a.data.data(), n, in, out);
        if (trace) trace->pre[k] = a;
        if (k + 1 < layers) {
            Tensor act{n, out};
            kernels::leaky_relu(a.data.data(), act.data.data(), a.size(), spec.leaky_slope);
            if (trace) trace->post[k] = act;
            h = std::move(act);
        } else {
            // identity output activation
            if (trace) trace->post[k] = a;
            h = std::move(a);
        }
    }
    return h;
}

void backprop(const NetworkWeights& w, const MlpSpec& spec, const ForwardTrace& trace,
              const Tensor& output_grad, NetworkWeights* grads, Tensor* in_grad) {
    const std::size_t layers = spec.n_layers();
    const std::size_t n = trace.input.rows();
    require_matrix(output_grad, spec.output_dim(), "backprop output grad");

    Tensor da = output_grad;  // gradient w.r.t. pre-activation of current layer
    for (std::size_t k = layers; k-- > 0;) {
        const std::size_t in = spec.layer_dims[k];
        const std::size_t out = spec.layer_dims[k + 1];
        const Tensor& layer_in = (k == 0) ? trace.input : trace.post[k - 1];
        if (grads) {
            kernels::linear_backward_params(da.data.data(), layer_in.data.data(),
                                            grads->weights[k].data.data(),
                                            grads->biases[k].data.data(), n, in, out);
        }
        if (k == 0 && !in_grad) break;
        Tensor dh{n, in};
        kernels::linear_backward_input(da.data.data(), w.weights[k].data.data(), dh.data.data(), n,
                                       in, out);
        if (k == 0) {
            *in_grad = std::move(dh);
            break;
        }
        Tensor next{n, in};
        kernels::leaky_relu_grad(trace.pre[k - 1].data.data(), dh.data.data(), next.data.data(),
                                 dh.size(), spec.leaky_slope);
        da = std::move(next);
    }
}

GradResult param_grads(const NetworkWeights& w, const MlpSpec& spec, const LossFn& loss_fn,
                       const Tensor& batch) {
    ForwardTrace trace;
    Tensor out = forward(w, spec, batch, &trace);
    for (std::size_t k = 0; k < trace.pre.size(); ++k)
        if (!trace.pre[k].all_finite())
            throw NumericError("param_grads: non-finite activation at layer " + std::to_string(k));
    auto [loss, dout] = loss_fn(out);
    if (!std::isfinite(loss)) throw NumericError("param_grads: non-finite loss value");

    GradResult res;
    res.loss = loss;
    res.grads = NetworkWeights::zeros(spec);
    backprop(w, spec, trace, dout, &res.grads, nullptr);
    return res;
}

Tensor input_grad(const NetworkWeights& w, const MlpSpec& spec, const Tensor& x) {
    if (spec.output_dim() != 1)
        throw ContractError("input_grad: network output must be scalar, got dim " +
                            std::to_string(spec.output_dim()));
    ForwardTrace trace;
    forward(w, spec, x, &trace);
    Tensor ones{x.rows(), 1};
    std::fill(ones.data.begin(), ones.data.end(), 1.0);
    Tensor g;
    backprop(w, spec, trace, ones, nullptr, &g);
    return g;
}

PenaltyResult gradient_penalty(const NetworkWeights& w, const MlpSpec& spec, const Tensor& x_real,
                               const Tensor& x_fake, const std::vector<double>& eps) {
    if (spec.output_dim() != 1) throw ContractError("gradient_penalty: network output must be scalar");
    if (x_real.shape != x_fake.shape)
        throw ContractError("gradient_penalty: real/fake batches must share a shape");
    const std::size_t n = x_real.rows();
    const std::size_t dim = x_real.cols();
    if (eps.size() != n) throw ContractError("gradient_penalty: need one eps per sample");
    for (double e : eps)
        if (!(e >= 0.0 && e <= 1.0)) throw ContractError("gradient_penalty: eps must be in [0,1]");

    Tensor x_hat{n, dim};
    for (std::size_t s = 0; s < n; ++s)
        for (std::size_t j = 0; j < dim; ++j)
            x_hat.at(s, j) = eps[s] * x_real.at(s, j) + (1.0 - eps[s]) * x_fake.at(s, j);

    const std::size_t layers = spec.n_layers();
    ForwardTrace trace;
    forward(w, spec, x_hat, &trace);

    // Input-gradient pass, keeping every intermediate. u[k] holds the
    // gradient w.r.t. the pre-activation of layer k (batch x dims[k+1]).
    std::vector<Tensor> u(layers);
    u[layers - 1] = Tensor{n, 1};
    std::fill(u[layers - 1].data.begin(), u[layers - 1].data.end(), 1.0);
    std::vector<Tensor> q(layers);  // q[k]: gradient w.r.t. the input of layer k
    for (std::size_t k = layers; k-- > 0;) {
        const std::size_t in = spec.layer_dims[k];
        const std::size_t out = spec.layer_dims[k + 1];
        q[k] = Tensor{n, in};
        kernels::linear_backward_input(u[k].data.data(), w.weights[k].data.data(),
                                       q[k].data.data(), n, in, out);
        if (k > 0) {
            u[k - 1] = Tensor{n, spec.layer_dims[k]};
            kernels::leaky_relu_grad(trace.pre[k - 1].data.data(), q[k].data.data(),
                                     u[k - 1].data.data(), q[k].size(), spec.leaky_slope);
        }
    }
    const Tensor& g = q[0];  // per-sample input gradients

    PenaltyResult res;
    res.grads = NetworkWeights::zeros(spec);
    Tensor g_bar{n, dim};  // d(mean penalty)/dg
    double total = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
        double norm2 = 0.0;
        for (std::size_t j = 0; j < dim; ++j) norm2 += g.at(s, j) * g.at(s, j);
        const double norm = std::sqrt(norm2);
        const double diff = norm - 1.0;
        total += diff * diff;
        if (norm == 0.0) {
            ++res.zero_grad_samples;  // penalty contributes exactly 1 here
            continue;
        }
        const double coeff = 2.0 * diff / (norm * static_cast<double>(n));
        for (std::size_t j = 0; j < dim; ++j) g_bar.at(s, j) = coeff * g.at(s, j);
    }
    res.value = total / static_cast<double>(n);

    // Adjoint sweep back up the chain. Masks are constants, so the only
    // parameter dependence is the weight matrices; biases stay at zero.
    Tensor q_bar = g_bar;
    for (std::size_t k = 0; k < layers; ++k) {
        const std::size_t in = spec.layer_dims[k];
        const std::size_t out = spec.layer_dims[k + 1];
        kernels::linear_backward_params(u[k].data.data(), q_bar.data.data(),
                                        res.grads.weights[k].data.data(), nullptr, n, in, out);
        if (k + 1 == layers) break;
        Tensor u_bar{n, out};
        kernels::linear_forward(q_bar.data.data(), w.weights[k].data.data(), nullptr,
                                u_bar.data.data(), n, in, out);
        Tensor next{n, out};
        kernels::leaky_relu_grad(trace.pre[k].data.data(), u_bar.data.data(), next.data.data(),
                                 u_bar.size(), spec.leaky_slope);
        q_bar = std::move(next);
    }
    return res;
}

AdamState AdamState::create(const MlpSpec& spec, LrSchedule lr, double beta1, double beta2) {
    AdamState st;
    st.lr = lr;
    st.beta1 = beta1;
    st.beta2 = beta2;
    st.m = NetworkWeights::zeros(spec);
    st.v = NetworkWeights::zeros(spec);
    return st;
}

namespace {

void adam_update_tensor(Tensor& p, Tensor& m, Tensor& v, const Tensor& g, double lr, double b1,
                        double b2, double eps, double bc1, double bc2) {
    for (std::size_t j = 0; j < p.size(); ++j) {
        m.data[j] = b1 * m.data[j] + (1.0 - b1) * g.data[j];
        v.data[j] = b2 * v.data[j] + (1.0 - b2) * g.data[j] * g.data[j];
        const double m_hat = m.data[j] / bc1;
        const double v_hat = v.data[j] / bc2;
        p.data[j] -= lr * m_hat / (std::sqrt(v_hat) + eps);
    }
}

}  // namespace

void adam_step(AdamState& state, NetworkWeights& w, const NetworkWeights& grads) {
    if (!grads.all_finite()) throw NumericError("adam_step: non-finite gradients");
    if (w.weights.size() != grads.weights.size() || w.weights.size() != state.m.weights.size())
        throw ContractError("adam_step: parameter/moment layer mismatch");
    state.step += 1;
    const double lr = state.lr.at(state.step);
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (std::size_t k = 0; k < w.weights.size(); ++k) {
        adam_update_tensor(w.weights[k], state.m.weights[k], state.v.weights[k], grads.weights[k],
                           lr, state.beta1, state.beta2, state.eps, bc1, bc2);
        adam_update_tensor(w.biases[k], state.m.biases[k], state.v.biases[k], grads.biases[k], lr,
                           state.beta1, state.beta2, state.eps, bc1, bc2);
    }
}

NetworkWeights average_weights(const std::vector<std::pair<const NetworkWeights*, double>>& items) {
    if (items.empty()) throw ContractError("average_weights: no items");
    double total = 0.0;
    for (const auto& [w, c] : items) {
        if (c < 0.0) throw ContractError("average_weights: coefficients must be >= 0");
        total += c;
    }
    if (total <= 0.0) throw ContractError("average_weights: coefficients sum to zero");

    const NetworkWeights& first = *items.front().first;
    NetworkWeights acc = first;
    acc.fill(0.0);
    for (const auto& [w, c] : items) {
        if (w->weights.size() != first.weights.size())
            throw ContractError("average_weights: mismatched layer counts");
        for (std::size_t k = 0; k < first.weights.size(); ++k)
            if (w->weights[k].shape != first.weights[k].shape ||
                w->biases[k].shape != first.biases[k].shape)
                throw ContractError("average_weights: mismatched shapes at layer " +
                                    std::to_string(k));
        acc.axpy(c, *w);
    }
    for (Tensor& t : acc.weights)
        for (double& v : t.data) v /= total;
    for (Tensor& t : acc.biases)
        for (double& v : t.data) v /= total;
    return acc;
}

}  // namespace histad::nn
