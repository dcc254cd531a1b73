#include "histad/detector.hpp"

#include <cmath>
#include <string>

#include "histad/errors.hpp"

namespace histad::dtv {

nn::MlpSpec DetectorConfig::spec() const {
    return nn::MlpSpec::make(input_dim, hidden, 1, leaky_slope);
}

void DetectorConfig::validate() const {
    if (input_dim < 1) throw ConfigError("detector: input_dim must be >= 1");
    if (!(lambda > 0.0)) throw ConfigError("detector: lambda must be positive");
    if (steps < 1) throw ConfigError("detector: steps must be >= 1");
    if (batch_size < 1) throw ConfigError("detector: batch_size must be >= 1");
    if (!(learning_rate > 0.0)) throw ConfigError("detector: learning_rate must be positive");
    spec().validate();
}

DtvLoss dtv_loss(const nn::NetworkWeights& w, const nn::MlpSpec& spec, const Tensor& real_batch,
                 const Tensor& hist_batch, double lambda, nn::NetworkWeights* grads) {
    if (real_batch.rows() == 0 || hist_batch.rows() == 0)
        throw ContractError("dtv_loss: batches must be non-empty");
    if (real_batch.cols() != hist_batch.cols())
        throw ContractError("dtv_loss: batch dimensions disagree");

    const std::size_t nr = real_batch.rows();
    const std::size_t nh = hist_batch.rows();
    const double pooled = static_cast<double>(nr + nh);

    nn::ForwardTrace tr_real, tr_hist;
    const Tensor y_real = nn::forward(w, spec, real_batch, grads ? &tr_real : nullptr);
    const Tensor y_hist = nn::forward(w, spec, hist_batch, grads ? &tr_hist : nullptr);

    DtvLoss out;
    Tensor dy_real{nr, 1}, dy_hist{nh, 1};
    for (std::size_t i = 0; i < nr; ++i) {
        const double v = y_real.at(i, 0);
        const double b = boundary_distance(v);
        out.data_term += v / static_cast<double>(nr);
        out.penalty += b * b / pooled;
        dy_real.at(i, 0) =
            1.0 / static_cast<double>(nr) + lambda * 2.0 * b * (v >= 0.0 ? 1.0 : -1.0) / pooled;
    }
    for (std::size_t j = 0; j < nh; ++j) {
        const double v = y_hist.at(j, 0);
        const double b = boundary_distance(v);
        out.hist_term += v / static_cast<double>(nh);
        out.penalty += b * b / pooled;
        dy_hist.at(j, 0) =
            -1.0 / static_cast<double>(nh) + lambda * 2.0 * b * (v >= 0.0 ? 1.0 : -1.0) / pooled;
    }
    out.value = out.data_term - out.hist_term + lambda * out.penalty;
    if (!std::isfinite(out.value)) throw NumericError("dtv_loss: non-finite loss");

    if (grads) {
        *grads = nn::NetworkWeights::zeros(spec);
        nn::backprop(w, spec, tr_real, dy_real, grads, nullptr);
        nn::backprop(w, spec, tr_hist, dy_hist, grads, nullptr);
    }
    return out;
}

Detector train_dtv(const DetectorConfig& config, const SampleFn& draw_real,
                   const SampleFn& draw_hist, const nn::NetworkWeights* init) {
    config.validate();
    const nn::MlpSpec spec = config.spec();

    Detector det;
    det.spec = spec;
    det.config = config;
    if (config.init_mode == InitMode::weight_average) {
        if (!init) throw ContractError("train_dtv: weight_average init requires initial weights");
        if (!init->shape_matches(spec))
            throw ContractError("train_dtv: initial weights do not match detector spec");
        det.weights = *init;
    } else {
        RandomStream wrng = RandomStream::derive(config.seed, 0x6474'7601);
        det.weights = nn::NetworkWeights::random_init(spec, wrng);
    }

    nn::LrSchedule sched{config.learning_rate, config.decay_lr ? config.steps : 0};
    nn::AdamState opt = nn::AdamState::create(spec, sched);

    det.loss_trace.reserve(config.steps);
    nn::NetworkWeights grads = nn::NetworkWeights::zeros(spec);
    for (std::size_t step = 0; step < config.steps; ++step) {
        const Tensor real = draw_real(config.batch_size);
        const Tensor hist = draw_hist(config.batch_size);
        const DtvLoss l = dtv_loss(det.weights, spec, real, hist, config.lambda, &grads);
        det.loss_trace.push_back(l.value);
        nn::adam_step(opt, det.weights, grads);
        if (!det.weights.all_finite())
            throw NumericError("train_dtv: weights diverged at step " + std::to_string(step));
    }
    return det;
}

Detector train_dtv(const hist::HistoryDistribution& history, gan::BatchSource& data,
                   const DetectorConfig& config) {
    if (data.dim() != config.input_dim)
        throw ContractError("train_dtv: dataset dimension does not match detector input_dim");
    if (history.store().config.data_dim != config.input_dim)
        throw ContractError("train_dtv: history dimension does not match detector input_dim");

    RandomStream hist_rng = RandomStream::derive(config.seed, 0x6474'7602);
    const SampleFn draw_real = [&](std::size_t n) { return data.next_batch(n); };
    const SampleFn draw_hist = [&](std::size_t n) { return history.sample(n, hist_rng); };

    if (config.init_mode == InitMode::weight_average) {
        const nn::NetworkWeights init = history.init_dtv();
        DetectorConfig cfg = config;
        // Eq. 14 reuses the discriminator architecture, so the detector spec
        // must follow the store, not the config's hidden sizes.
        cfg.hidden = history.store().config.d_hidden;
        cfg.leaky_slope = history.store().config.leaky_slope;
        return train_dtv(cfg, draw_real, draw_hist, &init);
    }
    return train_dtv(config, draw_real, draw_hist, nullptr);
}

std::vector<double> score(const Detector& det, const Tensor& batch) {
    require_matrix(batch, det.spec.layer_dims.front(), "score batch");
    const Tensor y = nn::forward(det.weights, det.spec, batch);
    std::vector<double> out(batch.rows());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = y.at(i, 0);
    return out;
}

LossEstimate estimate_loss(const nn::NetworkWeights& w, const nn::MlpSpec& spec,
                           const SampleFn& draw_real, const SampleFn& draw_hist, double lambda,
                           std::size_t n_samples) {
    if (n_samples < 2) throw ContractError("estimate_loss: need at least 2 samples");
    const Tensor xr = draw_real(n_samples);
    const Tensor xh = draw_hist(n_samples);
    const Tensor yr = nn::forward(w, spec, xr);
    const Tensor yh = nn::forward(w, spec, xh);

    // Per-sample terms A_i + B_i reproduce the equal-batch pooled loss:
    // each source carries half the penalty mass.
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t i = 0; i < n_samples; ++i) {
        const double br = boundary_distance(yr.at(i, 0));
        const double bh = boundary_distance(yh.at(i, 0));
        const double a = yr.at(i, 0) + 0.5 * lambda * br * br;
        const double b = -yh.at(i, 0) + 0.5 * lambda * bh * bh;
        sum += a + b;
        sum2 += (a + b) * (a + b);
    }
    const double n = static_cast<double>(n_samples);
    LossEstimate est;
    est.n = n_samples;
    est.mean = sum / n;
    const double var = std::max(0.0, (sum2 - sum * sum / n) / (n - 1.0));
    est.std_error = std::sqrt(var / n);
    return est;
}

}  // namespace histad::dtv
