#include "histad/gan.hpp"

#include <cmath>
#include <string>

#include "histad/errors.hpp"

namespace histad::gan {

nn::MlpSpec GanConfig::generator_spec() const {
    return nn::MlpSpec::make(latent_dim, g_hidden, data_dim, leaky_slope);
}

nn::MlpSpec GanConfig::discriminator_spec() const {
    return nn::MlpSpec::make(data_dim, d_hidden, 1, leaky_slope);
}

void GanConfig::validate() const {
    if (data_dim < 1 || latent_dim < 1 || batch_size < 1 || batches_per_epoch < 1 || n_epochs < 1)
        throw ContractError("GanConfig: all sizes must be >= 1");
    if (n_critic < 1) throw ContractError("GanConfig: n_critic must be >= 1");
    if (saves_per_epoch < 1) throw ContractError("GanConfig: saves_per_epoch must be >= 1");
    if (!(latent_std > 0.0)) throw ContractError("GanConfig: latent_std must be positive");
    if (!(gp_coefficient > 0.0)) throw ContractError("GanConfig: gp_coefficient must be positive");
    if (!(learning_rate > 0.0)) throw ContractError("GanConfig: learning_rate must be positive");
    generator_spec().validate();
    discriminator_spec().validate();
}

void CheckpointStore::validate() const {
    config.validate();
    double prev = -1.0;
    for (const Checkpoint& c : checkpoints) {
        if (!(c.t > prev))
            throw ContractError("CheckpointStore: t values must strictly increase (index " +
                                std::to_string(c.index) + ")");
        if (c.t < 0.0 || c.t > static_cast<double>(config.n_epochs))
            throw ContractError("CheckpointStore: t out of [0, n_epochs]");
        if (!c.generator.all_finite() || !c.discriminator.all_finite())
            throw ContractError("CheckpointStore: non-finite weights at index " +
                                std::to_string(c.index));
        prev = c.t;
    }
}

namespace {

double mean_of(const Tensor& t) {
    double acc = 0.0;
    for (double v : t.data) acc += v;
    return acc / static_cast<double>(t.size());
}

Tensor sample_latent(RandomStream& rng, std::size_t n, std::size_t dim, double std) {
    Tensor z{n, dim};
    for (double& v : z.data) v = std * rng.normal();
    return z;
}

std::vector<double> sample_eps(RandomStream& rng, std::size_t n) {
    std::vector<double> eps(n);
    for (double& e : eps) e = rng.uniform();
    return eps;
}

}  // namespace

WganLosses wgan_losses(const nn::NetworkWeights& d_weights, const nn::MlpSpec& d_spec,
                       const nn::NetworkWeights& g_weights, const nn::MlpSpec& g_spec,
                       const Tensor& real_batch, const Tensor& z_batch, double gp_coefficient,
                       const std::vector<double>& eps) {
    const Tensor fake = nn::forward(g_weights, g_spec, z_batch);
    const Tensor d_fake = nn::forward(d_weights, d_spec, fake);
    const Tensor d_real = nn::forward(d_weights, d_spec, real_batch);
    const nn::PenaltyResult pen = nn::gradient_penalty(d_weights, d_spec, real_batch, fake, eps);

    WganLosses out;
    out.penalty = pen.value;
    const double fake_mean = mean_of(d_fake);
    const double real_mean = mean_of(d_real);
    out.critic_loss = fake_mean - real_mean + gp_coefficient * pen.value;
    out.generator_loss = -fake_mean;
    if (!std::isfinite(out.critic_loss))
        throw NumericError("wgan_losses: non-finite critic loss (fake mean " +
                           std::to_string(fake_mean) + ", real mean " + std::to_string(real_mean) +
                           ", penalty " + std::to_string(pen.value) + ")");
    if (!std::isfinite(out.generator_loss))
        throw NumericError("wgan_losses: non-finite generator loss");
    return out;
}

CheckpointStore train_wgan(const GanConfig& config, BatchSource& dataset) {
    config.validate();
    if (dataset.dim() != config.data_dim)
        throw ContractError("train_wgan: dataset dim " + std::to_string(dataset.dim()) +
                            " != config data_dim " + std::to_string(config.data_dim));

    const nn::MlpSpec g_spec = config.generator_spec();
    const nn::MlpSpec d_spec = config.discriminator_spec();

    RandomStream rng = RandomStream::derive(config.seed, 0x6761'6e00);
    nn::NetworkWeights g = nn::NetworkWeights::random_init(g_spec, rng);
    nn::NetworkWeights d = nn::NetworkWeights::random_init(d_spec, rng);
    for (double& b : g.biases.back().data) b += config.g_init_offset;

    // The two-sided penalty has symmetric optima at |grad D| = 1, so in low
    // dimensions a random initial slope can lock the critic into the mirrored
    // potential (the data term cannot push the slope through 0 once the
    // penalty has amplified it). Start the output layer at exactly zero: the
    // penalty is flat there and the first critic steps orient D from the data
    // term alone.
    std::fill(d.weights.back().data.begin(), d.weights.back().data.end(), 0.0);
    std::fill(d.biases.back().data.begin(), d.biases.back().data.end(), 0.0);

    const std::size_t total_gen_steps = config.n_epochs * config.batches_per_epoch;
    nn::AdamState g_opt = nn::AdamState::create(g_spec, {config.learning_rate, total_gen_steps});
    nn::AdamState d_opt =
        nn::AdamState::create(d_spec, {config.learning_rate, total_gen_steps * config.n_critic});

    CheckpointStore store;
    store.config = config;
    const auto snapshot = [&](double t) {
        store.checkpoints.push_back({t, store.checkpoints.size(), g, d});
    };
    snapshot(0.0);

    const std::size_t B = config.batch_size;
    const double inv_b = 1.0 / static_cast<double>(B);
    const std::size_t S = config.saves_per_epoch;
    const std::size_t bpe = config.batches_per_epoch;

    for (std::size_t epoch = 0; epoch < config.n_epochs; ++epoch) {
        std::size_t next_save = 1;
        for (std::size_t batch = 1; batch <= bpe; ++batch) {
            // Critic: minimize mean D(real) - mean D(fake) + gp * penalty, so
            // the trained D is negative on data and positive on generated
            // samples (the orientation the history averaging relies on).
            for (std::size_t c = 0; c < config.n_critic; ++c) {
                const Tensor real = dataset.next_batch(B);
                const Tensor z = sample_latent(rng, B, config.latent_dim, config.latent_std);
                const Tensor fake = nn::forward(g, g_spec, z);

                nn::GradResult d_grads = nn::param_grads(
                    d, d_spec,
                    [&](const Tensor& out) {
                        Tensor dout{out.rows(), 1};
                        std::fill(dout.data.begin(), dout.data.end(), inv_b);
                        return std::make_pair(mean_of(out), dout);
                    },
                    real);
                const double real_mean = d_grads.loss;

                nn::GradResult fake_side = nn::param_grads(
                    d, d_spec,
                    [&](const Tensor& out) {
                        Tensor dout{out.rows(), 1};
                        std::fill(dout.data.begin(), dout.data.end(), -inv_b);
                        return std::make_pair(mean_of(out), dout);
                    },
                    fake);
                d_grads.grads.axpy(1.0, fake_side.grads);

                const std::vector<double> eps = sample_eps(rng, B);
                nn::PenaltyResult pen = nn::gradient_penalty(d, d_spec, real, fake, eps);
                d_grads.grads.axpy(config.gp_coefficient, pen.grads);

                const double critic_objective =
                    real_mean - fake_side.loss + config.gp_coefficient * pen.value;
                if (!std::isfinite(critic_objective))
                    throw NumericError("train_wgan: critic loss diverged; last valid checkpoint " +
                                       std::to_string(store.checkpoints.size() - 1));
                nn::adam_step(d_opt, d, d_grads.grads);
            }

            // Generator: minimize mean D(G(z)).
            {
                const Tensor z = sample_latent(rng, B, config.latent_dim, config.latent_std);
                nn::ForwardTrace g_trace;
                const Tensor fake = nn::forward(g, g_spec, z, &g_trace);
                const Tensor d_grad_x = nn::input_grad(d, d_spec, fake);
                Tensor dout{B, config.data_dim};
                for (std::size_t j = 0; j < dout.size(); ++j)
                    dout.data[j] = d_grad_x.data[j] * inv_b;
                nn::NetworkWeights g_grads = nn::NetworkWeights::zeros(g_spec);
                nn::backprop(g, g_spec, g_trace, dout, &g_grads, nullptr);
                if (!g_grads.all_finite())
                    throw NumericError("train_wgan: generator loss diverged; last valid checkpoint " +
                                       std::to_string(store.checkpoints.size() - 1));
                nn::adam_step(g_opt, g, g_grads);
            }

            // Snapshots at evenly spaced batch counts: save k of S once
            // batch/bpe >= k/S. Multiple saves per batch are allowed when
            // saves_per_epoch exceeds batches_per_epoch.
            while (next_save <= S && batch * S >= next_save * bpe) {
                const double t = static_cast<double>(epoch * S + next_save) / static_cast<double>(S);
                snapshot(t);
                ++next_save;
            }
        }
    }
    store.validate();
    return store;
}

}  // namespace histad::gan
