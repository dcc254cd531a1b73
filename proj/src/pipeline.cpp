#include "histad/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "histad/errors.hpp"
#include "histad/history.hpp"
#include "histad/serialize.hpp"

namespace histad::pipe {

namespace {

using nlohmann::json;

std::string fmt(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Latent endpoints for the interpolation diagnostic: candidates scored
// through the final generator, preferring confidently-normal ones.
std::pair<std::vector<double>, std::vector<double>> pick_endpoints(
    const gan::CheckpointStore& store, const dtv::Detector& det, std::uint64_t seed) {
    const gan::GanConfig& g = store.config;
    const gan::Checkpoint& last = store.checkpoints.back();
    constexpr std::size_t kCandidates = 64;

    RandomStream rng = RandomStream::derive(seed, 0x696e'7470);
    Tensor z{kCandidates, g.latent_dim};
    for (double& v : z.data) v = g.latent_std * rng.normal();
    const Tensor x = nn::forward(last.generator, g.generator_spec(), z);
    const std::vector<double> s = dtv::score(det, x);

    std::vector<std::size_t> order(kCandidates);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return s[a] < s[b]; });
    // The two best-scoring candidates; below -0.5 when the toy training
    // succeeded, still well-defined when it did not.
    std::vector<double> z1(g.latent_dim), z2(g.latent_dim);
    for (std::size_t j = 0; j < g.latent_dim; ++j) {
        z1[j] = z.at(order[0], j);
        z2[j] = z.at(order[1], j);
    }
    return {z1, z2};
}

}  // namespace

std::unique_ptr<data::DatasetHandle> make_dataset(const cfg::DataSpec& spec, std::uint64_t seed) {
    if (spec.kind == cfg::DataSpec::Kind::synthetic)
        return std::make_unique<data::DatasetHandle>(
            data::synth_dataset(spec.mixture, spec.sample_count, spec.test_fraction, seed));
    return std::make_unique<data::DatasetHandle>(data::load_idx(
        spec.images_path, spec.labels_path, spec.keep_labels, spec.test_fraction, seed));
}

gan::CheckpointStore train_gan_stage(const cfg::ExperimentConfig& config) {
    const std::unique_ptr<data::DatasetHandle> dataset = make_dataset(config.dataset, config.seed);
    if (dataset->dim() != config.gan.data_dim)
        throw ConfigError("dataset dimension " + std::to_string(dataset->dim()) +
                          " does not match [gan] data_dim");
    return gan::train_wgan(config.gan, *dataset);
}

dtv::Detector train_detector_stage(const cfg::ExperimentConfig& config,
                                   const gan::CheckpointStore& store) {
    const std::unique_ptr<data::DatasetHandle> dataset = make_dataset(config.dataset, config.seed);
    const hist::HistoryDistribution history(store, config.history);
    dtv::DetectorConfig dcfg = config.detector;
    dcfg.input_dim = store.config.data_dim;
    return dtv::train_dtv(history, *dataset, dcfg);
}

EvalResult evaluate(const cfg::ExperimentConfig& config, const gan::CheckpointStore& store,
                    const dtv::Detector& det) {
    const std::unique_ptr<data::DatasetHandle> dataset = make_dataset(config.dataset, config.seed);
    const std::unique_ptr<data::DatasetHandle> anomaly =
        make_dataset(config.anomaly, RandomStream::mix(config.seed ^ 0x616e'6f6dull));

    const Tensor& normal = dataset->test().rows() > 0 ? dataset->test() : dataset->train();
    const Tensor& anomalous = anomaly->train();

    EvalResult r;
    const std::vector<double> s_normal = dtv::score(det, normal);
    const std::vector<double> s_anom = dtv::score(det, anomalous);
    r.scores = s_normal;
    r.scores.insert(r.scores.end(), s_anom.begin(), s_anom.end());
    r.labels.assign(s_normal.size(), 0);
    r.labels.insert(r.labels.end(), s_anom.size(), 1);
    r.auprc = metrics::auprc(r.scores, r.labels);
    r.normal_hist = metrics::score_histogram(s_normal, config.eval.n_bins);
    r.anomalous_hist = metrics::score_histogram(s_anom, config.eval.n_bins);

    RandomStream noise_rng = RandomStream::derive(config.seed, 0x6e6f'6973);
    r.noise_means = metrics::noise_sweep(det, normal, config.eval.noise_sigmas, noise_rng);

    const auto [z1, z2] = pick_endpoints(store, det, config.seed);
    r.interpolation = metrics::latent_interpolation(store.checkpoints.back(),
                                                    store.config.generator_spec(), det, z1, z2,
                                                    config.eval.interp_steps);

    const hist::HistoryDistribution history(store, config.history);
    RandomStream cov_rng = RandomStream::derive(config.seed, 0x636f'7665);
    const double coverage = history.support_coverage(normal, 0.5, 2048, cov_rng);

    json j;
    j["auprc"] = r.auprc;
    j["n_normal"] = s_normal.size();
    j["n_anomalous"] = s_anom.size();
    j["mean_score_normal"] = mean_of(s_normal);
    j["mean_score_anomalous"] = mean_of(s_anom);
    j["noise_sweep"] = {{"sigmas", config.eval.noise_sigmas}, {"mean_scores", r.noise_means}};
    double max_path = r.interpolation.front().second;
    std::vector<double> ts, ss;
    for (const auto& [t, sc] : r.interpolation) {
        ts.push_back(t);
        ss.push_back(sc);
        max_path = std::max(max_path, sc);
    }
    j["latent_interpolation"] = {{"t", ts},
                                 {"score", ss},
                                 {"max_score", max_path},
                                 {"endpoint_scores", {ss.front(), ss.back()}}};
    j["support_coverage"] = coverage;
    j["detector_loss_initial"] = det.loss_trace.front();
    j["detector_loss_final"] = det.loss_trace.back();
    j["eligible_checkpoints"] = history.eligible_count();
    r.metrics_json = j.dump(2) + "\n";
    return r;
}

void write_scores_csv(const std::vector<double>& scores, const std::vector<int>& labels,
                      const std::string& path) {
    if (scores.size() != labels.size())
        throw ContractError("write_scores_csv: scores/labels length mismatch");
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw FormatError("cannot write " + path);
    out << "sample_id,score,label\n";
    for (std::size_t i = 0; i < scores.size(); ++i)
        out << i << "," << fmt(scores[i]) << "," << labels[i] << "\n";
}

void write_histograms_csv(const metrics::Histogram& normal, const metrics::Histogram& anomalous,
                          const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw FormatError("cannot write " + path);
    out << "set,bin_lo,bin_hi,density\n";
    const auto emit = [&](const char* name, const metrics::Histogram& h) {
        for (std::size_t b = 0; b < h.density.size(); ++b)
            out << name << "," << fmt(h.edges[b]) << "," << fmt(h.edges[b + 1]) << ","
                << fmt(h.density[b]) << "\n";
    };
    emit("normal", normal);
    emit("anomalous", anomalous);
}

cfg::ExperimentConfig toy_config() {
    cfg::ExperimentConfig c;
    c.seed = 42;
    c.out_dir = "out/toy";

    c.dataset.kind = cfg::DataSpec::Kind::synthetic;
    c.dataset.mixture = data::MixtureSpec::gaussian({0.0}, {1.0});
    c.dataset.sample_count = 20000;
    c.dataset.test_fraction = 0.1;

    c.anomaly.kind = cfg::DataSpec::Kind::synthetic;
    c.anomaly.mixture = data::MixtureSpec::gaussian({6.0}, {1.0});  // data shifted by +6
    c.anomaly.sample_count = 2000;
    c.anomaly.test_fraction = 0.0;

    c.gan.data_dim = 1;
    c.gan.latent_dim = 2;
    c.gan.latent_std = 2.0;
    c.gan.n_epochs = 5;
    c.gan.batches_per_epoch = 200;
    c.gan.batch_size = 64;
    c.gan.n_critic = 5;
    c.gan.gp_coefficient = 10.0;
    c.gan.saves_per_epoch = 50;
    c.gan.g_hidden = {16, 16};
    c.gan.d_hidden = {16, 16};
    c.gan.leaky_slope = 0.2;
    c.gan.learning_rate = 2e-3;
    c.gan.g_init_offset = 5.0;

    c.history.alpha = 1.0;
    c.history.beta = 3.0;
    c.history.case2 = false;

    c.detector.input_dim = 1;
    c.detector.hidden = {16, 16};  // matches d_hidden, required by Eq.-14 init
    c.detector.leaky_slope = 0.2;
    c.detector.lambda = 10.0;
    c.detector.steps = 6000;
    c.detector.batch_size = 256;
    c.detector.learning_rate = 2e-3;
    c.detector.decay_lr = true;
    c.detector.init_mode = dtv::InitMode::weight_average;

    c.eval.n_bins = 40;
    c.eval.noise_sigmas = {0.0, 0.5, 1.0, 2.0, 4.0};
    c.eval.interp_steps = 25;

    c.set_seed(c.seed);
    c.validate();
    return c;
}

Artifacts run_pipeline(const cfg::ExperimentConfig& config) {
    config.validate();
    namespace fs = std::filesystem;
    fs::create_directories(config.out_dir);
    const auto path = [&](const char* name) { return (fs::path(config.out_dir) / name).string(); };

    Artifacts a;
    a.config_path = path("config.ini");
    cfg::save_config(config, a.config_path);

    const gan::CheckpointStore store = train_gan_stage(config);
    a.store_path = path("checkpoints.hadc");
    io::save_store(store, a.store_path);

    const dtv::Detector det = train_detector_stage(config, store);
    a.detector_path = path("detector.hadt");
    io::save_detector(det, a.detector_path);

    const EvalResult ev = evaluate(config, store, det);
    a.scores_path = path("scores.csv");
    write_scores_csv(ev.scores, ev.labels, a.scores_path);
    a.histograms_path = path("histograms.csv");
    write_histograms_csv(ev.normal_hist, ev.anomalous_hist, a.histograms_path);
    a.metrics_path = path("metrics.json");
    std::ofstream mj(a.metrics_path, std::ios::trunc);
    if (!mj) throw FormatError("cannot write " + a.metrics_path);
    mj << ev.metrics_json;
    mj.close();
    a.auprc = ev.auprc;
    return a;
}

std::vector<std::pair<std::size_t, double>> checkpoint_frequency_ablation(
    const cfg::ExperimentConfig& base_config, const std::vector<std::size_t>& frequencies) {
    if (frequencies.empty())
        throw ContractError("checkpoint_frequency_ablation: empty frequency list");
    std::vector<std::pair<std::size_t, double>> out;
    out.reserve(frequencies.size());
    for (std::size_t f : frequencies) {
        if (f < 1) throw ContractError("checkpoint_frequency_ablation: frequency must be >= 1");
        cfg::ExperimentConfig c = base_config;
        c.gan.saves_per_epoch = f;
        c.validate();
        const gan::CheckpointStore store = train_gan_stage(c);
        const dtv::Detector det = train_detector_stage(c, store);
        const EvalResult ev = evaluate(c, store, det);
        out.emplace_back(f, ev.auprc);
    }
    return out;
}

}  // namespace histad::pipe
