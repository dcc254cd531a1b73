#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "histad/config.hpp"
#include "histad/errors.hpp"
#include "histad/history.hpp"
#include "histad/pipeline.hpp"
#include "histad/serialize.hpp"

namespace {

using namespace histad;

struct CommonOpts {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool config_required) {
    auto* copt = cmd->add_option("--config", o.config_path, "experiment config file");
    if (config_required) copt->required();
    cmd->add_option("--seed", o.seed, "seed override");
    cmd->add_option("--out", o.out, "output directory override");
}

cfg::ExperimentConfig resolve(const CommonOpts& o) {
    cfg::ExperimentConfig c =
        o.config_path.empty() ? pipe::toy_config() : cfg::parse_config(o.config_path);
    if (o.seed) c.set_seed(*o.seed);
    if (o.out) c.out_dir = *o.out;
    c.validate();
    return c;
}

std::string artifact(const cfg::ExperimentConfig& c, const char* name) {
    std::filesystem::create_directories(c.out_dir);
    return (std::filesystem::path(c.out_dir) / name).string();
}

int run(int argc, char** argv) {
    CLI::App app{"HistoryAD: anomaly detection from a WGAN-GP training history"};
    app.require_subcommand(1);

    CommonOpts train_gan_o, build_hist_o, train_det_o, score_o, eval_o, toy_o, ablate_o;
    std::string freq_list = "1,5,25,50";

    auto* cmd_train_gan =
        app.add_subcommand("train-gan", "train the WGAN-GP and write the checkpoint store");
    add_common(cmd_train_gan, train_gan_o, true);

    auto* cmd_build_hist = app.add_subcommand(
        "build-history", "history-distribution diagnostics from a checkpoint store");
    add_common(cmd_build_hist, build_hist_o, true);

    auto* cmd_train_det =
        app.add_subcommand("train-detector", "train the detector against the history");
    add_common(cmd_train_det, train_det_o, true);

    auto* cmd_score = app.add_subcommand("score", "score the config's datasets and write CSV");
    add_common(cmd_score, score_o, true);

    auto* cmd_eval = app.add_subcommand("eval", "full evaluation report for trained artifacts");
    add_common(cmd_eval, eval_o, true);

    auto* cmd_toy = app.add_subcommand("toy", "run the built-in 1D reproduction end to end");
    add_common(cmd_toy, toy_o, false);

    auto* cmd_ablate =
        app.add_subcommand("ablate-frequency", "AUPRC per checkpoint save frequency");
    add_common(cmd_ablate, ablate_o, true);
    cmd_ablate->add_option("--frequencies", freq_list, "comma-separated saves per epoch");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : static_cast<int>(ExitCode::config_error);
    }

    if (cmd_train_gan->parsed()) {
        const cfg::ExperimentConfig c = resolve(train_gan_o);
        const gan::CheckpointStore store = pipe::train_gan_stage(c);
        const std::string path = artifact(c, "checkpoints.hadc");
        io::save_store(store, path);
        std::cout << "checkpoints: " << store.checkpoints.size() << "\n"
                  << "wrote " << path << "\n";
        return 0;
    }
    if (cmd_build_hist->parsed()) {
        const cfg::ExperimentConfig c = resolve(build_hist_o);
        const gan::CheckpointStore store = io::load_store(artifact(c, "checkpoints.hadc"));
        const hist::HistoryDistribution history(store, c.history);
        RandomStream rng = RandomStream::derive(c.seed, 0x6869'7374);
        const Tensor sample = history.sample(10000, rng);
        double mean = 0.0, m2 = 0.0;
        for (double v : sample.data) mean += v;
        mean /= static_cast<double>(sample.size());
        for (double v : sample.data) m2 += (v - mean) * (v - mean);
        const auto dataset = pipe::make_dataset(c.dataset, c.seed);
        RandomStream cov_rng = RandomStream::derive(c.seed, 0x636f'7665);
        const double coverage = history.support_coverage(dataset->test().rows() > 0
                                                             ? dataset->test()
                                                             : dataset->train(),
                                                         0.1, 10000, cov_rng);
        std::cout << "eligible checkpoints: " << history.eligible_count() << "\n"
                  << "sample mean: " << mean << "\n"
                  << "sample std: " << std::sqrt(m2 / static_cast<double>(sample.size())) << "\n"
                  << "support coverage (r=0.1): " << coverage << "\n";
        return 0;
    }
    if (cmd_train_det->parsed()) {
        const cfg::ExperimentConfig c = resolve(train_det_o);
        const gan::CheckpointStore store = io::load_store(artifact(c, "checkpoints.hadc"));
        const dtv::Detector det = pipe::train_detector_stage(c, store);
        const std::string path = artifact(c, "detector.hadt");
        io::save_detector(det, path);
        std::cout << "initial loss: " << det.loss_trace.front() << "\n"
                  << "final loss: " << det.loss_trace.back() << "\n"
                  << "wrote " << path << "\n";
        return 0;
    }
    if (cmd_score->parsed() || cmd_eval->parsed()) {
        const cfg::ExperimentConfig c = resolve(cmd_score->parsed() ? score_o : eval_o);
        const gan::CheckpointStore store = io::load_store(artifact(c, "checkpoints.hadc"));
        const dtv::Detector det = io::load_detector(artifact(c, "detector.hadt"));
        const pipe::EvalResult ev = pipe::evaluate(c, store, det);
        pipe::write_scores_csv(ev.scores, ev.labels, artifact(c, "scores.csv"));
        if (cmd_eval->parsed()) {
            pipe::write_histograms_csv(ev.normal_hist, ev.anomalous_hist,
                                       artifact(c, "histograms.csv"));
            std::ofstream mj(artifact(c, "metrics.json"), std::ios::trunc);
            mj << ev.metrics_json;
        }
        std::cout << "auprc: " << ev.auprc << "\n";
        return 0;
    }
    if (cmd_toy->parsed()) {
        const cfg::ExperimentConfig c = resolve(toy_o);
        const pipe::Artifacts a = pipe::run_pipeline(c);
        std::cout << "auprc: " << a.auprc << "\n"
                  << "artifacts in " << c.out_dir << "\n";
        return 0;
    }
    if (cmd_ablate->parsed()) {
        const cfg::ExperimentConfig c = resolve(ablate_o);
        std::vector<std::size_t> freqs;
        std::stringstream ss(freq_list);
        std::string item;
        while (std::getline(ss, item, ',')) freqs.push_back(std::stoul(item));
        const auto results = pipe::checkpoint_frequency_ablation(c, freqs);
        std::ofstream csv(artifact(c, "ablation.csv"), std::ios::trunc);
        csv << "saves_per_epoch,auprc\n";
        std::cout << "saves_per_epoch,auprc\n";
        for (const auto& [f, a] : results) {
            csv << f << "," << a << "\n";
            std::cout << f << "," << a << "\n";
        }
        return 0;
    }
    return static_cast<int>(ExitCode::config_error);
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return static_cast<int>(ExitCode::config_error);
    } catch (const FormatError& e) {
        std::cerr << "format error: " << e.what() << "\n";
        return static_cast<int>(ExitCode::format_error);
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return static_cast<int>(ExitCode::numeric_error);
    } catch (const ContractError& e) {
        std::cerr << "contract error: " << e.what() << "\n";
        return static_cast<int>(ExitCode::contract_error);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(ExitCode::failure);
    }
}
