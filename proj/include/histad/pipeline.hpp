#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "histad/config.hpp"
#include "histad/dataset.hpp"
#include "histad/detector.hpp"
#include "histad/gan.hpp"
#include "histad/metrics.hpp"

namespace histad::pipe {

struct Artifacts {
    std::string config_path;
    std::string store_path;
    std::string detector_path;
    std::string scores_path;
    std::string histograms_path;
    std::string metrics_path;
    double auprc = 0.0;
};

std::unique_ptr<data::DatasetHandle> make_dataset(const cfg::DataSpec& spec, std::uint64_t seed);

// Stage entry points shared by run_pipeline and the CLI subcommands.
gan::CheckpointStore train_gan_stage(const cfg::ExperimentConfig& config);
dtv::Detector train_detector_stage(const cfg::ExperimentConfig& config,
                                   const gan::CheckpointStore& store);

struct EvalResult {
    std::vector<double> scores;  // normal test rows first, then anomalies
    std::vector<int> labels;     // 1 = anomalous
    double auprc = 0.0;
    metrics::Histogram normal_hist;
    metrics::Histogram anomalous_hist;
    std::vector<double> noise_means;  // one per config sigma
    std::vector<std::pair<double, double>> interpolation;
    std::string metrics_json;  // full summary document
};

EvalResult evaluate(const cfg::ExperimentConfig& config, const gan::CheckpointStore& store,
                    const dtv::Detector& det);

// The 1D reproduction setup: N(0,1) data, offset-initialized generator,
// n_epochs=5, 50 saves/epoch, alpha=1, beta=3, lambda=10. Shared by the CLI
// `toy` subcommand and the acceptance suite.
cfg::ExperimentConfig toy_config();

// train_wgan -> history -> train_dtv -> score/eval, all artifacts written
// under config.out_dir.
Artifacts run_pipeline(const cfg::ExperimentConfig& config);

// Full pipeline per saves-per-epoch frequency (shared seed), no artifacts.
std::vector<std::pair<std::size_t, double>> checkpoint_frequency_ablation(
    const cfg::ExperimentConfig& base_config, const std::vector<std::size_t>& frequencies);

void write_scores_csv(const std::vector<double>& scores, const std::vector<int>& labels,
                      const std::string& path);
void write_histograms_csv(const metrics::Histogram& normal, const metrics::Histogram& anomalous,
                          const std::string& path);

}  // namespace histad::pipe
