#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "histad/dataset.hpp"
#include "histad/detector.hpp"
#include "histad/gan.hpp"
#include "histad/history.hpp"

namespace histad::cfg {

struct DataSpec {
    enum class Kind { synthetic, image };

    Kind kind = Kind::synthetic;
    data::MixtureSpec mixture = data::MixtureSpec::gaussian({0.0}, {1.0});
    std::size_t sample_count = 20000;
    std::string images_path;
    std::string labels_path;
    std::vector<int> keep_labels;  // image kind; empty keeps all
    double test_fraction = 0.2;

    std::size_t dim() const;  // synthetic only; image dims are known at load
    void validate(const std::string& section) const;

    bool operator==(const DataSpec&) const = default;
};

struct EvalSpec {
    std::size_t n_bins = 40;
    std::vector<double> noise_sigmas{0.0, 0.5, 1.0, 2.0, 4.0};
    std::size_t interp_steps = 25;

    bool operator==(const EvalSpec&) const = default;
};

struct ExperimentConfig {
    std::uint64_t seed = 42;
    std::string out_dir = "out";
    DataSpec dataset;
    DataSpec anomaly;
    gan::GanConfig gan;
    hist::HistoryParams history;
    dtv::DetectorConfig detector;
    EvalSpec eval;

    void set_seed(std::uint64_t s);  // also re-seeds the gan/detector configs
    void validate() const;

    bool operator==(const ExperimentConfig&) const = default;
};

ExperimentConfig parse_config(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text, const std::string& origin);
std::string serialize_config(const ExperimentConfig& config);
void save_config(const ExperimentConfig& config, const std::string& path);

}  // namespace histad::cfg
