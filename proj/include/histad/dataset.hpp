#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "histad/gan.hpp"
#include "histad/rng.hpp"
#include "histad/tensor.hpp"

namespace histad::data {

struct MixtureComponent {
    double weight = 1.0;
    std::vector<double> mean;
    std::vector<double> std;  // per-dimension; 0 gives a point mass

    bool operator==(const MixtureComponent&) const = default;
};

struct MixtureSpec {
    std::size_t dim = 1;
    std::vector<MixtureComponent> components;

    void validate() const;  // weights >= 0 summing to 1, dims consistent
    Tensor sample(std::size_t n, RandomStream& rng) const;

    static MixtureSpec gaussian(std::vector<double> mean, std::vector<double> std);

    bool operator==(const MixtureSpec&) const = default;
};

// A finite sample set with a disjoint train/test split and a deterministic
// train-batch iterator (rows drawn i.i.d. from the train split).
class DatasetHandle final : public gan::BatchSource {
public:
    DatasetHandle(Tensor samples, std::vector<int> labels, double test_fraction,
                  std::uint64_t seed);

    std::size_t dim() const override { return train_.cols(); }
    Tensor next_batch(std::size_t n) override;

    const Tensor& train() const { return train_; }
    const Tensor& test() const { return test_; }
    const std::vector<int>& train_labels() const { return train_labels_; }
    const std::vector<int>& test_labels() const { return test_labels_; }

private:
    Tensor train_, test_;
    std::vector<int> train_labels_, test_labels_;
    RandomStream batch_rng_;
};

DatasetHandle synth_dataset(const MixtureSpec& spec, std::size_t sample_count,
                            double test_fraction, std::uint64_t seed);

struct IdxData {
    Tensor x;                 // flattened, scaled to [-1, 1]
    std::vector<int> labels;  // one per row
};

// Raw IDX pair (big-endian headers, unsigned-byte payload). Pixel v maps to
// v / 127.5 - 1.
IdxData read_idx(const std::string& images_path, const std::string& labels_path);

// IDX pair restricted to `keep_labels` (empty keeps everything).
DatasetHandle load_idx(const std::string& images_path, const std::string& labels_path,
                       const std::vector<int>& keep_labels, double test_fraction,
                       std::uint64_t seed);

}  // namespace histad::data
