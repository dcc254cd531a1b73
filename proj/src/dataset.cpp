#include "histad/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "histad/errors.hpp"

namespace histad::data {

void MixtureSpec::validate() const {
    if (dim < 1) throw ConfigError("mixture: dim must be >= 1");
    if (components.empty()) throw ConfigError("mixture: needs at least one component");
    double total = 0.0;
    for (const MixtureComponent& c : components) {
        if (c.weight < 0.0) throw ConfigError("mixture: component weight must be >= 0");
        if (c.mean.size() != dim || c.std.size() != dim)
            throw ConfigError("mixture: component mean/std length must equal dim");
        for (double s : c.std)
            if (s < 0.0) throw ConfigError("mixture: component std must be >= 0");
        total += c.weight;
    }
    if (std::abs(total - 1.0) > 1e-9) throw ConfigError("mixture: weights must sum to 1");
}

Tensor MixtureSpec::sample(std::size_t n, RandomStream& rng) const {
    validate();
    Tensor out{n, dim};
    for (std::size_t i = 0; i < n; ++i) {
        // The selection uniform is drawn even for one component, so e.g.
        // weights (1, 0) consume the stream exactly like a single component.
        const double u = rng.uniform();
        std::size_t k = 0;
        double cum = 0.0;
        for (; k + 1 < components.size(); ++k) {
            cum += components[k].weight;
            if (u < cum) break;
        }
        const MixtureComponent& c = components[k];
        for (std::size_t j = 0; j < dim; ++j)
            out.at(i, j) = c.mean[j] + c.std[j] * rng.normal();
    }
    return out;
}

MixtureSpec MixtureSpec::gaussian(std::vector<double> mean, std::vector<double> std) {
    MixtureSpec s;
    s.dim = mean.size();
    s.components.push_back({1.0, std::move(mean), std::move(std)});
    return s;
}

DatasetHandle::DatasetHandle(Tensor samples, std::vector<int> labels, double test_fraction,
                             std::uint64_t seed)
    : batch_rng_(RandomStream::derive(seed, 0x6461'7461)) {
    const std::size_t n = samples.rows();
    if (n == 0) throw ContractError("dataset: empty sample set");
    if (labels.size() != n) throw ContractError("dataset: label count does not match samples");
    if (!(test_fraction >= 0.0 && test_fraction < 1.0))
        throw ConfigError("dataset: test_fraction must be in [0, 1)");

    RandomStream split_rng = RandomStream::derive(seed, 0x7370'6c69);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = n - 1; i > 0; --i) {  // Fisher-Yates
        const auto j = static_cast<std::size_t>(split_rng.uniform() * static_cast<double>(i + 1));
        std::swap(order[i], order[std::min(j, i)]);
    }

    const std::size_t n_test = static_cast<std::size_t>(std::floor(test_fraction * static_cast<double>(n)));
    const std::size_t n_train = n - n_test;
    const std::size_t d = samples.cols();
    train_ = Tensor{n_train, d};
    test_ = Tensor{n_test, d};
    train_labels_.resize(n_train);
    test_labels_.resize(n_test);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t src = order[i];
        if (i < n_train) {
            std::copy(samples.row(src), samples.row(src) + d, train_.row(i));
            train_labels_[i] = labels[src];
        } else {
            std::copy(samples.row(src), samples.row(src) + d, test_.row(i - n_train));
            test_labels_[i - n_train] = labels[src];
        }
    }
}

Tensor DatasetHandle::next_batch(std::size_t n) {
    if (n < 1) throw ContractError("dataset: batch size must be >= 1");
    const std::size_t rows = train_.rows();
    const std::size_t d = train_.cols();
    Tensor out{n, d};
    for (std::size_t i = 0; i < n; ++i) {
        auto r = static_cast<std::size_t>(batch_rng_.uniform() * static_cast<double>(rows));
        r = std::min(r, rows - 1);
        std::copy(train_.row(r), train_.row(r) + d, out.row(i));
    }
    return out;
}

DatasetHandle synth_dataset(const MixtureSpec& spec, std::size_t sample_count,
                            double test_fraction, std::uint64_t seed) {
    spec.validate();
    if (sample_count < 1) throw ConfigError("dataset: sample_count must be >= 1");
    RandomStream rng = RandomStream::derive(seed, 0x7379'6e74);
    Tensor samples = spec.sample(sample_count, rng);
    return DatasetHandle(std::move(samples), std::vector<int>(sample_count, 0), test_fraction,
                         seed);
}

namespace {

std::vector<unsigned char> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t be32(const std::vector<unsigned char>& b, std::size_t off, const std::string& path) {
    if (off + 4 > b.size())
        throw FormatError(path + ": truncated at offset " + std::to_string(off));
    return (std::uint32_t{b[off]} << 24) | (std::uint32_t{b[off + 1]} << 16) |
           (std::uint32_t{b[off + 2]} << 8) | std::uint32_t{b[off + 3]};
}

// IDX header: 0x00 0x00 <type> <ndim>, then ndim big-endian u32 sizes.
std::vector<std::size_t> idx_dims(const std::vector<unsigned char>& b, std::size_t want_ndim,
                                  const std::string& path) {
    const std::uint32_t magic = be32(b, 0, path);
    if ((magic >> 16) != 0 || ((magic >> 8) & 0xff) != 0x08)
        throw FormatError(path + ": bad IDX magic at offset 0");
    const std::size_t ndim = magic & 0xff;
    if (ndim != want_ndim)
        throw FormatError(path + ": expected " + std::to_string(want_ndim) + " dims, got " +
                          std::to_string(ndim));
    std::vector<std::size_t> dims(ndim);
    for (std::size_t i = 0; i < ndim; ++i) dims[i] = be32(b, 4 + 4 * i, path);
    return dims;
}

}  // namespace

IdxData read_idx(const std::string& images_path, const std::string& labels_path) {
    const std::vector<unsigned char> ib = read_file(images_path);
    const std::vector<unsigned char> lb = read_file(labels_path);
    const std::vector<std::size_t> idim = idx_dims(ib, 3, images_path);
    const std::vector<std::size_t> ldim = idx_dims(lb, 1, labels_path);

    const std::size_t n = idim[0];
    const std::size_t pixels = idim[1] * idim[2];
    if (n == 0) throw FormatError(images_path + ": empty image set");
    if (ldim[0] != n) throw FormatError(labels_path + ": label count does not match image count");
    const std::size_t img_off = 4 + 4 * 3;
    const std::size_t lbl_off = 4 + 4 * 1;
    if (ib.size() != img_off + n * pixels)
        throw FormatError(images_path + ": payload truncated at offset " +
                          std::to_string(ib.size()));
    if (lb.size() != lbl_off + n)
        throw FormatError(labels_path + ": payload truncated at offset " +
                          std::to_string(lb.size()));

    IdxData out;
    out.x = Tensor{n, pixels};
    out.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t p = 0; p < pixels; ++p)
            out.x.at(i, p) = static_cast<double>(ib[img_off + i * pixels + p]) / 127.5 - 1.0;
        out.labels[i] = lb[lbl_off + i];
    }
    return out;
}

DatasetHandle load_idx(const std::string& images_path, const std::string& labels_path,
                       const std::vector<int>& keep_labels, double test_fraction,
                       std::uint64_t seed) {
    IdxData raw = read_idx(images_path, labels_path);
    if (keep_labels.empty())
        return DatasetHandle(std::move(raw.x), std::move(raw.labels), test_fraction, seed);

    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < raw.labels.size(); ++i)
        if (std::find(keep_labels.begin(), keep_labels.end(), raw.labels[i]) != keep_labels.end())
            keep.push_back(i);
    if (keep.empty()) throw FormatError(images_path + ": label filter leaves no samples");

    const std::size_t d = raw.x.cols();
    Tensor x{keep.size(), d};
    std::vector<int> labels(keep.size());
    for (std::size_t i = 0; i < keep.size(); ++i) {
        std::copy(raw.x.row(keep[i]), raw.x.row(keep[i]) + d, x.row(i));
        labels[i] = raw.labels[keep[i]];
    }
    return DatasetHandle(std::move(x), std::move(labels), test_fraction, seed);
}

}  // namespace histad::data
