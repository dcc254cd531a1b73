#include "histad/serialize.hpp"

#include <bit>
#include <fstream>

#include "histad/errors.hpp"

namespace histad::io {

namespace {

constexpr std::uint16_t kStoreVersion = gan::CheckpointStore::kFormatVersion;
constexpr std::uint16_t kDetectorVersion = 1;

struct Writer {
    std::vector<std::uint8_t> out;

    void u8(std::uint8_t v) { out.push_back(v); }
    void u16(std::uint16_t v) {
        for (int i = 0; i < 2; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void magic(const char m[4]) {
        for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(m[i]));
    }
    void sizes(const std::vector<std::size_t>& v) {
        u64(v.size());
        for (std::size_t s : v) u64(s);
    }
    void doubles(const std::vector<double>& v) {
        u64(v.size());
        for (double d : v) f64(d);
    }
};

struct Reader {
    const std::vector<std::uint8_t>* bytes;
    std::size_t pos = 0;
    std::string what;

    void need(std::size_t n) const {
        if (pos + n > bytes->size())
            throw FormatError(what + ": truncated at offset " + std::to_string(pos));
    }
    std::uint8_t u8() {
        need(1);
        return (*bytes)[pos++];
    }
    std::uint16_t u16() {
        need(2);
        std::uint16_t v = 0;
        for (int i = 0; i < 2; ++i) v |= static_cast<std::uint16_t>((*bytes)[pos++]) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>((*bytes)[pos++]) << (8 * i);
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    void magic(const char m[4]) {
        need(4);
        for (int i = 0; i < 4; ++i)
            if ((*bytes)[pos + static_cast<std::size_t>(i)] != static_cast<std::uint8_t>(m[i]))
                throw FormatError(what + ": bad magic at offset 0");
        pos += 4;
    }
    std::size_t count() {
        const std::uint64_t n = u64();
        // Cheap sanity bound: no field can hold more doubles than bytes left.
        if (n > bytes->size())
            throw FormatError(what + ": implausible count at offset " + std::to_string(pos - 8));
        return static_cast<std::size_t>(n);
    }
    std::vector<std::size_t> sizes() {
        std::vector<std::size_t> v(count());
        for (std::size_t& s : v) s = static_cast<std::size_t>(u64());
        return v;
    }
    std::vector<double> doubles() {
        std::vector<double> v(count());
        for (double& d : v) d = f64();
        return v;
    }
    void done() const {
        if (pos != bytes->size())
            throw FormatError(what + ": trailing bytes at offset " + std::to_string(pos));
    }
};

void put_weights(Writer& w, const nn::NetworkWeights& net) {
    w.u64(net.weights.size());
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        w.sizes(net.weights[l].shape);
        w.doubles(net.weights[l].data);
        w.doubles(net.biases[l].data);
    }
}

nn::NetworkWeights get_weights(Reader& r) {
    nn::NetworkWeights net;
    const std::size_t layers = r.count();
    net.weights.resize(layers);
    net.biases.resize(layers);
    for (std::size_t l = 0; l < layers; ++l) {
        std::vector<std::size_t> shape = r.sizes();
        std::vector<double> data = r.doubles();
        if (shape.size() != 2 || Tensor::count(shape) != data.size())
            throw FormatError(r.what + ": layer shape mismatch at offset " +
                              std::to_string(r.pos));
        net.weights[l] = Tensor(std::move(shape), std::move(data));
        std::vector<double> bias = r.doubles();
        const std::size_t bias_len = bias.size();  // read before the move below
        net.biases[l] = Tensor({bias_len}, std::move(bias));
    }
    return net;
}

void put_gan_config(Writer& w, const gan::GanConfig& c) {
    w.u64(c.data_dim);
    w.u64(c.latent_dim);
    w.f64(c.latent_std);
    w.u64(c.n_epochs);
    w.u64(c.batches_per_epoch);
    w.u64(c.batch_size);
    w.u64(c.n_critic);
    w.f64(c.gp_coefficient);
    w.u64(c.saves_per_epoch);
    w.u64(c.seed);
    w.sizes(c.g_hidden);
    w.sizes(c.d_hidden);
    w.f64(c.leaky_slope);
    w.f64(c.learning_rate);
    w.f64(c.g_init_offset);
}

gan::GanConfig get_gan_config(Reader& r) {
    gan::GanConfig c;
    c.data_dim = static_cast<std::size_t>(r.u64());
    c.latent_dim = static_cast<std::size_t>(r.u64());
    c.latent_std = r.f64();
    c.n_epochs = static_cast<std::size_t>(r.u64());
    c.batches_per_epoch = static_cast<std::size_t>(r.u64());
    c.batch_size = static_cast<std::size_t>(r.u64());
    c.n_critic = static_cast<std::size_t>(r.u64());
    c.gp_coefficient = r.f64();
    c.saves_per_epoch = static_cast<std::size_t>(r.u64());
    c.seed = r.u64();
    c.g_hidden = r.sizes();
    c.d_hidden = r.sizes();
    c.leaky_slope = r.f64();
    c.learning_rate = r.f64();
    c.g_init_offset = r.f64();
    return c;
}

}  // namespace

std::vector<std::uint8_t> encode_store(const gan::CheckpointStore& store) {
    Writer w;
    w.magic("HADC");
    w.u16(kStoreVersion);
    put_gan_config(w, store.config);
    w.u64(store.checkpoints.size());
    for (const gan::Checkpoint& c : store.checkpoints) {
        w.f64(c.t);
        w.u64(c.index);
        put_weights(w, c.generator);
        put_weights(w, c.discriminator);
    }
    return std::move(w.out);
}

gan::CheckpointStore decode_store(const std::vector<std::uint8_t>& bytes) {
    Reader r{&bytes, 0, "checkpoint store"};
    r.magic("HADC");
    const std::uint16_t version = r.u16();
    if (version != kStoreVersion)
        throw FormatError("checkpoint store: unsupported version " + std::to_string(version));
    gan::CheckpointStore store;
    store.config = get_gan_config(r);
    store.checkpoints.resize(r.count());
    for (gan::Checkpoint& c : store.checkpoints) {
        c.t = r.f64();
        c.index = static_cast<std::size_t>(r.u64());
        c.generator = get_weights(r);
        c.discriminator = get_weights(r);
    }
    r.done();
    store.validate();
    return store;
}

std::vector<std::uint8_t> encode_detector(const dtv::Detector& det) {
    Writer w;
    w.magic("HADT");
    w.u16(kDetectorVersion);
    const dtv::DetectorConfig& c = det.config;
    w.u64(c.input_dim);
    w.sizes(c.hidden);
    w.f64(c.leaky_slope);
    w.f64(c.lambda);
    w.u64(c.steps);
    w.u64(c.batch_size);
    w.f64(c.learning_rate);
    w.u8(c.decay_lr ? 1 : 0);
    w.u8(c.init_mode == dtv::InitMode::weight_average ? 0 : 1);
    w.u64(c.seed);
    w.sizes(det.spec.layer_dims);
    w.f64(det.spec.leaky_slope);
    put_weights(w, det.weights);
    w.doubles(det.loss_trace);
    return std::move(w.out);
}

dtv::Detector decode_detector(const std::vector<std::uint8_t>& bytes) {
    Reader r{&bytes, 0, "detector"};
    r.magic("HADT");
    const std::uint16_t version = r.u16();
    if (version != kDetectorVersion)
        throw FormatError("detector: unsupported version " + std::to_string(version));
    dtv::Detector det;
    dtv::DetectorConfig& c = det.config;
    c.input_dim = static_cast<std::size_t>(r.u64());
    c.hidden = r.sizes();
    c.leaky_slope = r.f64();
    c.lambda = r.f64();
    c.steps = static_cast<std::size_t>(r.u64());
    c.batch_size = static_cast<std::size_t>(r.u64());
    c.learning_rate = r.f64();
    c.decay_lr = r.u8() != 0;
    c.init_mode = r.u8() == 0 ? dtv::InitMode::weight_average : dtv::InitMode::random;
    c.seed = r.u64();
    det.spec.layer_dims = r.sizes();
    det.spec.leaky_slope = r.f64();
    det.weights = get_weights(r);
    det.loss_trace = r.doubles();
    r.done();
    det.spec.validate();
    if (!det.weights.shape_matches(det.spec))
        throw FormatError("detector: weights do not match architecture");
    if (!det.weights.all_finite()) throw FormatError("detector: non-finite weights");
    return det;
}

std::vector<std::uint8_t> read_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::vector<std::uint8_t>& bytes, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FormatError("short write to " + path);
}

void save_store(const gan::CheckpointStore& store, const std::string& path) {
    write_bytes(encode_store(store), path);
}

gan::CheckpointStore load_store(const std::string& path) {
    return decode_store(read_bytes(path));
}

void save_detector(const dtv::Detector& det, const std::string& path) {
    write_bytes(encode_detector(det), path);
}

dtv::Detector load_detector(const std::string& path) {
    return decode_detector(read_bytes(path));
}

}  // namespace histad::io
