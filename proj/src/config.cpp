#include "histad/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "histad/errors.hpp"

namespace histad::cfg {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

struct Entry {
    std::string value;
    bool used = false;
};

// section -> key -> value; top-level keys live under section "".
using IniMap = std::map<std::string, std::map<std::string, Entry>>;

IniMap parse_ini(const std::string& text, const std::string& origin) {
    IniMap out;
    std::string section;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
        line = trim(line);
        if (line.empty()) continue;
        const std::string where = origin + ":" + std::to_string(lineno);
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(where + ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty()) throw ConfigError(where + ": empty section name");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError(where + ": empty key");
        if (!out[section].emplace(key, Entry{value}).second)
            throw ConfigError(where + ": duplicate key '" + key + "'");
    }
    return out;
}

class Section {
public:
    Section(IniMap& ini, std::string name) : name_(std::move(name)) {
        if (auto it = ini.find(name_); it != ini.end()) entries_ = &it->second;
    }

    std::string label() const { return name_.empty() ? "top level" : "[" + name_ + "]"; }

    const std::string* lookup(const std::string& key) const {
        if (!entries_) return nullptr;
        auto it = entries_->find(key);
        if (it == entries_->end()) return nullptr;
        it->second.used = true;
        return &it->second.value;
    }

    std::string str(const std::string& key, const std::string& def) const {
        const std::string* v = lookup(key);
        return v ? *v : def;
    }

    double num(const std::string& key, double def) const {
        const std::string* v = lookup(key);
        return v ? parse_num(key, *v) : def;
    }

    std::size_t uint(const std::string& key, std::size_t def) const {
        const std::string* v = lookup(key);
        return v ? parse_uint(key, *v) : def;
    }

    std::uint64_t uint64(const std::string& key, std::uint64_t def) const {
        const std::string* v = lookup(key);
        return v ? parse_uint(key, *v) : def;
    }

    bool flag(const std::string& key, bool def) const {
        const std::string* v = lookup(key);
        if (!v) return def;
        if (*v == "true" || *v == "1") return true;
        if (*v == "false" || *v == "0") return false;
        throw ConfigError(bad(key, "must be true or false"));
    }

    std::vector<double> num_list(const std::string& key, std::vector<double> def) const {
        const std::string* v = lookup(key);
        if (!v) return def;
        std::vector<double> out;
        for (const std::string& item : split(*v)) out.push_back(parse_num(key, item));
        return out;
    }

    std::vector<std::size_t> uint_list(const std::string& key,
                                       std::vector<std::size_t> def) const {
        const std::string* v = lookup(key);
        if (!v) return def;
        std::vector<std::size_t> out;
        for (const std::string& item : split(*v))
            out.push_back(static_cast<std::size_t>(parse_uint(key, item)));
        return out;
    }

    std::vector<int> int_list(const std::string& key, std::vector<int> def) const {
        const std::string* v = lookup(key);
        if (!v) return def;
        std::vector<int> out;
        for (const std::string& item : split(*v))
            out.push_back(static_cast<int>(parse_uint(key, item)));
        return out;
    }

private:
    std::string bad(const std::string& key, const std::string& what) const {
        return label() + " key '" + key + "' " + what;
    }

    static std::vector<std::string> split(const std::string& value) {
        std::vector<std::string> out;
        std::string item;
        std::istringstream in(value);
        while (std::getline(in, item, ',')) out.push_back(trim(item));
        if (out.size() == 1 && out[0].empty()) out.clear();
        return out;
    }

    double parse_num(const std::string& key, const std::string& value) const {
        double d = 0.0;
        const char* b = value.data();
        const char* e = b + value.size();
        auto [p, ec] = std::from_chars(b, e, d);
        if (ec != std::errc{} || p != e) throw ConfigError(bad(key, "is not a number"));
        return d;
    }

    std::uint64_t parse_uint(const std::string& key, const std::string& value) const {
        std::uint64_t u = 0;
        const char* b = value.data();
        const char* e = b + value.size();
        auto [p, ec] = std::from_chars(b, e, u);
        if (ec != std::errc{} || p != e)
            throw ConfigError(bad(key, "is not a non-negative integer"));
        return u;
    }

    std::string name_;
    std::map<std::string, Entry>* entries_ = nullptr;
};

DataSpec parse_data_spec(IniMap& ini, const std::string& name, const DataSpec& defaults) {
    Section s(ini, name);
    DataSpec out = defaults;
    const std::string kind = s.str("kind", out.kind == DataSpec::Kind::image ? "image" : "synthetic");
    if (kind == "synthetic")
        out.kind = DataSpec::Kind::synthetic;
    else if (kind == "image")
        out.kind = DataSpec::Kind::image;
    else
        throw ConfigError("[" + name + "] key 'kind' must be synthetic or image");

    const std::size_t dim = s.uint("dim", out.mixture.dim);
    const std::size_t k = s.uint("components", out.mixture.components.size());
    if (dim != out.mixture.dim || k != out.mixture.components.size()) {
        out.mixture.dim = dim;
        out.mixture.components.assign(
            k, {k ? 1.0 / static_cast<double>(k) : 1.0, std::vector<double>(dim, 0.0),
                std::vector<double>(dim, 1.0)});
    }
    for (std::size_t c = 0; c < out.mixture.components.size(); ++c) {
        const std::string suffix = "_" + std::to_string(c);
        data::MixtureComponent& comp = out.mixture.components[c];
        comp.weight = s.num("weight" + suffix, comp.weight);
        comp.mean = s.num_list("mean" + suffix, comp.mean);
        comp.std = s.num_list("std" + suffix, comp.std);
    }

    out.sample_count = s.uint("sample_count", out.sample_count);
    out.test_fraction = s.num("test_fraction", out.test_fraction);
    out.images_path = s.str("images", out.images_path);
    out.labels_path = s.str("labels", out.labels_path);
    out.keep_labels = s.int_list("keep_labels", out.keep_labels);
    return out;
}

}  // namespace

std::size_t DataSpec::dim() const {
    if (kind != Kind::synthetic)
        throw ContractError("DataSpec::dim: image dimensions are known only after load");
    return mixture.dim;
}

void DataSpec::validate(const std::string& section) const {
    if (kind == Kind::synthetic) {
        try {
            mixture.validate();
        } catch (const ConfigError& e) {
            throw ConfigError("[" + section + "] " + e.what());
        }
        if (sample_count < 1) throw ConfigError("[" + section + "] sample_count must be >= 1");
    } else {
        if (images_path.empty() || labels_path.empty())
            throw ConfigError("[" + section + "] image dataset needs images and labels paths");
    }
    if (!(test_fraction >= 0.0 && test_fraction < 1.0))
        throw ConfigError("[" + section + "] test_fraction must be in [0, 1)");
}

void ExperimentConfig::set_seed(std::uint64_t s) {
    seed = s;
    gan.seed = s;
    detector.seed = s;
}

void ExperimentConfig::validate() const {
    dataset.validate("dataset");
    anomaly.validate("anomaly");
    gan.validate();
    detector.validate();
    if (!(history.alpha >= 0.0 && history.alpha < static_cast<double>(gan.n_epochs)))
        throw ConfigError("[history] alpha must satisfy 0 <= alpha < gan n_epochs");
    if (history.beta < 0.0) throw ConfigError("[history] beta must be >= 0");
    if (history.case2 && !(history.wide_factor > 1.0))
        throw ConfigError("[history] wide_factor must exceed 1 when case2 is set");
    if (dataset.kind == DataSpec::Kind::synthetic && dataset.dim() != gan.data_dim)
        throw ConfigError("[dataset] dim must match [gan] data_dim");
    if (anomaly.kind == DataSpec::Kind::synthetic &&
        dataset.kind == DataSpec::Kind::synthetic && anomaly.dim() != dataset.dim())
        throw ConfigError("[anomaly] dim must match [dataset] dim");
    if (detector.input_dim != gan.data_dim)
        throw ConfigError("[detector] input dimension must match [gan] data_dim");
    if (eval.n_bins < 1) throw ConfigError("[eval] n_bins must be >= 1");
    if (eval.interp_steps < 2) throw ConfigError("[eval] interp_steps must be >= 2");
}

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin) {
    IniMap ini = parse_ini(text, origin);
    for (const auto& [section, _] : ini) {
        static const char* known[] = {"", "dataset", "anomaly", "gan", "history", "detector",
                                      "eval"};
        if (std::find(std::begin(known), std::end(known), section) == std::end(known))
            throw ConfigError(origin + ": unknown section [" + section + "]");
    }

    ExperimentConfig out;
    {
        Section top(ini, "");
        out.seed = top.uint64("seed", out.seed);
        out.out_dir = top.str("out_dir", out.out_dir);
    }
    out.dataset = parse_data_spec(ini, "dataset", out.dataset);
    {
        DataSpec anomaly_defaults;
        anomaly_defaults.sample_count = 2000;
        anomaly_defaults.test_fraction = 0.0;
        anomaly_defaults.mixture = data::MixtureSpec::gaussian({6.0}, {1.0});
        out.anomaly = parse_data_spec(ini, "anomaly", anomaly_defaults);
    }
    {
        Section s(ini, "gan");
        gan::GanConfig& g = out.gan;
        g.data_dim = s.uint("data_dim", g.data_dim);
        g.latent_dim = s.uint("latent_dim", g.latent_dim);
        g.latent_std = s.num("latent_std", g.latent_std);
        g.n_epochs = s.uint("n_epochs", g.n_epochs);
        g.batches_per_epoch = s.uint("batches_per_epoch", g.batches_per_epoch);
        g.batch_size = s.uint("batch_size", g.batch_size);
        g.n_critic = s.uint("n_critic", g.n_critic);
        g.gp_coefficient = s.num("gp_coefficient", g.gp_coefficient);
        g.saves_per_epoch = s.uint("saves_per_epoch", g.saves_per_epoch);
        g.g_hidden = s.uint_list("g_hidden", g.g_hidden);
        g.d_hidden = s.uint_list("d_hidden", g.d_hidden);
        g.leaky_slope = s.num("leaky_slope", g.leaky_slope);
        g.learning_rate = s.num("learning_rate", g.learning_rate);
        g.g_init_offset = s.num("g_init_offset", g.g_init_offset);
    }
    {
        Section s(ini, "history");
        out.history.alpha = s.num("alpha", out.history.alpha);
        out.history.beta = s.num("beta", out.history.beta);
        out.history.case2 = s.flag("case2", out.history.case2);
        out.history.wide_factor = s.num("wide_factor", out.history.wide_factor);
    }
    {
        Section s(ini, "detector");
        dtv::DetectorConfig& d = out.detector;
        d.hidden = s.uint_list("hidden", d.hidden);
        d.leaky_slope = s.num("leaky_slope", d.leaky_slope);
        d.lambda = s.num("lambda", d.lambda);
        d.steps = s.uint("steps", d.steps);
        d.batch_size = s.uint("batch_size", d.batch_size);
        d.learning_rate = s.num("learning_rate", d.learning_rate);
        d.decay_lr = s.flag("decay_lr", d.decay_lr);
        const std::string mode = s.str(
            "init_mode", d.init_mode == dtv::InitMode::random ? "random" : "weight_average");
        if (mode == "weight_average")
            d.init_mode = dtv::InitMode::weight_average;
        else if (mode == "random")
            d.init_mode = dtv::InitMode::random;
        else
            throw ConfigError("[detector] key 'init_mode' must be weight_average or random");
    }
    {
        Section s(ini, "eval");
        out.eval.n_bins = s.uint("n_bins", out.eval.n_bins);
        out.eval.noise_sigmas = s.num_list("noise_sigmas", out.eval.noise_sigmas);
        out.eval.interp_steps = s.uint("interp_steps", out.eval.interp_steps);
    }

    for (const auto& [section, entries] : ini)
        for (const auto& [key, entry] : entries)
            if (!entry.used)
                throw ConfigError(origin + ": unknown key '" + key + "' in " +
                                  (section.empty() ? "top level" : "[" + section + "]"));

    out.detector.input_dim = out.gan.data_dim;
    out.set_seed(out.seed);
    out.validate();
    return out;
}

ExperimentConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path);
}

namespace {

std::string fmt(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);  // shortest round-trip form
}

std::string join_nums(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + fmt(v[i]);
    return out;
}

template <class T>
std::string join_ints(const std::vector<T>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
    return out;
}

void emit_data_spec(std::ostringstream& o, const std::string& name, const DataSpec& d) {
    o << "[" << name << "]\n";
    o << "kind = " << (d.kind == DataSpec::Kind::image ? "image" : "synthetic") << "\n";
    if (d.kind == DataSpec::Kind::synthetic) {
        o << "dim = " << d.mixture.dim << "\n";
        o << "components = " << d.mixture.components.size() << "\n";
        for (std::size_t c = 0; c < d.mixture.components.size(); ++c) {
            const data::MixtureComponent& m = d.mixture.components[c];
            o << "weight_" << c << " = " << fmt(m.weight) << "\n";
            o << "mean_" << c << " = " << join_nums(m.mean) << "\n";
            o << "std_" << c << " = " << join_nums(m.std) << "\n";
        }
        o << "sample_count = " << d.sample_count << "\n";
    } else {
        o << "images = " << d.images_path << "\n";
        o << "labels = " << d.labels_path << "\n";
        o << "keep_labels = " << join_ints(d.keep_labels) << "\n";
    }
    o << "test_fraction = " << fmt(d.test_fraction) << "\n\n";
}

}  // namespace

std::string serialize_config(const ExperimentConfig& c) {
    std::ostringstream o;
    o << "seed = " << c.seed << "\n";
    o << "out_dir = " << c.out_dir << "\n\n";
    emit_data_spec(o, "dataset", c.dataset);
    emit_data_spec(o, "anomaly", c.anomaly);
    o << "[gan]\n";
    o << "data_dim = " << c.gan.data_dim << "\n";
    o << "latent_dim = " << c.gan.latent_dim << "\n";
    o << "latent_std = " << fmt(c.gan.latent_std) << "\n";
    o << "n_epochs = " << c.gan.n_epochs << "\n";
    o << "batches_per_epoch = " << c.gan.batches_per_epoch << "\n";
    o << "batch_size = " << c.gan.batch_size << "\n";
    o << "n_critic = " << c.gan.n_critic << "\n";
    o << "gp_coefficient = " << fmt(c.gan.gp_coefficient) << "\n";
    o << "saves_per_epoch = " << c.gan.saves_per_epoch << "\n";
    o << "g_hidden = " << join_ints(c.gan.g_hidden) << "\n";
    o << "d_hidden = " << join_ints(c.gan.d_hidden) << "\n";
    o << "leaky_slope = " << fmt(c.gan.leaky_slope) << "\n";
    o << "learning_rate = " << fmt(c.gan.learning_rate) << "\n";
    o << "g_init_offset = " << fmt(c.gan.g_init_offset) << "\n\n";
    o << "[history]\n";
    o << "alpha = " << fmt(c.history.alpha) << "\n";
    o << "beta = " << fmt(c.history.beta) << "\n";
    o << "case2 = " << (c.history.case2 ? "true" : "false") << "\n";
    o << "wide_factor = " << fmt(c.history.wide_factor) << "\n\n";
    o << "[detector]\n";
    o << "hidden = " << join_ints(c.detector.hidden) << "\n";
    o << "leaky_slope = " << fmt(c.detector.leaky_slope) << "\n";
    o << "lambda = " << fmt(c.detector.lambda) << "\n";
    o << "steps = " << c.detector.steps << "\n";
    o << "batch_size = " << c.detector.batch_size << "\n";
    o << "learning_rate = " << fmt(c.detector.learning_rate) << "\n";
    o << "decay_lr = " << (c.detector.decay_lr ? "true" : "false") << "\n";
    o << "init_mode = "
      << (c.detector.init_mode == dtv::InitMode::random ? "random" : "weight_average") << "\n\n";
    o << "[eval]\n";
    o << "n_bins = " << c.eval.n_bins << "\n";
    o << "noise_sigmas = " << join_nums(c.eval.noise_sigmas) << "\n";
    o << "interp_steps = " << c.eval.interp_steps << "\n";
    return o.str();
}

void save_config(const ExperimentConfig& config, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ConfigError("cannot write config " + path);
    out << serialize_config(config);
}

}  // namespace histad::cfg
