#include "dipfill/hourglass.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "dipfill/errors.hpp"

namespace dipfill {

namespace {

constexpr double kNormEps = 1e-5;

void require_len(const char* field, const std::vector<int>& v, int depth) {
    if (static_cast<int>(v.size()) != depth) {
        throw ConfigError(std::string("config field ") + field + " must have length depth=" +
                          std::to_string(depth) + ", got " + std::to_string(v.size()));
    }
}

void require_odd_kernels(const char* field, const std::vector<int>& v) {
    for (int k : v) {
        if (k < 1 || k % 2 == 0) {
            throw ConfigError(std::string("config field ") + field +
                              " must contain odd kernel sizes >= 1, got " + std::to_string(k));
        }
    }
}

}  // namespace

void HourglassConfig::validate() const {
    if (depth < 1) throw ConfigError("config field depth must be >= 1");
    require_len("n_d", n_d, depth);
    require_len("n_u", n_u, depth);
    require_len("n_s", n_s, depth);
    require_len("k_d", k_d, depth);
    require_len("k_u", k_u, depth);
    require_len("k_s", k_s, depth);
    for (int n : n_d)
        if (n < 1) throw ConfigError("config field n_d must contain filter counts >= 1");
    for (int n : n_u)
        if (n < 1) throw ConfigError("config field n_u must contain filter counts >= 1");
    for (int n : n_s)
        if (n < 0) throw ConfigError("config field n_s must contain filter counts >= 0");
    require_odd_kernels("k_d", k_d);
    require_odd_kernels("k_u", k_u);
    require_odd_kernels("k_s", k_s);
    if (in_channels < 1) throw ConfigError("config field in_channels must be >= 1");
    if (out_channels < 1) throw ConfigError("config field out_channels must be >= 1");
    if (!(leaky_slope > 0.0 && leaky_slope < 1.0))
        throw ConfigError("config field leaky_slope must lie in (0,1)");
    if (sigma_p < 0.0) throw ConfigError("config field sigma_p must be >= 0");
    if (!(lr > 0.0)) throw ConfigError("config field lr must be > 0");
    if (num_iter < 1) throw ConfigError("config field num_iter must be >= 1");
    if (upsample_mode != "nearest")
        throw ConfigError("config field upsample_mode must be 'nearest'");
    if (input_kind != "noise" && input_kind != "meshgrid")
        throw ConfigError("config field input_kind must be 'noise' or 'meshgrid'");
    if (input_kind == "meshgrid" && in_channels != 2)
        throw ConfigError("config field in_channels must be 2 for meshgrid input");
    if (input_amplitude < 0.0) throw ConfigError("config field input_amplitude must be >= 0");
}

HourglassConfig HourglassConfig::reference() {
    HourglassConfig c;
    c.depth = 5;
    c.n_d.assign(5, 128);
    c.n_u.assign(5, 128);
    c.n_s.assign(5, 128);
    c.k_d.assign(5, 3);
    c.k_u.assign(5, 3);
    c.k_s.assign(5, 1);
    return c;
}

namespace {

std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
    std::vector<int> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stoi(item));
        } catch (const std::exception&) {
            throw ConfigError("config field " + key + ": cannot parse '" + item + "' as integer");
        }
    }
    if (out.empty()) throw ConfigError("config field " + key + ": empty list");
    return out;
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::string join_ints(const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(v[i]);
    }
    return s;
}

}  // namespace

HourglassConfig parse_config(const std::string& text) {
    HourglassConfig c = HourglassConfig::reference();
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw ConfigError("config line without '=': " + t);
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        try {
            if (key == "depth") c.depth = std::stoi(value);
            else if (key == "n_d") c.n_d = parse_int_list(key, value);
            else if (key == "n_u") c.n_u = parse_int_list(key, value);
            else if (key == "n_s") c.n_s = parse_int_list(key, value);
            else if (key == "k_d") c.k_d = parse_int_list(key, value);
            else if (key == "k_u") c.k_u = parse_int_list(key, value);
            else if (key == "k_s") c.k_s = parse_int_list(key, value);
            else if (key == "in_channels") c.in_channels = std::stoi(value);
            else if (key == "out_channels") c.out_channels = std::stoi(value);
            else if (key == "leaky_slope") c.leaky_slope = std::stod(value);
            else if (key == "sigma_p") c.sigma_p = std::stod(value);
            else if (key == "lr") c.lr = std::stod(value);
            else if (key == "num_iter") c.num_iter = std::stoi(value);
            else if (key == "upsample_mode") c.upsample_mode = value;
            else if (key == "input_kind") c.input_kind = value;
            else if (key == "input_amplitude") c.input_amplitude = std::stod(value);
            else if (key == "seed") c.seed = std::stoull(value);
            else throw ConfigError("unknown config key: " + key);
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception&) {
            throw ConfigError("config field " + key + ": cannot parse value '" + value + "'");
        }
    }
    c.validate();
    return c;
}

HourglassConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config file " + path, 0);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(const HourglassConfig& cfg) {
    std::ostringstream out;
    out << "depth = " << cfg.depth << "\n";
    out << "n_d = " << join_ints(cfg.n_d) << "\n";
    out << "n_u = " << join_ints(cfg.n_u) << "\n";
    out << "n_s = " << join_ints(cfg.n_s) << "\n";
    out << "k_d = " << join_ints(cfg.k_d) << "\n";
    out << "k_u = " << join_ints(cfg.k_u) << "\n";
    out << "k_s = " << join_ints(cfg.k_s) << "\n";
    out << "in_channels = " << cfg.in_channels << "\n";
    out << "out_channels = " << cfg.out_channels << "\n";
    out << "leaky_slope = " << cfg.leaky_slope << "\n";
    out << "sigma_p = " << cfg.sigma_p << "\n";
    out << "lr = " << cfg.lr << "\n";
    out << "num_iter = " << cfg.num_iter << "\n";
    out << "upsample_mode = " << cfg.upsample_mode << "\n";
    out << "input_kind = " << cfg.input_kind << "\n";
    out << "input_amplitude = " << cfg.input_amplitude << "\n";
    out << "seed = " << cfg.seed << "\n";
    return out.str();
}

void save_config(const HourglassConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write config file " + path, 0);
    out << serialize_config(cfg);
}

namespace {

struct Builder {
    Rng rng;
    std::vector<Tensor>* params;

    Tensor uniform_weight(const std::vector<int>& shape, int fan_in) {
        const double a = 1.0 / std::sqrt(static_cast<double>(fan_in));
        std::vector<double> v(shape_size(shape));
        for (auto& e : v) e = rng.uniform(-a, a);
        Tensor t = Tensor::from_data(shape, std::move(v), true);
        params->push_back(t);
        return t;
    }

    Tensor const_param(int n, double value) {
        Tensor t = Tensor::full({n}, value, true);
        params->push_back(t);
        return t;
    }

    ConvLayer conv(int c_in, int c_out, int k, int stride) {
        ConvLayer l;
        l.w = uniform_weight({c_out, c_in, k, k}, c_in * k * k);
        l.b = const_param(c_out, 0.0);
        l.stride = stride;
        l.pad = k / 2;
        return l;
    }

    NormLayer norm(int c) {
        NormLayer l;
        l.gamma = const_param(c, 1.0);
        l.beta = const_param(c, 0.0);
        return l;
    }
};

}  // namespace

Network build_network(const HourglassConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    Network net;
    net.config = cfg;
    Builder b{Rng(seed), &net.params_};

    // Down and skip branches, shallow to deep.
    int ch = cfg.in_channels;
    std::vector<int> enter_ch(cfg.depth);
    for (int i = 0; i < cfg.depth; ++i) {
        enter_ch[i] = ch;
        ScaleBlock s;
        s.down1 = b.conv(ch, cfg.n_d[i], cfg.k_d[i], 2);
        s.dnorm1 = b.norm(cfg.n_d[i]);
        s.down2 = b.conv(cfg.n_d[i], cfg.n_d[i], cfg.k_d[i], 1);
        s.dnorm2 = b.norm(cfg.n_d[i]);
        s.has_skip = cfg.n_s[i] > 0;
        if (s.has_skip) {
            s.skip = b.conv(ch, cfg.n_s[i], cfg.k_s[i], 1);
            s.snorm = b.norm(cfg.n_s[i]);
        }
        net.scales.push_back(std::move(s));
        ch = cfg.n_d[i];
    }

    // Up path, deep to shallow. The tensor arriving at scale i carries
    // n_d[depth-1] channels at the deepest scale, n_u[i+1] elsewhere.
    for (int i = cfg.depth - 1; i >= 0; --i) {
        ScaleBlock& s = net.scales[i];
        const int below = i == cfg.depth - 1 ? cfg.n_d[cfg.depth - 1] : cfg.n_u[i + 1];
        const int merged = below + (s.has_skip ? cfg.n_s[i] : 0);
        s.unorm0 = b.norm(merged);
        s.up1 = b.conv(merged, cfg.n_u[i], cfg.k_u[i], 1);
        s.unorm1 = b.norm(cfg.n_u[i]);
        s.up2 = b.conv(cfg.n_u[i], cfg.n_u[i], 1, 1);
        s.unorm2 = b.norm(cfg.n_u[i]);
    }

    net.head = b.conv(cfg.n_u[0], cfg.out_channels, 1, 1);
    return net;
}

std::size_t Network::parameter_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += p.size();
    return n;
}

void Network::zero_grads() {
    for (auto& p : params_) p.zero_grad();
}

namespace {

Tensor conv_norm_act(const Tensor& x, const ConvLayer& c, const NormLayer& n, double slope) {
    Tensor y = conv2d(x, c.w, c.b, c.stride, Padding::reflect, c.pad);
    y = channel_norm(y, n.gamma, n.beta, kNormEps);
    return leaky_relu(y, slope);
}

}  // namespace

Tensor Network::forward(const Tensor& z) const {
    if (z.shape().size() != 3 || z.shape()[0] != config.in_channels) {
        throw DimensionError("forward: input must be " + std::to_string(config.in_channels) +
                             "×H×W, got " + shape_str(z.shape()));
    }
    const int div = config.scale_factor();
    if (z.shape()[1] % div != 0 || z.shape()[2] % div != 0) {
        throw DimensionError("forward: spatial dims " + std::to_string(z.shape()[1]) + "x" +
                             std::to_string(z.shape()[2]) + " must be divisible by 2^depth = " +
                             std::to_string(div));
    }
    const double slope = config.leaky_slope;

    std::vector<Tensor> skips(scales.size());
    Tensor x = z;
    for (std::size_t i = 0; i < scales.size(); ++i) {
        const ScaleBlock& s = scales[i];
        if (s.has_skip) skips[i] = conv_norm_act(x, s.skip, s.snorm, slope);
        x = conv_norm_act(x, s.down1, s.dnorm1, slope);
        x = conv_norm_act(x, s.down2, s.dnorm2, slope);
    }

    for (int i = static_cast<int>(scales.size()) - 1; i >= 0; --i) {
        const ScaleBlock& s = scales[i];
        x = upsample_nearest(x, 2);
        if (s.has_skip) x = concat_channels(skips[i], x);
        x = channel_norm(x, s.unorm0.gamma, s.unorm0.beta, kNormEps);
        x = conv_norm_act(x, s.up1, s.unorm1, slope);
        x = conv_norm_act(x, s.up2, s.unorm2, slope);
    }

    return sigmoid(conv2d(x, head.w, head.b, 1, Padding::reflect, 0));
}

Tensor make_input(const std::string& kind, int channels, int height, int width, double amplitude,
                  std::uint64_t seed) {
    if (height < 1 || width < 1) throw DimensionError("make_input: dims must be positive");
    if (kind == "noise") {
        if (channels < 1) throw ConfigError("make_input: noise needs channels >= 1");
        Rng rng(seed);
        std::vector<double> v(static_cast<std::size_t>(channels) * height * width);
        for (auto& e : v) e = amplitude * rng.uniform();
        return Tensor::from_data({channels, height, width}, std::move(v));
    }
    if (kind == "meshgrid") {
        if (channels != 2) throw ConfigError("make_input: meshgrid requires exactly 2 channels");
        std::vector<double> v(2 * static_cast<std::size_t>(height) * width);
        const double dx = width > 1 ? 1.0 / (width - 1) : 0.0;
        const double dy = height > 1 ? 1.0 / (height - 1) : 0.0;
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x) {
                v[static_cast<std::size_t>(y) * width + x] = x * dx;
                v[static_cast<std::size_t>(height) * width + y * width + x] = y * dy;
            }
        return Tensor::from_data({2, height, width}, std::move(v));
    }
    throw ConfigError("make_input: unknown kind '" + kind + "'");
}

Tensor perturb_input(const Tensor& z0, double sigma_p, Rng& rng) {
    if (sigma_p < 0.0) throw ConfigError("perturb_input: sigma_p must be >= 0");
    if (sigma_p == 0.0) return z0;
    std::vector<double> v(z0.values());
    for (auto& e : v) e += sigma_p * rng.gaussian();
    return Tensor::from_data(z0.shape(), std::move(v));
}

}  // namespace dipfill
