#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dipfill/ops.hpp"
#include "dipfill/rng.hpp"
#include "dipfill/tensor.hpp"

namespace dipfill {

// Encoder-decoder configuration. Per-scale vectors all have length `depth`;
// n_s[i] = 0 disables the skip connection at scale i.
struct HourglassConfig {
    int depth = 5;
    std::vector<int> n_d;
    std::vector<int> n_u;
    std::vector<int> n_s;
    std::vector<int> k_d;
    std::vector<int> k_u;
    std::vector<int> k_s;
    int in_channels = 4;
    int out_channels = 4;
    double leaky_slope = 0.2;
    double sigma_p = 0.1;
    double lr = 0.01;
    int num_iter = 1500;
    std::string upsample_mode = "nearest";
    std::string input_kind = "noise";  // noise | meshgrid
    double input_amplitude = 0.1;
    std::uint64_t seed = 0;

    // Throws ConfigError naming the offending field.
    void validate() const;
    int scale_factor() const { return 1 << depth; }

    // Reference architecture: depth 5, 128 filters everywhere, 3x3 down/up
    // kernels, 1x1 skips, lr 0.01, 1500 iterations.
    static HourglassConfig reference();
};

// Flat `key = value` text file; list values comma-separated.
HourglassConfig load_config(const std::string& path);
HourglassConfig parse_config(const std::string& text);
std::string serialize_config(const HourglassConfig& cfg);
void save_config(const HourglassConfig& cfg, const std::string& path);

struct ConvLayer {
    Tensor w;
    Tensor b;
    int stride = 1;
    int pad = 0;
};

struct NormLayer {
    Tensor gamma;
    Tensor beta;
};

struct ScaleBlock {
    ConvLayer down1, down2;
    NormLayer dnorm1, dnorm2;
    bool has_skip = false;
    ConvLayer skip;
    NormLayer snorm;
    NormLayer unorm0;  // applied to (upsample + concat)
    ConvLayer up1;
    NormLayer unorm1;
    ConvLayer up2;  // 1x1
    NormLayer unorm2;
};

class Network {
public:
    HourglassConfig config;
    std::vector<ScaleBlock> scales;
    ConvLayer head;  // 1x1 to out_channels, followed by sigmoid

    // All trainable tensors in construction order.
    std::vector<Tensor>& parameters() { return params_; }
    const std::vector<Tensor>& parameters() const { return params_; }
    std::size_t parameter_count() const;
    void zero_grads();

    // Requires z channels == in_channels and spatial dims divisible by
    // 2^depth. Output is out_channels×H×W with values in (0,1).
    Tensor forward(const Tensor& z) const;

private:
    friend Network build_network(const HourglassConfig&, std::uint64_t);
    std::vector<Tensor> params_;
};

// Deterministic given seed: conv weights uniform on [-1/sqrt(fan_in),
// 1/sqrt(fan_in)], biases zero, norm scales one, shifts zero.
Network build_network(const HourglassConfig& cfg, std::uint64_t seed);

// Network input. noise: i.i.d. uniform on [0, amplitude). meshgrid
// (channels must be 2): channel 0 is the column coordinate scaled to [0,1],
// channel 1 the row coordinate.
Tensor make_input(const std::string& kind, int channels, int height, int width,
                  double amplitude, std::uint64_t seed);

// z0 + gaussian(0, sigma_p), fresh draw per call; z0 is left untouched.
Tensor perturb_input(const Tensor& z0, double sigma_p, Rng& rng);

}  // namespace dipfill
