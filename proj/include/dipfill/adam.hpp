#pragma once

#include <vector>

#include "dipfill/tensor.hpp"

namespace dipfill {

// Bias-corrected Adam. Moments are zero at t=0; t advances by one per step.
struct AdamState {
    double lr = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    long t = 0;
    std::vector<std::vector<double>> m;
    std::vector<std::vector<double>> v;

    AdamState() = default;
    AdamState(const std::vector<Tensor>& params, double lr);
};

// One update over all parameters, reading each parameter's accumulated
// gradient: m <- b1*m + (1-b1)*g; v <- b2*v + (1-b2)*g^2;
// p <- p - lr * m/(1-b1^t) / (sqrt(v/(1-b2^t)) + eps).
void adam_step(std::vector<Tensor>& params, AdamState& state);

}  // namespace dipfill
