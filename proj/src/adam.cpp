#include "dipfill/adam.hpp"

#include <cmath>

#include "dipfill/errors.hpp"

namespace dipfill {

AdamState::AdamState(const std::vector<Tensor>& params, double lr_) {
    lr = lr_;
    m.reserve(params.size());
    v.reserve(params.size());
    for (const auto& p : params) {
        m.emplace_back(p.size(), 0.0);
        v.emplace_back(p.size(), 0.0);
    }
}

void adam_step(std::vector<Tensor>& params, AdamState& state) {
    if (params.size() != state.m.size() || params.size() != state.v.size()) {
        throw DimensionError("adam_step: state tracks " + std::to_string(state.m.size()) +
                             " parameters, got " + std::to_string(params.size()));
    }
    state.t += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto& p = params[i];
        if (state.m[i].size() != p.size()) {
            throw DimensionError("adam_step: parameter " + std::to_string(i) +
                                 " changed size under the optimizer");
        }
        const auto& g = p.grad();
        if (g.size() != p.size()) {
            throw DimensionError("adam_step: parameter " + std::to_string(i) +
                                 " has no gradient of matching size");
        }
        double* pv = p.data();
        double* mi = state.m[i].data();
        double* vi = state.v[i].data();
        for (std::size_t j = 0; j < p.size(); ++j) {
            mi[j] = state.beta1 * mi[j] + (1.0 - state.beta1) * g[j];
            vi[j] = state.beta2 * vi[j] + (1.0 - state.beta2) * g[j] * g[j];
            const double mhat = mi[j] / bc1;
            const double vhat = vi[j] / bc2;
            pv[j] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
        }
    }
}

}  // namespace dipfill
