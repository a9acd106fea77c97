#include "dipfill/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "dipfill/errors.hpp"

namespace dipfill {

namespace {

double run_checks(const ScalarFn& fn, std::vector<Tensor>& inputs,
                  const std::vector<std::pair<std::size_t, std::size_t>>& coords, double eps) {
    for (auto& in : inputs) {
        for (double v : in.values()) {
            if (!std::isfinite(v)) throw ContractError("grad_check: inputs must be finite");
        }
        in.set_requires_grad(true);
        in.zero_grad();
    }

    Tensor loss = fn(inputs);
    if (loss.size() != 1) throw ContractError("grad_check: fn must return a scalar tensor");
    backward(loss);

    std::vector<std::vector<double>> analytic;
    analytic.reserve(inputs.size());
    for (auto& in : inputs) analytic.push_back(in.grad());

    double worst = 0.0;
    for (const auto& [ti, ci] : coords) {
        if (ti >= inputs.size() || ci >= inputs[ti].size()) {
            throw ContractError("grad_check: coordinate out of range");
        }
        double* slot = inputs[ti].data() + ci;
        const double saved = *slot;
        *slot = saved + eps;
        const double f_plus = fn(inputs).item();
        *slot = saved - eps;
        const double f_minus = fn(inputs).item();
        *slot = saved;
        const double numeric = (f_plus - f_minus) / (2.0 * eps);
        const double a = analytic[ti][ci];
        const double rel =
            std::abs(a - numeric) / std::max({1.0, std::abs(a), std::abs(numeric)});
        worst = std::max(worst, rel);
    }
    return worst;
}

}  // namespace

double grad_check(const ScalarFn& fn, std::vector<Tensor> inputs, double eps,
                  const std::vector<std::pair<std::size_t, std::size_t>>& coords) {
    if (!(eps >= 1e-7 && eps <= 1e-3)) {
        throw ConfigError("grad_check: eps must lie in [1e-7, 1e-3]");
    }
    return run_checks(fn, inputs, coords, eps);
}

double grad_check(const ScalarFn& fn, std::vector<Tensor> inputs, double eps) {
    std::vector<std::pair<std::size_t, std::size_t>> coords;
    for (std::size_t t = 0; t < inputs.size(); ++t) {
        for (std::size_t c = 0; c < inputs[t].size(); ++c) coords.emplace_back(t, c);
    }
    return grad_check(fn, std::move(inputs), eps, coords);
}

}  // namespace dipfill
