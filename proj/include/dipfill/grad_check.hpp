#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "dipfill/tensor.hpp"

namespace dipfill {

// Builds a scalar loss from the given inputs; called repeatedly while input
// values are nudged, so it must not cache state between calls.
using ScalarFn = std::function<Tensor(std::vector<Tensor>&)>;

// Central-difference verification of reverse-mode gradients. Returns the
// maximum over checked coordinates of
//   |analytic - numeric| / max(1, |analytic|, |numeric|)
// with numeric = (f(x+eps) - f(x-eps)) / (2 eps).
double grad_check(const ScalarFn& fn, std::vector<Tensor> inputs, double eps);

// Same, restricted to explicit (input index, flat coordinate) pairs.
double grad_check(const ScalarFn& fn, std::vector<Tensor> inputs, double eps,
                  const std::vector<std::pair<std::size_t, std::size_t>>& coords);

}  // namespace dipfill
