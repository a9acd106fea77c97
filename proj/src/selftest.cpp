#include "dipfill/selftest.hpp"

#include <cstdio>

#include "dipfill/grad_check.hpp"
#include "dipfill/hourglass.hpp"
#include "dipfill/ops.hpp"
#include "dipfill/rng.hpp"

namespace dipfill {

namespace {

constexpr double kEps = 1e-5;
constexpr double kOpTol = 1e-6;
constexpr double kEndToEndTol = 1e-5;

Tensor random_tensor(Rng& rng, const std::vector<int>& shape, double lo = -1.0, double hi = 1.0) {
    std::vector<double> v(shape_size(shape));
    for (auto& e : v) e = rng.uniform(lo, hi);
    return Tensor::from_data(shape, std::move(v));
}

// Values bounded away from the leaky_relu kink so finite differences do not
// straddle it.
Tensor random_tensor_away_from_zero(Rng& rng, const std::vector<int>& shape) {
    std::vector<double> v(shape_size(shape));
    for (auto& e : v) {
        const double mag = rng.uniform(0.1, 1.0);
        e = rng.uniform() < 0.5 ? -mag : mag;
    }
    return Tensor::from_data(shape, std::move(v));
}

Tensor random_mask(Rng& rng, const std::vector<int>& shape) {
    std::vector<double> v(shape_size(shape));
    bool any = false;
    for (auto& e : v) {
        e = rng.uniform() < 0.5 ? 1.0 : 0.0;
        any = any || e == 1.0;
    }
    if (!any) v[0] = 1.0;
    return Tensor::from_data(shape, std::move(v));
}

}  // namespace

std::vector<CheckResult> run_selftest(std::uint64_t seed) {
    Rng rng(seed);
    std::vector<CheckResult> results;
    auto record = [&](const std::string& name, double err, double tol) {
        results.push_back({name, err, tol, err < tol});
    };

    // Non-scalar outputs are turned into a scalar through a fixed random
    // projection so every output coordinate influences the loss.
    {
        Tensor x = random_tensor(rng, {2, 5, 5});
        Tensor w = random_tensor(rng, {3, 2, 3, 3});
        Tensor b = random_tensor(rng, {3});
        Tensor proj = random_tensor(rng, {3, 5, 5});
        double err = grad_check(
            [&](std::vector<Tensor>& in) {
                return sum(mul(conv2d(in[0], in[1], in[2], 1, Padding::reflect, 1), proj));
            },
            {x, w, b}, kEps);
        record("conv2d stride1 reflect", err, kOpTol);
    }
    {
        Tensor x = random_tensor(rng, {2, 6, 6});
        Tensor w = random_tensor(rng, {3, 2, 3, 3});
        Tensor b = random_tensor(rng, {3});
        Tensor proj = random_tensor(rng, {3, 3, 3});
        double err = grad_check(
            [&](std::vector<Tensor>& in) {
                return sum(mul(conv2d(in[0], in[1], in[2], 2, Padding::zero, 1), proj));
            },
            {x, w, b}, kEps);
        record("conv2d stride2 zeropad", err, kOpTol);
    }
    {
        Tensor x = random_tensor_away_from_zero(rng, {2, 4, 4});
        Tensor proj = random_tensor(rng, {2, 4, 4});
        double err = grad_check(
            [&](std::vector<Tensor>& in) { return sum(mul(leaky_relu(in[0], 0.2), proj)); }, {x},
            kEps);
        record("leaky_relu", err, kOpTol);
    }
    {
        Tensor x = random_tensor(rng, {2, 3, 3});
        Tensor proj = random_tensor(rng, {2, 6, 6});
        double err = grad_check(
            [&](std::vector<Tensor>& in) { return sum(mul(upsample_nearest(in[0], 2), proj)); },
            {x}, kEps);
        record("upsample_nearest", err, kOpTol);
    }
    {
        Tensor x = random_tensor(rng, {4, 8, 8});
        Tensor gamma = random_tensor(rng, {4}, 0.5, 1.5);
        Tensor beta = random_tensor(rng, {4});
        Tensor proj = random_tensor(rng, {4, 8, 8});
        double err = grad_check(
            [&](std::vector<Tensor>& in) {
                return sum(mul(channel_norm(in[0], in[1], in[2], 1e-5), proj));
            },
            {x, gamma, beta}, kEps);
        record("channel_norm", err, kOpTol);
    }
    {
        Tensor a = random_tensor(rng, {2, 4, 4});
        Tensor b = random_tensor(rng, {3, 4, 4});
        Tensor proj = random_tensor(rng, {5, 4, 4});
        double err = grad_check(
            [&](std::vector<Tensor>& in) {
                return sum(mul(concat_channels(in[0], in[1]), proj));
            },
            {a, b}, kEps);
        record("concat_channels", err, kOpTol);
    }
    {
        Tensor x = random_tensor(rng, {2, 3, 3});
        Tensor proj = random_tensor(rng, {2, 3, 3});
        double err = grad_check(
            [&](std::vector<Tensor>& in) { return sum(mul(sigmoid(in[0]), proj)); }, {x}, kEps);
        record("sigmoid", err, kOpTol);
    }
    {
        Tensor pred = random_tensor(rng, {2, 4, 4});
        Tensor target = random_tensor(rng, {2, 4, 4});
        Tensor mask = random_mask(rng, {2, 4, 4});
        double err = grad_check(
            [&](std::vector<Tensor>& in) { return masked_mse(in[0], in[1], mask); },
            {pred, target}, kEps);
        record("masked_mse", err, kOpTol);
    }
    {
        // End-to-end: masked loss of a depth-2 toy network against a random
        // subsample of 20 parameter coordinates.
        HourglassConfig cfg;
        cfg.depth = 2;
        cfg.n_d = {6, 8};
        cfg.n_u = {6, 8};
        cfg.n_s = {4, 4};
        cfg.k_d = {3, 3};
        cfg.k_u = {3, 3};
        cfg.k_s = {1, 1};
        cfg.in_channels = 3;
        cfg.out_channels = 2;
        Network net = build_network(cfg, rng.next_u64());
        Tensor z = random_tensor(rng, {3, 8, 8}, 0.0, 0.1);
        Tensor target = random_tensor(rng, {2, 8, 8}, 0.0, 1.0);
        Tensor mask = random_mask(rng, {2, 8, 8});

        std::vector<Tensor> params = net.parameters();
        std::vector<std::pair<std::size_t, std::size_t>> coords;
        for (int k = 0; k < 20; ++k) {
            const std::size_t ti = rng.below(params.size());
            coords.emplace_back(ti, rng.below(params[ti].size()));
        }
        double err = grad_check(
            [&](std::vector<Tensor>&) { return masked_mse(net.forward(z), target, mask); },
            params, kEps, coords);
        record("network end-to-end", err, kEndToEndTol);
    }

    return results;
}

bool all_passed(const std::vector<CheckResult>& results) {
    for (const auto& r : results)
        if (!r.pass) return false;
    return true;
}

std::string selftest_table(const std::vector<CheckResult>& results) {
    std::string out;
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%-26s %14s %10s  %s\n", "check", "max_rel_err", "tolerance",
                  "result");
    out += buf;
    for (const auto& r : results) {
        std::snprintf(buf, sizeof(buf), "%-26s %14.3e %10.0e  %s\n", r.name.c_str(),
                      r.max_rel_error, r.tolerance, r.pass ? "PASS" : "FAIL");
        out += buf;
    }
    return out;
}

}  // namespace dipfill
