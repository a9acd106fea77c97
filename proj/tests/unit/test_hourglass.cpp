#include <doctest.h>

#include <cmath>

#include "dipfill/errors.hpp"
#include "dipfill/hourglass.hpp"

using namespace dipfill;

namespace {

HourglassConfig toy_config(int depth, int filters, int skips, int in_ch, int out_ch) {
    HourglassConfig c;
    c.depth = depth;
    c.n_d.assign(depth, filters);
    c.n_u.assign(depth, filters);
    c.n_s.assign(depth, skips);
    c.k_d.assign(depth, 3);
    c.k_u.assign(depth, 3);
    c.k_s.assign(depth, 1);
    c.in_channels = in_ch;
    c.out_channels = out_ch;
    return c;
}

// Independent parameter-count oracle: walks the config enumerating layer
// shapes, separate from the network's own tensor allocation.
std::size_t count_parameters(const HourglassConfig& c) {
    auto conv = [](int ci, int co, int k) {
        return static_cast<std::size_t>(co) * ci * k * k + co;
    };
    auto norm = [](int ch) { return static_cast<std::size_t>(2) * ch; };
    std::size_t total = 0;
    int ch = c.in_channels;
    for (int i = 0; i < c.depth; ++i) {
        total += conv(ch, c.n_d[i], c.k_d[i]) + norm(c.n_d[i]);        // down stride 2
        total += conv(c.n_d[i], c.n_d[i], c.k_d[i]) + norm(c.n_d[i]);  // down stride 1
        if (c.n_s[i] > 0) total += conv(ch, c.n_s[i], c.k_s[i]) + norm(c.n_s[i]);
        ch = c.n_d[i];
    }
    for (int i = c.depth - 1; i >= 0; --i) {
        const int below = i == c.depth - 1 ? c.n_d[c.depth - 1] : c.n_u[i + 1];
        const int merged = below + (c.n_s[i] > 0 ? c.n_s[i] : 0);
        total += norm(merged);
        total += conv(merged, c.n_u[i], c.k_u[i]) + norm(c.n_u[i]);
        total += conv(c.n_u[i], c.n_u[i], 1) + norm(c.n_u[i]);
    }
    total += conv(c.n_u[0], c.out_channels, 1);
    return total;
}

}  // namespace

TEST_CASE("reference config builds and matches the independent parameter count") {
    const HourglassConfig cfg = HourglassConfig::reference();
    Network net = build_network(cfg, 1);
    CHECK(net.parameter_count() == count_parameters(cfg));
}

TEST_CASE("parameter count matches the oracle for seeded random configs") {
    Rng rng(101);
    for (int trial = 0; trial < 5; ++trial) {
        const int depth = 1 + static_cast<int>(rng.below(4));
        HourglassConfig c;
        c.depth = depth;
        for (int i = 0; i < depth; ++i) {
            c.n_d.push_back(1 + static_cast<int>(rng.below(6)));
            c.n_u.push_back(1 + static_cast<int>(rng.below(6)));
            c.n_s.push_back(static_cast<int>(rng.below(4)));  // 0 disables
            c.k_d.push_back(rng.below(2) ? 3 : 5);
            c.k_u.push_back(rng.below(2) ? 3 : 1);
            c.k_s.push_back(1);
        }
        c.in_channels = 1 + static_cast<int>(rng.below(4));
        c.out_channels = 1 + static_cast<int>(rng.below(4));
        Network net = build_network(c, rng.next_u64());
        CHECK(net.parameter_count() == count_parameters(c));
    }
}

TEST_CASE("minimal config forwards at the input shape") {
    Network net = build_network(toy_config(1, 1, 1, 1, 1), 5);
    Tensor z = Tensor::from_data({1, 2, 2}, {0.1, 0.2, 0.3, 0.4});
    Tensor y = net.forward(z);
    CHECK(y.shape() == std::vector<int>{1, 2, 2});
}

TEST_CASE("same seed gives bit-identical parameters, different seed does not") {
    const HourglassConfig cfg = toy_config(2, 4, 2, 2, 1);
    Network a = build_network(cfg, 42);
    Network b = build_network(cfg, 42);
    Network c = build_network(cfg, 43);
    REQUIRE(a.parameters().size() == b.parameters().size());
    bool all_equal = true, any_diff_c = false;
    for (std::size_t i = 0; i < a.parameters().size(); ++i) {
        all_equal = all_equal && a.parameters()[i].values() == b.parameters()[i].values();
        any_diff_c = any_diff_c || a.parameters()[i].values() != c.parameters()[i].values();
    }
    CHECK(all_equal);
    CHECK(any_diff_c);
}

TEST_CASE("shape invariance across depths") {
    for (int depth = 1; depth <= 5; ++depth) {
        Network net = build_network(toy_config(depth, 2, 1, 1, 3), depth);
        const int hw = 1 << depth;
        Tensor y = net.forward(Tensor::full({1, hw, 2 * hw}, 0.05));
        CHECK(y.shape() == std::vector<int>{3, hw, 2 * hw});
    }
}

TEST_CASE("reference architecture forwards 4x64x64 with outputs in (0,1)") {
    Network net = build_network(HourglassConfig::reference(), 7);
    Tensor z = make_input("noise", 4, 64, 64, 0.1, 11);
    Tensor y = net.forward(z);
    CHECK(y.shape() == std::vector<int>{4, 64, 64});
    for (double v : y.values()) {
        CHECK(v > 0.0);
        CHECK(v < 1.0);
    }
    // 65 rows is not divisible by 2^5
    CHECK_THROWS_AS(net.forward(Tensor::zeros({4, 65, 64})), DimensionError);
}

TEST_CASE("forward output lies strictly inside (0,1)") {
    Network net = build_network(toy_config(2, 4, 2, 2, 2), 9);
    Tensor z = make_input("noise", 2, 8, 8, 0.1, 77);
    Tensor y = net.forward(z);
    for (double v : y.values()) {
        CHECK(v > 0.0);
        CHECK(v < 1.0);
    }
}

TEST_CASE("forward is pure: two passes agree bit for bit") {
    Network net = build_network(toy_config(2, 3, 1, 2, 1), 13);
    Tensor z = make_input("noise", 2, 8, 8, 0.1, 5);
    CHECK(net.forward(z).values() == net.forward(z).values());
}

TEST_CASE("forward rejects indivisible spatial dims, naming the divisor") {
    Network net = build_network(toy_config(3, 2, 1, 1, 1), 3);
    try {
        net.forward(Tensor::zeros({1, 12, 16}));
        FAIL("expected DimensionError");
    } catch (const DimensionError& e) {
        CHECK(std::string(e.what()).find("8") != std::string::npos);
    }
    CHECK_THROWS_AS(net.forward(Tensor::zeros({2, 16, 16})), DimensionError);
}

TEST_CASE("config validation names the offending field") {
    HourglassConfig c = toy_config(2, 4, 2, 2, 1);
    c.k_d = {3, 4};
    try {
        c.validate();
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("k_d") != std::string::npos);
    }

    c = toy_config(2, 4, 2, 2, 1);
    c.n_u.pop_back();
    CHECK_THROWS_AS(c.validate(), ConfigError);

    c = toy_config(2, 4, 2, 2, 1);
    c.lr = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);

    c = toy_config(2, 4, 2, 2, 1);
    c.input_kind = "meshgrid";  // in_channels is 2, valid
    c.validate();
    c.in_channels = 4;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("config file round-trip") {
    HourglassConfig c = toy_config(3, 7, 0, 2, 5);
    c.leaky_slope = 0.1;
    c.sigma_p = 0.05;
    c.lr = 0.003;
    c.num_iter = 321;
    c.input_kind = "meshgrid";
    c.seed = 99;
    const HourglassConfig back = parse_config(serialize_config(c));
    CHECK(back.depth == c.depth);
    CHECK(back.n_d == c.n_d);
    CHECK(back.n_s == c.n_s);
    CHECK(back.k_u == c.k_u);
    CHECK(back.leaky_slope == c.leaky_slope);
    CHECK(back.sigma_p == c.sigma_p);
    CHECK(back.lr == c.lr);
    CHECK(back.num_iter == c.num_iter);
    CHECK(back.input_kind == c.input_kind);
    CHECK(back.seed == c.seed);

    CHECK_THROWS_AS(parse_config("nonsense line"), ConfigError);
    CHECK_THROWS_AS(parse_config("unknown_key = 3"), ConfigError);
}

TEST_CASE("make_input noise stays inside [0, amplitude)") {
    Tensor z = make_input("noise", 4, 16, 16, 0.1, 2024);
    for (double v : z.values()) {
        CHECK(v >= 0.0);
        CHECK(v < 0.1);
    }
    Tensor z0 = make_input("noise", 2, 4, 4, 0.0, 1);
    for (double v : z0.values()) CHECK(v == 0.0);
}

TEST_CASE("make_input meshgrid is the normalized coordinate grid") {
    Tensor z = make_input("meshgrid", 2, 2, 2, 0.0, 0);
    CHECK(z.values() == std::vector<double>{0, 1, 0, 1, 0, 0, 1, 1});
    CHECK_THROWS_AS(make_input("meshgrid", 3, 4, 4, 0.0, 0), ConfigError);
}

TEST_CASE("perturb_input adds fresh seeded gaussian noise") {
    Tensor z0 = make_input("noise", 1, 64, 64, 0.1, 8);

    Rng rng0(55);
    Tensor same = perturb_input(z0, 0.0, rng0);
    CHECK(same.values() == z0.values());

    Rng rng1(55);
    Tensor p1 = perturb_input(z0, 0.1, rng1);
    Rng rng2(55);
    Tensor p2 = perturb_input(z0, 0.1, rng2);
    CHECK(p1.values() == p2.values());
    CHECK(z0.values() != p1.values());

    // sample mean of the perturbation within 3 standard errors
    double mean = 0.0;
    for (std::size_t i = 0; i < z0.size(); ++i) mean += p1.values()[i] - z0.values()[i];
    mean /= static_cast<double>(z0.size());
    CHECK(std::abs(mean) < 3.0 * 0.1 / 64.0);

    // fresh draw per call on the same stream
    Tensor p3 = perturb_input(z0, 0.1, rng1);
    CHECK(p1.values() != p3.values());
}
