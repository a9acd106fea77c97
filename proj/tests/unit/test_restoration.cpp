#include <doctest.h>

#include <cmath>

#include "dipfill/errors.hpp"
#include "dipfill/evaluation.hpp"
#include "dipfill/restoration.hpp"

using namespace dipfill;

namespace {

HourglassConfig toy_config(int num_iter = 300) {
    HourglassConfig c;
    c.depth = 2;
    c.n_d = {8, 12};
    c.n_u = {8, 12};
    c.n_s = {4, 4};
    c.k_d = {3, 3};
    c.k_u = {3, 3};
    c.k_s = {1, 1};
    c.in_channels = 2;
    c.out_channels = 1;
    c.num_iter = num_iter;
    return c;
}

GapMask half_mask(int h, int w) { return slc_wedge_mask(h, w, 8, 4, 0, 0.0, false); }

}  // namespace

TEST_CASE("constant raster restores to near-zero loss and tiny hidden error") {
    Raster x = Raster::create(1, 16, 16, 0.5);
    GapMask m = half_mask(16, 16);
    RestorationJob job{apply_mask(x, m, 0.0), m, toy_config(300), RestoreMode::composite,
                       OutputMode::full_reconstruction, 1, false};
    RestorationResult res = restore(job);
    REQUIRE(res.traces.size() == 1);
    REQUIRE(res.traces[0].losses.size() == 300);
    CHECK(res.traces[0].losses.back() < 1e-4);
    CHECK(rmse(res.restored, x, 0, m, Region::hidden) < 0.02);
    // optimization made progress
    CHECK(res.traces[0].losses.back() < res.traces[0].losses.front());
    for (double l : res.traces[0].losses) CHECK(l >= 0.0);
}

TEST_CASE("all-observed mask reduces to full-image fitting") {
    Raster x = make_synthetic_bumps(1, 16, 16, 4, 3);
    GapMask none;
    none.height = 16;
    none.width = 16;
    none.cells.assign(256, 1);
    RestorationJob job{x, none, toy_config(200), RestoreMode::composite,
                       OutputMode::full_reconstruction, 2, false};
    RestorationResult res = restore(job);
    // with every pixel observed, rmse against the input is exactly the
    // square root of the masked loss of the returned reconstruction
    const double output_loss =
        masked_mse(raster_to_tensor(res.restored), raster_to_tensor(x),
                   Tensor::full({1, 16, 16}, 1.0))
            .item();
    const double full_rmse = rmse(res.restored, x, 0, none, Region::all);
    CHECK(full_rmse < std::sqrt(output_loss) + 1e-9);
    CHECK(res.traces[0].losses.back() < res.traces[0].losses.front());
}

TEST_CASE("restore is a pure function of raster, mask, config and seed") {
    Raster x = make_synthetic_bumps(1, 16, 16, 4, 11);
    GapMask m = half_mask(16, 16);
    RestorationJob job{apply_mask(x, m, 0.0), m, toy_config(60), RestoreMode::composite,
                       OutputMode::full_reconstruction, 5, false};
    RestorationResult a = restore(job);
    RestorationResult b = restore(job);
    CHECK(a.restored.values == b.restored.values);
    CHECK(a.traces[0].losses == b.traces[0].losses);

    job.seed = 6;
    RestorationResult c = restore(job);
    CHECK(a.restored.values != c.restored.values);
}

TEST_CASE("gradients never flow from missing pixels") {
    // perturb the target at missing positions only; parameter gradients
    // after one backward pass must be bit-identical
    HourglassConfig cfg = toy_config(1);
    Network net = build_network(cfg, 21);
    Tensor z = make_input("noise", 2, 8, 8, 0.1, 4);
    GapMask m = half_mask(8, 8);
    std::vector<double> mask_vals(64);
    std::vector<double> target_vals(64, 0.5);
    std::vector<double> tampered(64, 0.5);
    for (int i = 0; i < 64; ++i) {
        mask_vals[i] = m.cells[i] ? 1.0 : 0.0;
        if (!m.cells[i]) tampered[i] = 0.123;
    }
    Tensor mask = Tensor::from_data({1, 8, 8}, mask_vals);

    auto grads_for = [&](const std::vector<double>& tv) {
        net.zero_grads();
        Tensor target = Tensor::from_data({1, 8, 8}, tv);
        backward(masked_mse(net.forward(z), target, mask));
        std::vector<std::vector<double>> grads;
        for (auto& p : net.parameters()) grads.push_back(p.grad());
        return grads;
    };
    CHECK(grads_for(target_vals) == grads_for(tampered));
}

TEST_CASE("per-band mode runs one optimization per band, composite runs one") {
    Raster x = make_synthetic_bumps(2, 16, 16, 3, 8);
    GapMask m = half_mask(16, 16);
    HourglassConfig cfg = toy_config(25);

    RestorationJob per{apply_mask(x, m, 0.0), m, cfg, RestoreMode::per_band,
                       OutputMode::full_reconstruction, 3, false};
    RestorationResult rp = restore(per);
    CHECK(rp.traces.size() == 2);
    CHECK(rp.traces[0].label == "band1");
    CHECK(rp.traces[1].label == "band2");

    per.mode = RestoreMode::composite;
    RestorationResult rc = restore(per);
    CHECK(rc.traces.size() == 1);
    CHECK(rc.traces[0].label == "composite");
}

TEST_CASE("restore validates inputs") {
    Raster x = Raster::create(1, 16, 16, 0.5);
    GapMask wrong = half_mask(8, 8);
    RestorationJob job{x, wrong, toy_config(10), RestoreMode::composite,
                       OutputMode::full_reconstruction, 0, false};
    CHECK_THROWS_AS(restore(job), DimensionError);

    GapMask all_missing = half_mask(16, 16);
    all_missing.cells.assign(all_missing.cells.size(), 0);
    RestorationJob job2{x, all_missing, toy_config(10), RestoreMode::composite,
                        OutputMode::full_reconstruction, 0, false};
    CHECK_THROWS_AS(restore(job2), DegenerateError);

    Raster out_of_range = Raster::create(1, 16, 16, 1.5);
    RestorationJob job3{out_of_range, half_mask(16, 16), toy_config(10), RestoreMode::composite,
                        OutputMode::full_reconstruction, 0, false};
    CHECK_THROWS_AS(restore(job3), ConfigError);
}

TEST_CASE("non-finite loss surfaces as a numeric error carrying the iteration") {
    Raster x = Raster::create(1, 16, 16, 0.5);
    GapMask m = half_mask(16, 16);
    HourglassConfig cfg = toy_config(10);
    cfg.input_amplitude = 1e308;  // overflows the first forward pass
    RestorationJob job{x, m, cfg, RestoreMode::composite, OutputMode::full_reconstruction, 1,
                       false};
    try {
        restore(job);
        FAIL("expected NumericError");
    } catch (const NumericError& e) {
        CHECK(e.iteration() == 0);
    }
}

TEST_CASE("restore pads rasters whose dims are not divisible by 2^depth") {
    Raster x = make_synthetic_bumps(1, 15, 13, 3, 2);  // 15x13 with depth-2 net
    GapMask m = half_mask(15, 13);
    RestorationJob job{apply_mask(x, m, 0.0), m, toy_config(30), RestoreMode::composite,
                       OutputMode::full_reconstruction, 7, false};
    RestorationResult res = restore(job);
    CHECK(res.restored.height == 15);
    CHECK(res.restored.width == 13);
}

TEST_CASE("splice keeps observed pixels exactly") {
    Raster truth = make_synthetic_bumps(2, 16, 16, 3, 5);
    GapMask m = half_mask(16, 16);
    Raster corrupted = apply_mask(truth, m, 0.0);
    Raster fake_restored = Raster::create(2, 16, 16, 0.42);

    Raster spliced = splice(fake_restored, corrupted, m);
    for (int b = 0; b < 2; ++b)
        for (int y = 0; y < 16; ++y)
            for (int x = 0; x < 16; ++x) {
                if (m.observed(y, x)) CHECK(spliced.at(b, y, x) == corrupted.at(b, y, x));
                else CHECK(spliced.at(b, y, x) == 0.42);
            }

    GapMask none = m;
    none.cells.assign(none.cells.size(), 1);
    CHECK(splice(fake_restored, corrupted, none).values == corrupted.values);

    GapMask full = m;
    full.cells.assign(full.cells.size(), 0);
    CHECK(splice(fake_restored, corrupted, full).values == fake_restored.values);

    CHECK_THROWS_AS(splice(Raster::create(1, 8, 8), corrupted, m), DimensionError);
}

TEST_CASE("splice output mode threads through restore") {
    Raster truth = make_synthetic_bumps(1, 16, 16, 3, 6);
    GapMask m = half_mask(16, 16);
    Raster corrupted = apply_mask(truth, m, 0.0);
    RestorationJob job{corrupted, m, toy_config(30), RestoreMode::composite, OutputMode::splice,
                       9, false};
    Raster out = restore(job).restored;
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x)
            if (m.observed(y, x)) CHECK(out.at(0, y, x) == corrupted.at(0, y, x));
}

TEST_CASE("separate and composite agree on redundant duplicated bands") {
    // one band duplicated four times: both modes see the same information,
    // so hidden-pixel r2 should agree up to seed noise
    Raster base = make_synthetic_bumps(1, 32, 32, 4, 14);
    Raster dup = Raster::create(4, 32, 32);
    for (int b = 0; b < 4; ++b)
        std::copy(base.values.begin(), base.values.end(),
                  dup.values.begin() + b * base.pixel_count());
    GapMask m = half_mask(32, 32);
    HourglassConfig cfg = toy_config(400);

    std::vector<double> deltas;
    for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
        ModeComparison cmp = run_separate_vs_composite(dup, m, cfg, {seed});
        double sep = 0, comp = 0;
        for (const auto& row : cmp.medians) {
            if (row.band != "avg") continue;
            (row.mode == "separate" ? sep : comp) = row.r2_hidden;
        }
        deltas.push_back(std::abs(sep - comp));
    }
    CHECK(median(deltas) < 0.05);
}

TEST_CASE("mode comparison produces the documented CSV layout") {
    Raster truth = make_synthetic_bumps(2, 16, 16, 3, 20);
    GapMask m = half_mask(16, 16);
    ModeComparison cmp = run_separate_vs_composite(truth, m, toy_config(25), {1, 2});
    REQUIRE(cmp.medians.size() == 6);  // 2 modes x (2 bands + avg)
    const std::string csv = cmp.to_csv();
    CHECK(csv.rfind("mode,band,rmse_hidden,r2_hidden,rmse_all,r2_all\n", 0) == 0);
    CHECK(csv.find("separate,band1,") != std::string::npos);
    CHECK(csv.find("composite,avg,") != std::string::npos);

    CHECK_THROWS_AS(run_separate_vs_composite(make_synthetic_bumps(1, 16, 16, 3, 1), m,
                                              toy_config(5), {1}),
                    ConfigError);
}

TEST_CASE("trace CSV is two columns with a header") {
    LossTrace t;
    t.label = "composite";
    t.losses = {0.5, 0.25};
    CHECK(trace_to_csv(t) == "iteration,loss\n1,0.5\n2,0.25\n");
}

TEST_CASE("sweep of a single cell equals a direct restore plus metrics") {
    Raster truth = make_synthetic_bumps(2, 16, 16, 3, 30);
    HourglassConfig cfg = toy_config(40);
    const double fraction = 0.4;
    SweepResult sweep = corruption_sweep(truth, {fraction}, cfg, {9}, 8, 0.0);
    REQUIRE(sweep.rows.size() == 2);

    GapMask m = mask_for_fraction(16, 16, fraction, 8, 0.0, 0);
    RestorationJob job{apply_mask(truth, m, 0.0), m, cfg, RestoreMode::composite,
                       OutputMode::full_reconstruction, 9, false};
    Raster restored = restore(job).restored;
    for (int b = 0; b < 2; ++b) {
        CHECK(sweep.rows[b].rmse_hidden == rmse(restored, truth, b, m, Region::hidden));
        CHECK(sweep.rows[b].r2_hidden == r2(restored, truth, b, m, Region::hidden));
    }

    // repeated sweep is bit-identical
    SweepResult again = corruption_sweep(truth, {fraction}, cfg, {9}, 8, 0.0);
    CHECK(again.rows_csv() == sweep.rows_csv());
    CHECK(again.medians_csv() == sweep.medians_csv());
}
