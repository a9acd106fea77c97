#include "dipfill/restoration.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>

#include "dipfill/adam.hpp"
#include "dipfill/csv.hpp"
#include "dipfill/errors.hpp"
#include "dipfill/evaluation.hpp"

namespace dipfill {

namespace {

int reflect101(int i, int n) {
    if (n == 1) return 0;
    const int m = 2 * n - 2;
    i %= m;
    if (i < 0) i += m;
    return i < n ? i : m - i;
}

// Pads the bottom/right edges by reflection so H and W become multiples of
// `divisor`.
template <typename T>
std::vector<T> pad_plane(const std::vector<T>& v, int channels, int h, int w, int h2, int w2) {
    std::vector<T> out(static_cast<std::size_t>(channels) * h2 * w2);
    for (int c = 0; c < channels; ++c)
        for (int y = 0; y < h2; ++y) {
            const int sy = reflect101(y, h);
            for (int x = 0; x < w2; ++x) {
                out[(static_cast<std::size_t>(c) * h2 + y) * w2 + x] =
                    v[(static_cast<std::size_t>(c) * h + sy) * w + reflect101(x, w)];
            }
        }
    return out;
}

struct OptimizationSetup {
    Tensor x0;    // padded target, C×H'×W'
    Tensor mask;  // same shape, {0,1}
    int padded_h = 0, padded_w = 0;
};

// One network fit; returns the reconstruction on the unperturbed base input.
Tensor run_optimization(const OptimizationSetup& s, const HourglassConfig& cfg,
                        std::uint64_t opt_seed, const std::string& label, bool log_progress,
                        LossTrace& trace) {
    const std::uint64_t z_seed = mix_seed(opt_seed, 1);
    const std::uint64_t net_seed = mix_seed(opt_seed, 2);
    const std::uint64_t perturb_seed = mix_seed(opt_seed, 3);

    Tensor z0 = make_input(cfg.input_kind, cfg.in_channels, s.padded_h, s.padded_w,
                           cfg.input_amplitude, z_seed);
    Network net = build_network(cfg, net_seed);
    AdamState adam(net.parameters(), cfg.lr);
    Rng prng(perturb_seed);

    trace.label = label;
    trace.losses.reserve(cfg.num_iter);
    const auto start = std::chrono::steady_clock::now();

    for (int it = 0; it < cfg.num_iter; ++it) {
        Tensor z = cfg.sigma_p > 0.0 ? perturb_input(z0, cfg.sigma_p, prng) : z0;
        Tensor out = net.forward(z);
        Tensor loss = masked_mse(out, s.x0, s.mask);
        const double lv = loss.item();
        if (!std::isfinite(lv)) {
            throw NumericError("non-finite loss in " + label, it);
        }
        trace.losses.push_back(lv);
        net.zero_grads();
        backward(loss);
        adam_step(net.parameters(), adam);

        if ((it + 1) % 100 == 0 || it + 1 == cfg.num_iter) {
            const double secs =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            trace.checkpoints.emplace_back(it + 1, secs);
            if (log_progress) {
                std::fprintf(stderr, "[%s] iter %d/%d loss=%.3e (%.1fs)\n", label.c_str(), it + 1,
                             cfg.num_iter, lv, secs);
            }
        }
    }
    return net.forward(z0);
}

}  // namespace

RestorationResult restore(const RestorationJob& job) {
    const Raster& x0 = job.corrupted;
    const GapMask& m = job.mask;
    if (x0.height != m.height || x0.width != m.width) {
        throw DimensionError("restore: raster " + std::to_string(x0.height) + "x" +
                             std::to_string(x0.width) + " vs mask " + std::to_string(m.height) +
                             "x" + std::to_string(m.width));
    }
    if (m.observed_count() == 0) throw DegenerateError("restore: mask has no observed pixels");
    job.config.validate();
    for (double v : x0.values) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw ConfigError("restore: raster values must lie in [0,1], got " +
                              std::to_string(v));
        }
    }

    const int div = job.config.scale_factor();
    const int h2 = (x0.height + div - 1) / div * div;
    const int w2 = (x0.width + div - 1) / div * div;
    const std::size_t pixels = x0.pixel_count();

    // Mask plane broadcast to a given channel count, padded alongside the image.
    std::vector<double> mask_plane(pixels);
    for (std::size_t i = 0; i < pixels; ++i) mask_plane[i] = m.cells[i] ? 1.0 : 0.0;
    const std::vector<double> mask_padded = pad_plane(mask_plane, 1, x0.height, x0.width, h2, w2);

    auto make_setup = [&](const std::vector<double>& band_values, int channels) {
        OptimizationSetup s;
        s.padded_h = h2;
        s.padded_w = w2;
        s.x0 = Tensor::from_data({channels, h2, w2},
                                 pad_plane(band_values, channels, x0.height, x0.width, h2, w2));
        std::vector<double> mc(static_cast<std::size_t>(channels) * mask_padded.size());
        for (int c = 0; c < channels; ++c)
            std::copy(mask_padded.begin(), mask_padded.end(), mc.begin() + c * mask_padded.size());
        s.mask = Tensor::from_data({channels, h2, w2}, std::move(mc));
        return s;
    };

    Raster restored = Raster::create(x0.bands, x0.height, x0.width);
    restored.names = x0.names;
    std::vector<LossTrace> traces;

    auto crop_into = [&](const Tensor& out, int band_offset, int channels) {
        for (int c = 0; c < channels; ++c)
            for (int y = 0; y < x0.height; ++y)
                for (int x = 0; x < x0.width; ++x)
                    restored.at(band_offset + c, y, x) = out.at(c, y, x);
    };

    if (job.mode == RestoreMode::composite) {
        HourglassConfig cfg = job.config;
        cfg.out_channels = x0.bands;
        OptimizationSetup s = make_setup(x0.values, x0.bands);
        LossTrace trace;
        Tensor out = run_optimization(s, cfg, mix_seed(job.seed, 0), "composite",
                                      job.log_progress, trace);
        crop_into(out, 0, x0.bands);
        traces.push_back(std::move(trace));
    } else {
        for (int b = 0; b < x0.bands; ++b) {
            HourglassConfig cfg = job.config;
            cfg.out_channels = 1;
            std::vector<double> band(x0.values.begin() + b * pixels,
                                     x0.values.begin() + (b + 1) * pixels);
            OptimizationSetup s = make_setup(band, 1);
            LossTrace trace;
            Tensor out = run_optimization(s, cfg, mix_seed(job.seed, b + 1),
                                          "band" + std::to_string(b + 1), job.log_progress, trace);
            crop_into(out, b, 1);
            traces.push_back(std::move(trace));
        }
    }

    if (job.output == OutputMode::splice) restored = splice(restored, x0, m);
    return RestorationResult{std::move(restored), std::move(traces)};
}

Raster splice(const Raster& restored, const Raster& corrupted, const GapMask& m) {
    if (!restored.same_dims(corrupted) || restored.height != m.height ||
        restored.width != m.width) {
        throw DimensionError("splice: dimension mismatch between restored, corrupted and mask");
    }
    Raster out = restored;
    const std::size_t pixels = restored.pixel_count();
    for (int b = 0; b < restored.bands; ++b)
        for (std::size_t i = 0; i < pixels; ++i)
            if (m.cells[i]) out.values[b * pixels + i] = corrupted.values[b * pixels + i];
    out.nodata.reset();
    return out;
}

std::string trace_to_csv(const LossTrace& trace) {
    std::string s = "iteration,loss\n";
    for (std::size_t i = 0; i < trace.losses.size(); ++i) {
        s += std::to_string(i + 1) + "," + fmt_double(trace.losses[i]) + "\n";
    }
    return s;
}

void write_trace_csv(const LossTrace& trace, const std::string& path) {
    write_file_atomic(path, trace_to_csv(trace));
}

ModeComparison run_separate_vs_composite(const Raster& truth, const GapMask& m,
                                         const HourglassConfig& config,
                                         const std::vector<std::uint64_t>& seeds,
                                         bool log_progress) {
    if (truth.bands < 2) {
        throw ConfigError("run_separate_vs_composite: raster needs at least 2 bands");
    }
    if (seeds.empty()) throw ConfigError("run_separate_vs_composite: needs at least one seed");
    const Raster corrupted = apply_mask(truth, m, 0.0);

    // metric values per (mode, band-or-avg) across seeds
    struct Cell {
        std::vector<double> rmse_h, r2_h, rmse_a, r2_a;
    };
    const int nb = truth.bands;
    std::vector<std::vector<Cell>> cells(2, std::vector<Cell>(nb + 1));
    const char* mode_names[2] = {"separate", "composite"};

    for (std::uint64_t seed : seeds) {
        for (int mi = 0; mi < 2; ++mi) {
            RestorationJob job{corrupted, m, config,
                               mi == 0 ? RestoreMode::per_band : RestoreMode::composite,
                               OutputMode::full_reconstruction, seed, log_progress};
            const Raster restored = restore(job).restored;
            double sh = 0, s2 = 0, sa = 0, s2a = 0;
            for (int b = 0; b < nb; ++b) {
                const double rh = rmse(restored, truth, b, m, Region::hidden);
                const double r2h = r2(restored, truth, b, m, Region::hidden);
                const double ra = rmse(restored, truth, b, m, Region::all);
                const double r2a = r2(restored, truth, b, m, Region::all);
                cells[mi][b].rmse_h.push_back(rh);
                cells[mi][b].r2_h.push_back(r2h);
                cells[mi][b].rmse_a.push_back(ra);
                cells[mi][b].r2_a.push_back(r2a);
                sh += rh;
                s2 += r2h;
                sa += ra;
                s2a += r2a;
            }
            cells[mi][nb].rmse_h.push_back(sh / nb);
            cells[mi][nb].r2_h.push_back(s2 / nb);
            cells[mi][nb].rmse_a.push_back(sa / nb);
            cells[mi][nb].r2_a.push_back(s2a / nb);
        }
    }

    ModeComparison out;
    for (int mi = 0; mi < 2; ++mi) {
        for (int b = 0; b <= nb; ++b) {
            ModeComparisonRow row;
            row.mode = mode_names[mi];
            row.band = b < nb ? truth.names[b] : "avg";
            row.rmse_hidden = median(cells[mi][b].rmse_h);
            row.r2_hidden = median(cells[mi][b].r2_h);
            row.rmse_all = median(cells[mi][b].rmse_a);
            row.r2_all = median(cells[mi][b].r2_a);
            out.medians.push_back(std::move(row));
        }
    }
    return out;
}

std::string ModeComparison::to_csv() const {
    std::string s = "mode,band,rmse_hidden,r2_hidden,rmse_all,r2_all\n";
    for (const auto& r : medians) {
        s += csv_line({r.mode, r.band, fmt_double(r.rmse_hidden), fmt_double(r.r2_hidden),
                       fmt_double(r.rmse_all), fmt_double(r.r2_all)});
    }
    return s;
}

}  // namespace dipfill
