#include "dipfill/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dipfill/csv.hpp"
#include "dipfill/errors.hpp"
#include "dipfill/rng.hpp"

namespace dipfill {

const char* region_name(Region r) {
    switch (r) {
        case Region::hidden: return "hidden";
        case Region::observed: return "observed";
        default: return "all";
    }
}

namespace {

bool in_region(const GapMask& m, std::size_t i, Region region) {
    switch (region) {
        case Region::hidden: return m.cells[i] == 0;
        case Region::observed: return m.cells[i] != 0;
        default: return true;
    }
}

void check_eval_dims(const char* op, const Raster& pred, const Raster& truth, int band,
                     const GapMask& m) {
    if (!pred.same_dims(truth)) {
        throw DimensionError(std::string(op) + ": pred and truth dims differ");
    }
    if (pred.height != m.height || pred.width != m.width) {
        throw DimensionError(std::string(op) + ": mask dims differ from rasters");
    }
    if (band < 0 || band >= pred.bands) {
        throw DimensionError(std::string(op) + ": band " + std::to_string(band) + " out of " +
                             std::to_string(pred.bands));
    }
}

}  // namespace

double rmse(const Raster& pred, const Raster& truth, int band, const GapMask& m, Region region) {
    check_eval_dims("rmse", pred, truth, band, m);
    const std::size_t pixels = pred.pixel_count();
    const double* p = pred.values.data() + band * pixels;
    const double* t = truth.values.data() + band * pixels;
    double ss = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < pixels; ++i) {
        if (!in_region(m, i, region)) continue;
        const double d = p[i] - t[i];
        ss += d * d;
        ++n;
    }
    if (n == 0) throw DegenerateError("rmse: empty evaluation region");
    return std::sqrt(ss / static_cast<double>(n));
}

double r2(const Raster& pred, const Raster& truth, int band, const GapMask& m, Region region) {
    check_eval_dims("r2", pred, truth, band, m);
    const std::size_t pixels = pred.pixel_count();
    const double* p = pred.values.data() + band * pixels;
    const double* t = truth.values.data() + band * pixels;
    double mean = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < pixels; ++i) {
        if (!in_region(m, i, region)) continue;
        mean += t[i];
        ++n;
    }
    if (n < 2) throw DegenerateError("r2: region needs at least 2 pixels");
    mean /= static_cast<double>(n);
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < pixels; ++i) {
        if (!in_region(m, i, region)) continue;
        const double dr = p[i] - t[i];
        const double dt = t[i] - mean;
        ss_res += dr * dr;
        ss_tot += dt * dt;
    }
    if (ss_tot == 0.0) throw DegenerateError("r2: truth has zero variance over the region");
    return 1.0 - ss_res / ss_tot;
}

MetricsReport compute_metrics(const Raster& pred, const Raster& truth, const GapMask& m) {
    MetricsReport rep;
    rep.band_names = truth.names;
    rep.entries.resize(pred.bands);
    const Region regions[3] = {Region::hidden, Region::observed, Region::all};
    const std::size_t pixels = pred.pixel_count();
    std::size_t counts[3] = {m.missing_count(), m.observed_count(), pixels};
    for (int b = 0; b < pred.bands; ++b) {
        for (int ri = 0; ri < 3; ++ri) {
            BandRegionMetrics& cell = rep.entries[b][ri];
            cell.pixels = counts[ri];
            if (counts[ri] == 0) {
                cell.rmse = std::numeric_limits<double>::quiet_NaN();
                cell.r2 = std::numeric_limits<double>::quiet_NaN();
                continue;
            }
            cell.rmse = rmse(pred, truth, b, m, regions[ri]);
            try {
                cell.r2 = r2(pred, truth, b, m, regions[ri]);
            } catch (const DegenerateError&) {
                cell.r2 = std::numeric_limits<double>::quiet_NaN();
            }
        }
    }
    return rep;
}

std::string MetricsReport::to_csv() const {
    std::string s = "band,region,rmse,r2,pixels\n";
    for (std::size_t b = 0; b < entries.size(); ++b) {
        const Region regions[3] = {Region::hidden, Region::observed, Region::all};
        for (int ri = 0; ri < 3; ++ri) {
            const auto& cell = entries[b][ri];
            s += csv_line({band_names[b], region_name(regions[ri]), fmt_double(cell.rmse),
                           fmt_double(cell.r2), std::to_string(cell.pixels)});
        }
    }
    return s;
}

Raster similarity_map(const Raster& pred, const Raster& truth) {
    if (!pred.same_dims(truth)) throw DimensionError("similarity_map: dims differ");
    Raster out = Raster::create(pred.bands + 1, pred.height, pred.width);
    out.names = truth.names;
    out.names.push_back("mean");
    const std::size_t pixels = pred.pixel_count();
    for (int b = 0; b < pred.bands; ++b) {
        for (std::size_t i = 0; i < pixels; ++i) {
            out.values[b * pixels + i] =
                1.0 - std::abs(pred.values[b * pixels + i] - truth.values[b * pixels + i]);
        }
    }
    double* mean_band = out.values.data() + static_cast<std::size_t>(pred.bands) * pixels;
    for (std::size_t i = 0; i < pixels; ++i) {
        double s = 0.0;
        for (int b = 0; b < pred.bands; ++b) s += out.values[b * pixels + i];
        mean_band[i] = s / pred.bands;
    }
    return out;
}

const std::vector<BaselineEntry>& reference_baselines() {
    static const std::vector<BaselineEntry> table = {
        {"Kriging", {0.010, 0.015, 0.023, 0.063}, {0.610, 0.627, 0.728, 0.690}},
        {"WLR", {0.010, 0.014, 0.023, 0.055}, {0.622, 0.694, 0.742, 0.765}},
        {"DS", {0.009, 0.012, 0.020, 0.052}, {0.685, 0.755, 0.792, 0.780}},
    };
    return table;
}

const BaselineEntry& reported_dip_baseline() {
    static const BaselineEntry row = {
        "DIP (reported)", {0.020, 0.024, 0.043, 0.052}, {0.812, 0.853, 0.874, 0.832}};
    return row;
}

BaselineComparison compare_to_baselines(const MetricsReport& report) {
    if (report.entries.size() < 4) {
        throw ContractError("compare_to_baselines: report covers " +
                            std::to_string(report.entries.size()) + " bands, need bands 1-4");
    }
    BaselineComparison out;
    out.rows = reference_baselines();
    out.rows.push_back(reported_dip_baseline());
    BaselineEntry measured;
    measured.method = "DIP (measured)";
    for (int b = 0; b < 4; ++b) {
        measured.rmse[b] = report.entries[b][0].rmse;  // hidden region
        measured.r2[b] = report.entries[b][0].r2;
    }
    out.rows.push_back(measured);
    for (int b = 0; b < 4; ++b) {
        double best_rmse = std::numeric_limits<double>::infinity();
        double best_r2 = -std::numeric_limits<double>::infinity();
        for (const auto& row : out.rows) {
            if (row.rmse[b] < best_rmse) {
                best_rmse = row.rmse[b];
                out.best_rmse[b] = row.method;
            }
            if (row.r2[b] > best_r2) {
                best_r2 = row.r2[b];
                out.best_r2[b] = row.method;
            }
        }
    }
    return out;
}

std::string BaselineComparison::to_csv() const {
    std::string s = "method,rmse_b1,rmse_b2,rmse_b3,rmse_b4,r2_b1,r2_b2,r2_b3,r2_b4\n";
    for (const auto& row : rows) {
        std::vector<std::string> fields{row.method};
        for (int b = 0; b < 4; ++b) fields.push_back(fmt_double(row.rmse[b]));
        for (int b = 0; b < 4; ++b) fields.push_back(fmt_double(row.r2[b]));
        s += csv_line(fields);
    }
    return s;
}

std::string BaselineComparison::to_text() const {
    char buf[160];
    std::string s;
    std::snprintf(buf, sizeof(buf), "%-16s %32s  %32s\n", "method", "RMSE (bands 1-4)",
                  "r2 (bands 1-4)");
    s += buf;
    for (const auto& row : rows) {
        std::string line;
        std::snprintf(buf, sizeof(buf), "%-16s", row.method.c_str());
        line += buf;
        for (int b = 0; b < 4; ++b) {
            std::snprintf(buf, sizeof(buf), " %7.3f%c", row.rmse[b],
                          best_rmse[b] == row.method ? '*' : ' ');
            line += buf;
        }
        line += " ";
        for (int b = 0; b < 4; ++b) {
            std::snprintf(buf, sizeof(buf), " %7.3f%c", row.r2[b],
                          best_r2[b] == row.method ? '*' : ' ');
            line += buf;
        }
        s += line + "\n";
    }
    return s;
}

double median(std::vector<double> values) {
    if (values.empty()) throw DegenerateError("median of empty set");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

SweepResult corruption_sweep(const Raster& truth, const std::vector<double>& fractions,
                             const HourglassConfig& config,
                             const std::vector<std::uint64_t>& seeds, int period,
                             double angle_slope, bool log_progress) {
    if (fractions.empty()) throw ConfigError("corruption_sweep: no fractions given");
    if (seeds.empty()) throw ConfigError("corruption_sweep: no seeds given");
    for (double f : fractions) {
        if (!(f > 0.0 && f < 1.0)) {
            throw ConfigError("corruption_sweep: fraction " + std::to_string(f) +
                              " outside (0,1)");
        }
    }
    SweepResult result;
    for (double fraction : fractions) {
        GapMask m;
        try {
            m = mask_for_fraction(truth.height, truth.width, fraction, period, angle_slope, 0);
        } catch (const Error& e) {
            throw ConfigError("corruption_sweep at fraction " + std::to_string(fraction) + ": " +
                              e.what());
        }
        const Raster corrupted = apply_mask(truth, m, 0.0);
        std::vector<double> rmse_avgs, r2_avgs;
        for (std::uint64_t seed : seeds) {
            RestorationJob job{corrupted, m, config, RestoreMode::composite,
                               OutputMode::full_reconstruction, seed, log_progress};
            Raster restored;
            try {
                restored = restore(job).restored;
            } catch (const NumericError& e) {
                throw NumericError("corruption_sweep at fraction " + std::to_string(fraction) +
                                       ", seed " + std::to_string(seed) + ": " + e.what(),
                                   e.iteration());
            }
            double rmse_sum = 0.0, r2_sum = 0.0;
            for (int b = 0; b < truth.bands; ++b) {
                const double rh = rmse(restored, truth, b, m, Region::hidden);
                const double r2h = r2(restored, truth, b, m, Region::hidden);
                result.rows.push_back({fraction, seed, truth.names[b], rh, r2h});
                rmse_sum += rh;
                r2_sum += r2h;
            }
            rmse_avgs.push_back(rmse_sum / truth.bands);
            r2_avgs.push_back(r2_sum / truth.bands);
        }
        result.medians.push_back({fraction, median(rmse_avgs), median(r2_avgs)});
    }
    return result;
}

std::string SweepResult::rows_csv() const {
    std::string s = "fraction,seed,band,rmse_hidden,r2_hidden\n";
    for (const auto& r : rows) {
        s += csv_line({fmt_double(r.fraction), std::to_string(r.seed), r.band,
                       fmt_double(r.rmse_hidden), fmt_double(r.r2_hidden)});
    }
    return s;
}

std::string SweepResult::medians_csv() const {
    std::string s = "fraction,rmse_med,r2_med\n";
    for (const auto& r : medians) {
        s += csv_line({fmt_double(r.fraction), fmt_double(r.rmse_med), fmt_double(r.r2_med)});
    }
    return s;
}

Raster make_synthetic_bumps(int bands, int height, int width, int bumps_per_band,
                            std::uint64_t seed) {
    if (bumps_per_band < 1) throw ConfigError("make_synthetic_bumps: needs >= 1 bump per band");
    Raster r = Raster::create(bands, height, width);
    Rng rng(seed);
    const std::size_t pixels = r.pixel_count();
    for (int b = 0; b < bands; ++b) {
        double* band = r.values.data() + b * pixels;
        for (int k = 0; k < bumps_per_band; ++k) {
            const double cx = rng.uniform(0.0, width);
            const double cy = rng.uniform(0.0, height);
            const double sigma = rng.uniform(std::max(2.0, width / 8.0), std::max(3.0, width / 3.0));
            const double amp = rng.uniform(0.4, 1.0);
            const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
            for (int y = 0; y < height; ++y)
                for (int x = 0; x < width; ++x) {
                    const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
                    band[static_cast<std::size_t>(y) * width + x] += amp * std::exp(-d2 * inv2s2);
                }
        }
        double lo = band[0], hi = band[0];
        for (std::size_t i = 0; i < pixels; ++i) {
            lo = std::min(lo, band[i]);
            hi = std::max(hi, band[i]);
        }
        const double span = hi > lo ? hi - lo : 1.0;
        for (std::size_t i = 0; i < pixels; ++i) {
            const double t = (band[i] - lo) / span;
            band[i] = (1.0 - t) * 0.05 + t * 0.95;
        }
    }
    return r;
}

Raster nearest_observed_fill(const Raster& corrupted, const GapMask& m) {
    if (corrupted.height != m.height || corrupted.width != m.width) {
        throw DimensionError("nearest_observed_fill: dims differ");
    }
    if (m.observed_count() == 0) {
        throw DegenerateError("nearest_observed_fill: no observed pixels");
    }
    std::vector<std::pair<int, int>> observed;
    observed.reserve(m.observed_count());
    for (int y = 0; y < m.height; ++y)
        for (int x = 0; x < m.width; ++x)
            if (m.observed(y, x)) observed.emplace_back(y, x);

    Raster out = corrupted;
    const std::size_t pixels = corrupted.pixel_count();
    for (int y = 0; y < m.height; ++y) {
        for (int x = 0; x < m.width; ++x) {
            if (m.observed(y, x)) continue;
            long best = std::numeric_limits<long>::max();
            std::pair<int, int> src{0, 0};
            for (const auto& [oy, ox] : observed) {
                const long d = static_cast<long>(oy - y) * (oy - y) +
                               static_cast<long>(ox - x) * (ox - x);
                if (d < best) {
                    best = d;
                    src = {oy, ox};
                }
            }
            for (int b = 0; b < corrupted.bands; ++b) {
                out.values[(static_cast<std::size_t>(b) * m.height + y) * m.width + x] =
                    corrupted.at(b, src.first, src.second);
            }
        }
    }
    out.nodata.reset();
    return out;
}

}  // namespace dipfill
