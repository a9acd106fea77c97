#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "dipfill/gap_mask.hpp"
#include "dipfill/raster.hpp"
#include "dipfill/restoration.hpp"

namespace dipfill {

enum class Region { hidden, observed, all };

const char* region_name(Region r);

// Root mean squared error of one band over the given region.
double rmse(const Raster& pred, const Raster& truth, int band, const GapMask& m, Region region);

// Coefficient of determination, 1 - SS_res/SS_tot, SS_tot about the truth
// mean over the region. Requires >= 2 pixels and nonzero truth variance.
double r2(const Raster& pred, const Raster& truth, int band, const GapMask& m, Region region);

struct BandRegionMetrics {
    double rmse = 0.0;
    double r2 = 0.0;  // NaN when the region is degenerate for r2
    std::size_t pixels = 0;
};

struct MetricsReport {
    std::vector<std::string> band_names;
    // entries[band][region] with region order hidden, observed, all
    std::vector<std::array<BandRegionMetrics, 3>> entries;

    std::string to_csv() const;  // band,region,rmse,r2,pixels
};

MetricsReport compute_metrics(const Raster& pred, const Raster& truth, const GapMask& m);

// Per-pixel 1 - |pred - truth| for each band, plus a trailing band-mean map
// (band name "mean"). 1 = identical.
Raster similarity_map(const Raster& pred, const Raster& truth);

// Published single-image gap-filling results for Landsat-7 bands 1-4 at 55%
// corruption, used as fixed reference constants.
struct BaselineEntry {
    std::string method;
    std::array<double, 4> rmse;
    std::array<double, 4> r2;
};

const std::vector<BaselineEntry>& reference_baselines();  // Kriging, WLR, DS
const BaselineEntry& reported_dip_baseline();             // published DIP row

struct BaselineComparison {
    std::vector<BaselineEntry> rows;      // references + measured
    std::array<std::string, 4> best_rmse; // method with lowest rmse per band
    std::array<std::string, 4> best_r2;   // method with highest r2 per band
    std::string to_csv() const;
    std::string to_text() const;          // fixed-width table, '*' marks best
};

// Measured hidden-region metrics side by side with the reference constants.
// The report must cover at least 4 bands.
BaselineComparison compare_to_baselines(const MetricsReport& report);

struct SweepRow {
    double fraction;
    std::uint64_t seed;
    std::string band;
    double rmse_hidden;
    double r2_hidden;
};

struct SweepMedianRow {
    double fraction;
    double rmse_med;
    double r2_med;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::vector<SweepMedianRow> medians;
    std::string rows_csv() const;     // fraction,seed,band,rmse_hidden,r2_hidden
    std::string medians_csv() const;  // fraction,rmse_med,r2_med
};

// For each fraction x seed: generate a stripe mask at that corruption
// level, corrupt the truth, restore in composite mode, and record
// hidden-region metrics. Medians are over the per-seed band averages.
SweepResult corruption_sweep(const Raster& truth, const std::vector<double>& fractions,
                             const HourglassConfig& config,
                             const std::vector<std::uint64_t>& seeds, int period = 16,
                             double angle_slope = 0.0, bool log_progress = false);

// Smooth multi-band test image: per band, a seeded sum of gaussian bumps
// rescaled to [0.05, 0.95].
Raster make_synthetic_bumps(int bands, int height, int width, int bumps_per_band,
                            std::uint64_t seed);

// Every missing pixel takes the value of the nearest observed pixel
// (euclidean distance, first match in row-major order on ties).
Raster nearest_observed_fill(const Raster& corrupted, const GapMask& m);

double median(std::vector<double> values);

}  // namespace dipfill
