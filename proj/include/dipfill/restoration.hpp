#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dipfill/gap_mask.hpp"
#include "dipfill/hourglass.hpp"
#include "dipfill/raster.hpp"

namespace dipfill {

enum class RestoreMode { per_band, composite };
enum class OutputMode { full_reconstruction, splice };

struct LossTrace {
    std::string label;                                // "composite" or "band<k>"
    std::vector<double> losses;                       // one per iteration, pre-step
    std::vector<std::pair<int, double>> checkpoints;  // (iteration, elapsed seconds)
};

struct RestorationJob {
    Raster corrupted;
    GapMask mask;
    HourglassConfig config;
    RestoreMode mode = RestoreMode::composite;
    OutputMode output = OutputMode::full_reconstruction;
    std::uint64_t seed = 0;
    bool log_progress = false;  // plain-text iteration log on stderr
};

struct RestorationResult {
    Raster restored;
    std::vector<LossTrace> traces;  // one per optimization
};

// Fits the network to the observed pixels for config.num_iter iterations of
// [perturb input -> forward -> masked mse -> backward -> adam] and returns
// the forward pass on the unperturbed base input. Deterministic given the
// job seed. Rasters whose dims are not divisible by 2^depth are
// reflection-padded for training and cropped afterwards.
RestorationResult restore(const RestorationJob& job);

// Observed cells from `corrupted` (the original values), missing cells from
// `restored`.
Raster splice(const Raster& restored, const Raster& corrupted, const GapMask& m);

struct ModeComparisonRow {
    std::string mode;  // "separate" | "composite"
    std::string band;  // band name or "avg"
    double rmse_hidden, r2_hidden, rmse_all, r2_all;
};

struct ModeComparison {
    std::vector<ModeComparisonRow> medians;  // per mode x (band.. + avg), over seeds
    std::string to_csv() const;
};

// Runs both training modes for every seed on the masked version of `truth`
// and reports per-band and band-average hidden/all metrics, median across
// seeds.
ModeComparison run_separate_vs_composite(const Raster& truth, const GapMask& m,
                                         const HourglassConfig& config,
                                         const std::vector<std::uint64_t>& seeds,
                                         bool log_progress = false);

// Two-column CSV (iteration, loss).
std::string trace_to_csv(const LossTrace& trace);
void write_trace_csv(const LossTrace& trace, const std::string& path);

}  // namespace dipfill
