#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dipfill/raster.hpp"

namespace dipfill {

// Per-pixel observation grid: 1 = observed, 0 = missing. Immutable once
// generated; the convention matches the masked loss (gradient flows only
// where cells == 1).
struct GapMask {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> cells;
    // Generator parameters, preserved through PBM round-trips.
    std::string provenance;

    bool observed(int y, int x) const {
        return cells[static_cast<std::size_t>(y) * width + x] != 0;
    }
    std::size_t missing_count() const;
    std::size_t observed_count() const;
};

// Fraction of missing cells, zeros/(H*W).
double corruption_fraction(const GapMask& m);

// Periodic diagonal stripes mimicking the failed-scan-line pattern: cell
// (r,c) is missing when (c + round(angle_slope*r) + phase) mod period falls
// inside the stripe width. With wedge=true the width grows linearly from 0
// at the centre column to max_width at the left/right edges; wedge=false
// keeps it constant at max_width.
GapMask slc_wedge_mask(int height, int width, int period, int max_width, int phase,
                       double angle_slope, bool wedge = true);

// Constant-width stripe mask tuned so the realized corruption fraction lands
// within ±0.01 of target. Fractional widths are realized by per-row
// dithering of the stripe width.
GapMask mask_for_fraction(int height, int width, double target, int period,
                          double angle_slope = 0.0, int phase = 0);

// Missing cells set to `fill` in every band; the result records `fill` as
// its nodata value.
Raster apply_mask(const Raster& r, const GapMask& m, double fill);

// Portable bitmap (P1) with 1 encoding a missing cell; an optional comment
// line carries the generator parameters. write/read round-trips bit-exactly.
void write_mask_pbm(const GapMask& m, const std::string& path);
GapMask read_mask_pbm(const std::string& path);

}  // namespace dipfill
