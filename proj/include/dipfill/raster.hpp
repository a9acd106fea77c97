#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dipfill/tensor.hpp"

namespace dipfill {

// Multi-band image, band-major row-major doubles with nominal range [0,1].
struct Raster {
    int bands = 0;
    int height = 0;
    int width = 0;
    std::vector<std::string> names;
    std::vector<double> values;
    std::optional<double> nodata;

    static Raster create(int bands, int height, int width, double fill = 0.0);

    double& at(int b, int y, int x) {
        return values[(static_cast<std::size_t>(b) * height + y) * width + x];
    }
    double at(int b, int y, int x) const {
        return values[(static_cast<std::size_t>(b) * height + y) * width + x];
    }
    std::size_t pixel_count() const { return static_cast<std::size_t>(height) * width; }
    bool same_dims(const Raster& o) const {
        return bands == o.bands && height == o.height && width == o.width;
    }
};

Tensor raster_to_tensor(const Raster& r);
Raster tensor_to_raster(const Tensor& t, std::vector<std::string> names = {});

enum class RasterFormat { srf, pgm, ppm };

// Picks srf/pgm/ppm/pbm by file extension; throws ConfigError otherwise.
RasterFormat format_from_path(const std::string& path);

// SRF: `SRF1` magic, text header (bands/height/width/names), blank line,
// then 64-bit little-endian doubles band-major row-major. Bit-exact
// round-trip. PGM holds one band, PPM three; integer samples are scaled to
// [0,1] by the format's maxval.
Raster read_raster(const std::string& path, RasterFormat format);
Raster read_raster(const std::string& path);  // format from extension

// Atomic (temp file + rename). PGM/PPM write raw variants at maxval 255.
void write_raster(const Raster& r, const std::string& path, RasterFormat format);
void write_raster(const Raster& r, const std::string& path);

// Shared by the writers; writes bytes atomically via temp file + rename.
void write_file_atomic(const std::string& path, const std::string& bytes);

}  // namespace dipfill
