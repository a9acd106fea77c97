#include "dipfill/gap_mask.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "dipfill/errors.hpp"

namespace dipfill {

std::size_t GapMask::missing_count() const {
    std::size_t n = 0;
    for (auto c : cells) n += c == 0;
    return n;
}

std::size_t GapMask::observed_count() const {
    return cells.size() - missing_count();
}

double corruption_fraction(const GapMask& m) {
    if (m.cells.empty()) return 0.0;
    return static_cast<double>(m.missing_count()) / static_cast<double>(m.cells.size());
}

namespace {

void check_stripe_geometry(int height, int width, int period, double angle_slope) {
    if (height < 1 || width < 1) throw DimensionError("mask dims must be positive");
    if (period < 2) throw ConfigError("stripe period must be >= 2");
    if (std::abs(angle_slope) > 1.0) throw ConfigError("angle_slope must lie in [-1, 1]");
}

// Shared stripe rasterizer. width_at(r, c) gives the stripe width in
// columns for that cell; a cell is missing when its offset within the
// period falls below the width.
GapMask generate_stripes(int height, int width, int period, int phase, double angle_slope,
                         const std::function<double(int, int)>& width_at) {
    GapMask m;
    m.height = height;
    m.width = width;
    m.cells.assign(static_cast<std::size_t>(height) * width, 1);
    for (int r = 0; r < height; ++r) {
        const long shift = std::lround(angle_slope * r) + phase;
        for (int c = 0; c < width; ++c) {
            long d = (c + shift) % period;
            if (d < 0) d += period;
            if (static_cast<double>(d) < width_at(r, c)) {
                m.cells[static_cast<std::size_t>(r) * width + c] = 0;
            }
        }
    }
    return m;
}

}  // namespace

GapMask slc_wedge_mask(int height, int width, int period, int max_width, int phase,
                       double angle_slope, bool wedge) {
    check_stripe_geometry(height, width, period, angle_slope);
    if (max_width < 0 || max_width >= period) {
        throw ConfigError("max_width must satisfy 0 <= max_width < period, got " +
                          std::to_string(max_width) + " with period " + std::to_string(period) +
                          " (stripes would merge)");
    }
    const double centre = (width - 1) / 2.0;
    auto width_at = [&](int, int c) -> double {
        if (!wedge) return static_cast<double>(max_width);
        if (centre <= 0.0) return 0.0;
        return max_width * std::abs(c - centre) / centre;
    };
    GapMask m = generate_stripes(height, width, period, phase, angle_slope, width_at);
    std::ostringstream prov;
    prov << "slc_wedge period=" << period << " max_width=" << max_width << " phase=" << phase
         << " slope=" << angle_slope << " wedge=" << (wedge ? 1 : 0);
    m.provenance = prov.str();
    return m;
}

namespace {

// Constant-width stripes with the fractional part of `stripe_width`
// dithered across rows (Bresenham: row r gets floor(w(r+1)) - floor(w r)).
GapMask dithered_stripes(int height, int width, int period, int phase, double angle_slope,
                         double stripe_width) {
    auto width_at = [&](int r, int) -> double {
        return std::floor(stripe_width * (r + 1)) - std::floor(stripe_width * r);
    };
    return generate_stripes(height, width, period, phase, angle_slope, width_at);
}

}  // namespace

GapMask mask_for_fraction(int height, int width, double target, int period, double angle_slope,
                          int phase) {
    check_stripe_geometry(height, width, period, angle_slope);
    const double max_fraction = static_cast<double>(period - 1) / period;
    if (!(target > 0.0 && target < 1.0) || target >= max_fraction) {
        throw ConfigError("target fraction " + std::to_string(target) +
                          " not achievable; this geometry supports (0, " +
                          std::to_string(max_fraction) + ")");
    }

    auto fraction_of = [&](double w) {
        return corruption_fraction(dithered_stripes(height, width, period, phase, angle_slope, w));
    };

    // Realized fraction is a near-monotone step function of the stripe
    // width; bisect, then refine over the 1/height dither grid around the
    // bisection point.
    double lo = 0.0, hi = static_cast<double>(period - 1);
    for (int it = 0; it < 48; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (fraction_of(mid) < target) lo = mid;
        else hi = mid;
    }
    const double grid = 1.0 / height;
    double best_w = lo;
    double best_err = std::abs(fraction_of(lo) - target);
    for (int j = -static_cast<int>(2.0 / grid); j <= static_cast<int>(2.0 / grid); ++j) {
        const double w = lo + j * grid;
        if (w < 0.0 || w > period - 1) continue;
        const double err = std::abs(fraction_of(w) - target);
        if (err < best_err) {
            best_err = err;
            best_w = w;
        }
    }

    GapMask m = dithered_stripes(height, width, period, phase, angle_slope, best_w);
    const double realized = corruption_fraction(m);
    if (std::abs(realized - target) > 0.01) {
        throw ConfigError("mask_for_fraction: best achievable fraction " +
                          std::to_string(realized) + " misses target " + std::to_string(target) +
                          " by more than 0.01");
    }
    std::ostringstream prov;
    prov << "fraction target=" << target << " realized=" << realized << " period=" << period
         << " phase=" << phase << " slope=" << angle_slope << " stripe_width=" << best_w;
    m.provenance = prov.str();
    return m;
}

Raster apply_mask(const Raster& r, const GapMask& m, double fill) {
    if (r.height != m.height || r.width != m.width) {
        throw DimensionError("apply_mask: raster " + std::to_string(r.height) + "x" +
                             std::to_string(r.width) + " vs mask " + std::to_string(m.height) +
                             "x" + std::to_string(m.width));
    }
    Raster out = r;
    const std::size_t pixels = r.pixel_count();
    for (int b = 0; b < r.bands; ++b) {
        double* band = out.values.data() + b * pixels;
        for (std::size_t i = 0; i < pixels; ++i) {
            if (m.cells[i] == 0) band[i] = fill;
        }
    }
    out.nodata = fill;
    return out;
}

void write_mask_pbm(const GapMask& m, const std::string& path) {
    std::string out = "P1\n";
    if (!m.provenance.empty()) out += "# " + m.provenance + "\n";
    out += std::to_string(m.width) + " " + std::to_string(m.height) + "\n";
    for (int r = 0; r < m.height; ++r) {
        for (int c = 0; c < m.width; ++c) {
            // PBM: 1 = black = missing
            out += m.cells[static_cast<std::size_t>(r) * m.width + c] ? '0' : '1';
        }
        out += '\n';
    }
    write_file_atomic(path, out);
}

GapMask read_mask_pbm(const std::string& path) {
    std::ifstream check;
    std::string bytes;
    {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw ParseError("cannot open file: " + path, 0);
        std::ostringstream ss;
        ss << in.rdbuf();
        bytes = ss.str();
    }
    std::size_t pos = 0;
    auto fail = [&](const std::string& msg) -> void { throw ParseError(path + ": " + msg, pos); };

    if (bytes.rfind("P1", 0) != 0) fail("bad magic, expected P1");
    pos = 2;
    std::string provenance;
    long dims[2] = {-1, -1};
    int have_dims = 0;
    while (have_dims < 2) {
        if (pos >= bytes.size()) fail("unexpected end of header");
        const char ch = bytes[pos];
        if (ch == '#') {
            const auto nl = bytes.find('\n', pos);
            std::string comment = bytes.substr(pos + 1, nl - pos - 1);
            if (!comment.empty() && comment[0] == ' ') comment.erase(0, 1);
            if (provenance.empty()) provenance = comment;
            pos = nl == std::string::npos ? bytes.size() : nl + 1;
        } else if (std::isspace(static_cast<unsigned char>(ch))) {
            ++pos;
        } else if (std::isdigit(static_cast<unsigned char>(ch))) {
            long v = 0;
            while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
                v = v * 10 + (bytes[pos] - '0');
                ++pos;
            }
            dims[have_dims++] = v;
        } else {
            fail("unexpected character in header");
        }
    }
    if (dims[0] < 1 || dims[1] < 1) fail("non-positive dimensions");

    GapMask m;
    m.width = static_cast<int>(dims[0]);
    m.height = static_cast<int>(dims[1]);
    m.provenance = provenance;
    m.cells.reserve(static_cast<std::size_t>(m.width) * m.height);
    while (m.cells.size() < static_cast<std::size_t>(m.width) * m.height) {
        if (pos >= bytes.size()) fail("truncated pixel data");
        const char ch = bytes[pos];
        if (ch == '0') m.cells.push_back(1);        // white = observed
        else if (ch == '1') m.cells.push_back(0);   // black = missing
        else if (std::isspace(static_cast<unsigned char>(ch))) { /* skip */ }
        else fail("unexpected character in pixel data");
        ++pos;
    }
    return m;
}

}  // namespace dipfill
