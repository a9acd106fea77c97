#include "dipfill/raster.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dipfill/errors.hpp"

namespace dipfill {

Raster Raster::create(int bands, int height, int width, double fill) {
    if (bands < 1 || height < 1 || width < 1) {
        throw DimensionError("raster dims must be positive, got bands=" + std::to_string(bands) +
                             " height=" + std::to_string(height) +
                             " width=" + std::to_string(width));
    }
    Raster r;
    r.bands = bands;
    r.height = height;
    r.width = width;
    r.names.reserve(bands);
    for (int b = 0; b < bands; ++b) r.names.push_back("band" + std::to_string(b + 1));
    r.values.assign(static_cast<std::size_t>(bands) * height * width, fill);
    return r;
}

Tensor raster_to_tensor(const Raster& r) {
    return Tensor::from_data({r.bands, r.height, r.width}, r.values);
}

Raster tensor_to_raster(const Tensor& t, std::vector<std::string> names) {
    if (t.shape().size() != 3) {
        throw DimensionError("tensor_to_raster: expected C×H×W, got " + shape_str(t.shape()));
    }
    Raster r = Raster::create(t.shape()[0], t.shape()[1], t.shape()[2]);
    r.values = t.values();
    if (!names.empty()) {
        if (static_cast<int>(names.size()) != r.bands) {
            throw DimensionError("tensor_to_raster: " + std::to_string(names.size()) +
                                 " names for " + std::to_string(r.bands) + " bands");
        }
        r.names = std::move(names);
    }
    return r;
}

RasterFormat format_from_path(const std::string& path) {
    const auto dot = path.find_last_of('.');
    std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) {
        return static_cast<char>(std::tolower(c));
    });
    if (ext == "srf") return RasterFormat::srf;
    if (ext == "pgm") return RasterFormat::pgm;
    if (ext == "ppm") return RasterFormat::ppm;
    throw ConfigError("cannot infer raster format from path: " + path);
}

void write_file_atomic(const std::string& path, const std::string& bytes) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ParseError("cannot open for writing: " + tmp.string(), 0);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw ParseError("short write to " + tmp.string(), 0);
    }
    fs::rename(tmp, target);
}

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open file: " + path, 0);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Cursor over an in-memory file; every throw carries the byte offset.
struct Cursor {
    const std::string& buf;
    std::string context;
    std::size_t pos = 0;

    bool eof() const { return pos >= buf.size(); }
    char peek() const { return buf[pos]; }

    [[noreturn]] void fail(const std::string& msg) const { fail(msg, pos); }
    [[noreturn]] void fail(const std::string& msg, std::size_t at) const {
        throw ParseError(context.empty() ? msg : context + ": " + msg, at);
    }

    std::string line() {
        const auto nl = buf.find('\n', pos);
        if (nl == std::string::npos) fail("unexpected end of file in header");
        std::string s = buf.substr(pos, nl - pos);
        pos = nl + 1;
        if (!s.empty() && s.back() == '\r') s.pop_back();
        return s;
    }

    // netpbm-style token: skips whitespace and '#' comments.
    std::string token() {
        while (!eof()) {
            char c = buf[pos];
            if (c == '#') {
                while (!eof() && buf[pos] != '\n') ++pos;
            } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                ++pos;
            } else {
                break;
            }
        }
        if (eof()) fail("unexpected end of file");
        const std::size_t start = pos;
        while (!eof() && !std::isspace(static_cast<unsigned char>(buf[pos]))) ++pos;
        return buf.substr(start, pos - start);
    }

    long int_token(const char* what) {
        const std::size_t at = pos;
        const std::string t = token();
        try {
            std::size_t used = 0;
            const long v = std::stol(t, &used);
            if (used != t.size()) throw std::invalid_argument(t);
            return v;
        } catch (const std::exception&) {
            fail(std::string("expected integer for ") + what + ", got '" + t + "'", at);
        }
    }
};

std::uint64_t load_le64(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

void store_le64(std::uint64_t v, std::string& out) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

Raster read_srf(const std::string& bytes, const std::string& context) {
    Cursor c{bytes, context};
    if (c.line() != "SRF1") c.fail("bad magic, expected SRF1", 0);

    auto header_field = [&](const char* key) {
        const std::size_t at = c.pos;
        const std::string l = c.line();
        const std::string prefix = std::string(key) + "=";
        if (l.rfind(prefix, 0) != 0) {
            c.fail("expected header line '" + prefix + "...', got '" + l + "'", at);
        }
        return l.substr(prefix.size());
    };

    long bands, height, width;
    try {
        bands = std::stol(header_field("bands"));
        height = std::stol(header_field("height"));
        width = std::stol(header_field("width"));
    } catch (const ParseError&) {
        throw;
    } catch (const std::exception&) {
        c.fail("malformed integer in header");
    }
    if (bands < 1 || height < 1 || width < 1) {
        c.fail("non-positive dimension in header");
    }
    const std::string names_line = header_field("names");
    if (!c.line().empty()) c.fail("expected blank line before payload");

    std::vector<std::string> names;
    std::stringstream ns(names_line);
    std::string item;
    while (std::getline(ns, item, ',')) names.push_back(item);
    if (names.size() != static_cast<std::size_t>(bands)) {
        c.fail("header names count " + std::to_string(names.size()) +
               " does not match bands=" + std::to_string(bands));
    }

    const std::size_t count = static_cast<std::size_t>(bands) * height * width;
    if (bytes.size() - c.pos != count * 8) {
        c.fail("payload holds " + std::to_string((bytes.size() - c.pos) / 8) +
               " values, header promises " + std::to_string(count));
    }
    Raster r = Raster::create(static_cast<int>(bands), static_cast<int>(height),
                              static_cast<int>(width));
    r.names = std::move(names);
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + c.pos);
    for (std::size_t i = 0; i < count; ++i, p += 8) {
        const double v = std::bit_cast<double>(load_le64(p));
        if (!std::isfinite(v)) c.fail("non-finite value in payload", c.pos + i * 8);
        r.values[i] = v;
    }
    return r;
}

std::string srf_bytes(const Raster& r) {
    std::string out = "SRF1\n";
    out += "bands=" + std::to_string(r.bands) + "\n";
    out += "height=" + std::to_string(r.height) + "\n";
    out += "width=" + std::to_string(r.width) + "\n";
    out += "names=";
    for (int b = 0; b < r.bands; ++b) {
        const std::string& n = r.names[b];
        if (n.find(',') != std::string::npos || n.find('\n') != std::string::npos) {
            throw FormatError("band name may not contain ',' or newline: " + n);
        }
        if (b) out += ",";
        out += n;
    }
    out += "\n\n";
    out.reserve(out.size() + r.values.size() * 8);
    for (double v : r.values) store_le64(std::bit_cast<std::uint64_t>(v), out);
    return out;
}

Raster read_pnm(const std::string& bytes, const std::string& context) {
    Cursor c{bytes, context};
    const std::string magic = c.token();
    int bands;
    bool raw;
    if (magic == "P2") { bands = 1; raw = false; }
    else if (magic == "P5") { bands = 1; raw = true; }
    else if (magic == "P3") { bands = 3; raw = false; }
    else if (magic == "P6") { bands = 3; raw = true; }
    else c.fail("bad magic, expected P2/P3/P5/P6, got '" + magic + "'", 0);

    const long width = c.int_token("width");
    const long height = c.int_token("height");
    const long maxval = c.int_token("maxval");
    if (width < 1 || height < 1) c.fail("non-positive dimensions");
    if (maxval < 1 || maxval > 65535) c.fail("maxval out of range [1,65535]");

    Raster r = Raster::create(bands, static_cast<int>(height), static_cast<int>(width));
    r.names = bands == 1 ? std::vector<std::string>{"gray"}
                         : std::vector<std::string>{"red", "green", "blue"};
    const double maxval_d = static_cast<double>(maxval);
    const std::size_t pixels = r.pixel_count();

    if (raw) {
        ++c.pos;  // single whitespace byte after maxval
        const int bytes_per = maxval > 255 ? 2 : 1;
        const std::size_t need = pixels * bands * bytes_per;
        if (bytes.size() - c.pos < need) {
            c.fail("truncated payload, need " + std::to_string(need) + " bytes");
        }
        const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + c.pos);
        for (std::size_t i = 0; i < pixels; ++i) {
            for (int b = 0; b < bands; ++b) {
                long v = *p++;
                if (bytes_per == 2) v = (v << 8) | *p++;  // big-endian per netpbm
                r.values[b * pixels + i] = static_cast<double>(v) / maxval_d;
            }
        }
    } else {
        for (std::size_t i = 0; i < pixels; ++i) {
            for (int b = 0; b < bands; ++b) {
                const long v = c.int_token("sample");
                if (v < 0 || v > maxval) c.fail("sample out of range");
                r.values[b * pixels + i] = static_cast<double>(v) / maxval_d;
            }
        }
    }
    return r;
}

std::string pnm_bytes(const Raster& r, RasterFormat format) {
    const int bands = format == RasterFormat::pgm ? 1 : 3;
    if (r.bands != bands) {
        throw FormatError(std::string(format == RasterFormat::pgm ? "pgm" : "ppm") +
                          " holds exactly " + std::to_string(bands) + " band(s), raster has " +
                          std::to_string(r.bands));
    }
    std::string out = bands == 1 ? "P5\n" : "P6\n";
    out += std::to_string(r.width) + " " + std::to_string(r.height) + "\n255\n";
    const std::size_t pixels = r.pixel_count();
    for (std::size_t i = 0; i < pixels; ++i) {
        for (int b = 0; b < bands; ++b) {
            const double v = std::clamp(r.values[b * pixels + i], 0.0, 1.0);
            out.push_back(static_cast<char>(std::lround(v * 255.0)));
        }
    }
    return out;
}

}  // namespace

Raster read_raster(const std::string& path, RasterFormat format) {
    const std::string bytes = read_file(path);
    return format == RasterFormat::srf ? read_srf(bytes, path) : read_pnm(bytes, path);
}

Raster read_raster(const std::string& path) {
    return read_raster(path, format_from_path(path));
}

void write_raster(const Raster& r, const std::string& path, RasterFormat format) {
    write_file_atomic(path, format == RasterFormat::srf ? srf_bytes(r) : pnm_bytes(r, format));
}

void write_raster(const Raster& r, const std::string& path) {
    write_raster(r, path, format_from_path(path));
}

}  // namespace dipfill
