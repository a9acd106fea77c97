#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "dipfill/errors.hpp"
#include "dipfill/raster.hpp"
#include "dipfill/rng.hpp"

using namespace dipfill;

namespace {

std::filesystem::path temp_file(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "dipfill_io_tests";
    std::filesystem::create_directories(dir);
    return dir / name;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

Raster random_raster(Rng& rng, int bands, int h, int w) {
    Raster r = Raster::create(bands, h, w);
    for (auto& v : r.values) v = rng.uniform();
    return r;
}

}  // namespace

TEST_CASE("SRF round-trip is bit-exact for 100 seeded random rasters") {
    Rng rng(2025);
    for (int i = 0; i < 100; ++i) {
        const int bands = 1 + static_cast<int>(rng.below(5));
        const int h = 1 + static_cast<int>(rng.below(12));
        const int w = 1 + static_cast<int>(rng.below(12));
        Raster r = random_raster(rng, bands, h, w);
        const auto path = temp_file("rt" + std::to_string(i % 4) + ".srf");
        write_raster(r, path.string());
        Raster back = read_raster(path.string());
        CHECK(back.bands == r.bands);
        CHECK(back.height == r.height);
        CHECK(back.width == r.width);
        CHECK(back.names == r.names);
        CHECK(back.values == r.values);
    }
}

TEST_CASE("1x1x1 SRF file size is header bytes plus 8") {
    Raster r = Raster::create(1, 1, 1, 0.5);
    const auto path = temp_file("tiny.srf");
    write_raster(r, path.string());
    const std::string header = "SRF1\nbands=1\nheight=1\nwidth=1\nnames=band1\n\n";
    CHECK(std::filesystem::file_size(path) == header.size() + 8);
    CHECK(slurp(path).substr(0, header.size()) == header);
}

TEST_CASE("writes are deterministic byte for byte") {
    Rng rng(7);
    Raster r = random_raster(rng, 2, 5, 3);
    const auto p1 = temp_file("det1.srf");
    const auto p2 = temp_file("det2.srf");
    write_raster(r, p1.string());
    write_raster(r, p2.string());
    CHECK(slurp(p1) == slurp(p2));
}

TEST_CASE("PGM scaling endpoints and round trip") {
    const auto path = temp_file("gray.pgm");
    {
        std::ofstream out(path, std::ios::binary);
        out << "P5\n2 1\n255\n";
        out.put(static_cast<char>(255));
        out.put(static_cast<char>(0));
    }
    Raster r = read_raster(path.string());
    CHECK(r.bands == 1);
    CHECK(r.values[0] == 1.0);
    CHECK(r.values[1] == 0.0);

    // plain-text variant parses the same
    const auto plain = temp_file("gray_plain.pgm");
    {
        std::ofstream out(plain, std::ios::binary);
        out << "P2\n# comment\n2 1\n255\n255 0\n";
    }
    Raster rp = read_raster(plain.string());
    CHECK(rp.values == r.values);

    // 8-bit quantized values survive a write/read cycle exactly
    Raster q = Raster::create(1, 4, 4);
    Rng rng(3);
    for (auto& v : q.values) v = static_cast<double>(rng.below(256)) / 255.0;
    const auto qp = temp_file("quantized.pgm");
    write_raster(q, qp.string());
    CHECK(read_raster(qp.string()).values == q.values);
}

TEST_CASE("16-bit PGM samples are big-endian") {
    const auto path = temp_file("deep.pgm");
    {
        std::ofstream out(path, std::ios::binary);
        out << "P5\n1 1\n65535\n";
        out.put(static_cast<char>(0x80));
        out.put(static_cast<char>(0x00));
    }
    Raster r = read_raster(path.string());
    CHECK(r.values[0] == doctest::Approx(32768.0 / 65535.0));
}

TEST_CASE("PPM carries three bands") {
    Rng rng(9);
    Raster rgb = Raster::create(3, 2, 2);
    for (auto& v : rgb.values) v = static_cast<double>(rng.below(256)) / 255.0;
    const auto path = temp_file("color.ppm");
    write_raster(rgb, path.string());
    Raster back = read_raster(path.string());
    CHECK(back.bands == 3);
    CHECK(back.values == rgb.values);
}

TEST_CASE("band-count rules are enforced per format") {
    Raster four = Raster::create(4, 2, 2);
    CHECK_THROWS_AS(write_raster(four, temp_file("bad.pgm").string()), FormatError);
    CHECK_THROWS_AS(write_raster(four, temp_file("bad.ppm").string()), FormatError);
    write_raster(four, temp_file("ok.srf").string());  // srf takes any band count
}

TEST_CASE("parse errors carry a byte offset") {
    const auto path = temp_file("bad_magic.srf");
    {
        std::ofstream out(path, std::ios::binary);
        out << "SRX1\nbands=1\n";
    }
    try {
        read_raster(path.string());
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.byte_offset() == 0);
        CHECK(std::string(e.what()).find("magic") != std::string::npos);
    }

    const auto trunc = temp_file("trunc.srf");
    {
        std::ofstream out(trunc, std::ios::binary);
        out << "SRF1\nbands=1\nheight=2\nwidth=2\nnames=band1\n\n";
        out.put('x');  // payload should be 32 bytes
    }
    CHECK_THROWS_AS(read_raster(trunc.string()), ParseError);

    const auto badnames = temp_file("badnames.srf");
    {
        std::ofstream out(badnames, std::ios::binary);
        out << "SRF1\nbands=2\nheight=1\nwidth=1\nnames=only_one\n\n";
        for (int i = 0; i < 16; ++i) out.put('\0');
    }
    CHECK_THROWS_AS(read_raster(badnames.string()), ParseError);
}

TEST_CASE("unknown extension is rejected") {
    CHECK_THROWS_AS(format_from_path("image.tiff"), ConfigError);
    CHECK(format_from_path("IMAGE.SRF") == RasterFormat::srf);
}
