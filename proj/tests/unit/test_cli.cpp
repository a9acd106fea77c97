#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "dipfill/cli.hpp"
#include "dipfill/hourglass.hpp"

using namespace dipfill;
namespace fs = std::filesystem;

namespace {

fs::path work_dir() {
    auto dir = fs::temp_directory_path() / "dipfill_cli_tests";
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

fs::path tiny_config() {
    HourglassConfig c;
    c.depth = 2;
    c.n_d = {6, 8};
    c.n_u = {6, 8};
    c.n_s = {4, 4};
    c.k_d = {3, 3};
    c.k_u = {3, 3};
    c.k_s = {1, 1};
    c.in_channels = 2;
    c.out_channels = 1;
    c.num_iter = 40;
    const auto path = work_dir() / "tiny.cfg";
    save_config(c, path.string());
    return path;
}

}  // namespace

TEST_CASE("unknown flags exit 1 with a usage message") {
    CHECK(cli_main({"mask", "--bogus"}) == 1);
    CHECK(cli_main({"not-a-command"}) == 1);
    CHECK(cli_main({}) == 1);
}

TEST_CASE("full pipeline: mask, corrupt, restore, eval") {
    const auto dir = work_dir();
    const auto cfg = tiny_config();
    const std::string truth = (dir / "truth.srf").string();
    const std::string mask = (dir / "mask.pbm").string();
    const std::string corrupted = (dir / "corrupted.srf").string();
    const std::string restored = (dir / "restored.srf").string();
    const std::string metrics = (dir / "metrics.csv").string();
    const std::string sim = (dir / "similarity.srf").string();
    const std::string trace = (dir / "trace.csv").string();

    CHECK(cli_main({"synth", "--bands", "1", "--height", "16", "--width", "16", "--seed", "3",
                    "--out", truth}) == 0);
    CHECK(cli_main({"mask", "--height", "16", "--width", "16", "--fraction", "0.4", "--period",
                    "8", "--slope", "0", "--seed", "1", "--out", mask}) == 0);
    CHECK(cli_main({"corrupt", "--in", truth, "--mask", mask, "--fill", "0", "--out",
                    corrupted}) == 0);
    CHECK(cli_main({"restore", "--in", corrupted, "--mask", mask, "--config", cfg.string(),
                    "--mode", "composite", "--output-mode", "full", "--seed", "4", "--out",
                    restored, "--trace", trace, "--quiet"}) == 0);
    CHECK(cli_main({"eval", "--pred", restored, "--truth", truth, "--mask", mask, "--out-csv",
                    metrics, "--similarity-out", sim}) == 0);

    CHECK(fs::exists(restored));
    CHECK(fs::exists(sim));
    const std::string csv = slurp(metrics);
    CHECK(csv.rfind("band,region,rmse,r2,pixels\n", 0) == 0);
    CHECK(csv.find("band1,hidden,") != std::string::npos);
    const std::string tr = slurp(trace);
    CHECK(tr.rfind("iteration,loss\n", 0) == 0);

    // identical arguments and seeds give byte-identical outputs
    const std::string restored2 = (dir / "restored2.srf").string();
    const std::string metrics2 = (dir / "metrics2.csv").string();
    CHECK(cli_main({"restore", "--in", corrupted, "--mask", mask, "--config", cfg.string(),
                    "--mode", "composite", "--output-mode", "full", "--seed", "4", "--out",
                    restored2, "--quiet"}) == 0);
    CHECK(cli_main({"eval", "--pred", restored2, "--truth", truth, "--mask", mask, "--out-csv",
                    metrics2}) == 0);
    CHECK(slurp(restored) == slurp(restored2));
    CHECK(slurp(metrics) == slurp(metrics2));
}

TEST_CASE("dimension mismatches come back as exit 2 with a diagnostic") {
    const auto dir = work_dir();
    const auto cfg = tiny_config();
    const std::string truth = (dir / "truth2.srf").string();
    const std::string badmask = (dir / "badmask.pbm").string();
    CHECK(cli_main({"synth", "--bands", "1", "--height", "16", "--width", "16", "--out",
                    truth}) == 0);
    CHECK(cli_main({"mask", "--height", "8", "--width", "8", "--fraction", "0.4", "--period",
                    "4", "--out", badmask}) == 0);
    CHECK(cli_main({"restore", "--in", truth, "--mask", badmask, "--config", cfg.string(),
                    "--out", (dir / "nope.srf").string(), "--quiet"}) == 2);
}

TEST_CASE("missing or malformed inputs exit 2") {
    const auto dir = work_dir();
    CHECK(cli_main({"corrupt", "--in", (dir / "absent.srf").string(), "--mask",
                    (dir / "absent.pbm").string(), "--out", (dir / "x.srf").string()}) == 2);

    const auto garbage = dir / "garbage.srf";
    std::ofstream(garbage) << "not a raster";
    CHECK(cli_main({"corrupt", "--in", garbage.string(), "--mask",
                    (dir / "absent.pbm").string(), "--out", (dir / "x.srf").string()}) == 2);
}

TEST_CASE("selftest passes on a clean build") {
    CHECK(cli_main({"selftest"}) == 0);
}

TEST_CASE("per-band restore writes one trace per band") {
    const auto dir = work_dir();
    const auto cfg = tiny_config();
    const std::string truth = (dir / "multi.srf").string();
    const std::string mask = (dir / "multi_mask.pbm").string();
    const std::string restored = (dir / "multi_restored.srf").string();
    CHECK(cli_main({"synth", "--bands", "2", "--height", "16", "--width", "16", "--seed", "9",
                    "--out", truth}) == 0);
    CHECK(cli_main({"mask", "--height", "16", "--width", "16", "--fraction", "0.3", "--period",
                    "8", "--out", mask}) == 0);
    CHECK(cli_main({"restore", "--in", truth, "--mask", mask, "--config", cfg.string(), "--mode",
                    "per-band", "--seed", "2", "--out", restored, "--trace",
                    (dir / "t.csv").string(), "--quiet"}) == 0);
    CHECK(fs::exists(dir / "t.band1.csv"));
    CHECK(fs::exists(dir / "t.band2.csv"));
}
