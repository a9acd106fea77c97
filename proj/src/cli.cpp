#include "dipfill/cli.hpp"

#include <cstdio>
#include <sstream>

#include <CLI11.hpp>

#include "dipfill/csv.hpp"
#include "dipfill/errors.hpp"
#include "dipfill/evaluation.hpp"
#include "dipfill/gap_mask.hpp"
#include "dipfill/hourglass.hpp"
#include "dipfill/raster.hpp"
#include "dipfill/restoration.hpp"
#include "dipfill/selftest.hpp"

namespace dipfill {

namespace {

std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw ConfigError("cannot parse '" + item + "' as a number");
        }
    }
    if (out.empty()) throw ConfigError("empty list: " + s);
    return out;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& s) {
    std::vector<std::uint64_t> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stoull(item));
        } catch (const std::exception&) {
            throw ConfigError("cannot parse '" + item + "' as a seed");
        }
    }
    if (out.empty()) throw ConfigError("empty seed list: " + s);
    return out;
}

// Mask files use PBM; rasters use their own extension dispatch.
GapMask load_mask(const std::string& path) { return read_mask_pbm(path); }

struct MaskArgs {
    int height = 0, width = 0;
    double fraction = -1.0;
    int max_width = -1;
    int period = 16;
    double slope = 0.2;
    int phase = -1;
    std::uint64_t seed = 0;
    std::string out;
};

struct RestoreArgs {
    std::string in, mask, config, out, trace;
    std::string mode = "composite";
    std::string output_mode = "full";
    std::uint64_t seed = 0;
    bool seed_given = false;
    bool quiet = false;
};

std::string trace_path_for(const std::string& base, const std::string& label, bool single) {
    if (single) return base;
    const auto dot = base.find_last_of('.');
    if (dot == std::string::npos) return base + "." + label;
    return base.substr(0, dot) + "." + label + base.substr(dot);
}

int run(CLI::App& app, const std::vector<std::string>& args) {
    // CLI11 wants argv reversed, without the program name.
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
    return 0;
}

}  // namespace

int cli_main(const std::vector<std::string>& args) {
    CLI::App app{"Single-image gap filling for multi-band rasters (deep image prior)"};
    app.require_subcommand(1);

    // --- mask ---
    MaskArgs ma;
    auto* mask_cmd = app.add_subcommand("mask", "Generate a stripe gap mask (PBM output)");
    mask_cmd->add_option("--height", ma.height, "Mask height")->required();
    mask_cmd->add_option("--width", ma.width, "Mask width")->required();
    auto* frac_opt =
        mask_cmd->add_option("--fraction", ma.fraction, "Target corruption fraction in (0,1)");
    auto* width_opt =
        mask_cmd->add_option("--max-width", ma.max_width, "Maximum stripe width (wedge profile)");
    frac_opt->excludes(width_opt);
    mask_cmd->add_option("--period", ma.period, "Stripe period in columns (default 16)");
    mask_cmd->add_option("--slope", ma.slope, "Stripe slope in [-1,1] (default 0.2)");
    auto* phase_opt =
        mask_cmd->add_option("--phase", ma.phase, "Stripe phase (default derived from seed)");
    mask_cmd->add_option("--seed", ma.seed, "Seed; sets the phase when --phase is omitted");
    mask_cmd->add_option("--out", ma.out, "Output PBM path")->required();

    // --- corrupt ---
    std::string c_in, c_mask, c_out;
    double c_fill = 0.0;
    auto* corrupt_cmd = app.add_subcommand("corrupt", "Overlay a gap mask on a raster");
    corrupt_cmd->add_option("--in", c_in, "Input raster")->required();
    corrupt_cmd->add_option("--mask", c_mask, "Gap mask (PBM)")->required();
    corrupt_cmd->add_option("--fill", c_fill, "Fill value for missing cells (default 0)");
    corrupt_cmd->add_option("--out", c_out, "Output raster")->required();

    // --- restore ---
    RestoreArgs ra;
    auto* restore_cmd = app.add_subcommand("restore", "Fill gaps by fitting a network");
    restore_cmd->add_option("--in", ra.in, "Corrupted raster")->required();
    restore_cmd->add_option("--mask", ra.mask, "Gap mask (PBM)")->required();
    restore_cmd->add_option("--config", ra.config,
                            "Network config file (default: reference architecture)");
    restore_cmd->add_option("--mode", ra.mode, "per-band | composite (default composite)")
        ->check(CLI::IsMember({"per-band", "composite"}));
    restore_cmd
        ->add_option("--output-mode", ra.output_mode, "full | splice (default full)")
        ->check(CLI::IsMember({"full", "splice"}));
    auto* seed_opt = restore_cmd->add_option("--seed", ra.seed, "Master seed (default: config seed)");
    restore_cmd->add_option("--out", ra.out, "Restored raster path")->required();
    restore_cmd->add_option("--trace", ra.trace, "Loss trace CSV path");
    restore_cmd->add_flag("--quiet", ra.quiet, "Suppress the iteration log");

    // --- eval ---
    std::string e_pred, e_truth, e_mask, e_csv, e_sim;
    auto* eval_cmd = app.add_subcommand("eval", "Metrics of a prediction against ground truth");
    eval_cmd->add_option("--pred", e_pred, "Predicted raster")->required();
    eval_cmd->add_option("--truth", e_truth, "Ground-truth raster")->required();
    eval_cmd->add_option("--mask", e_mask, "Gap mask (PBM)")->required();
    eval_cmd->add_option("--out-csv", e_csv, "Metrics CSV path")->required();
    eval_cmd->add_option("--similarity-out", e_sim, "Similarity map raster path");

    // --- sweep ---
    std::string s_in, s_fractions = "0.03,0.06,0.15,0.35,0.55", s_seeds = "1,2,3", s_cfg;
    std::string s_csv, s_median_csv;
    int s_period = 16;
    double s_slope = 0.0;
    bool s_quiet = false;
    auto* sweep_cmd = app.add_subcommand("sweep", "Corruption-level sweep experiment");
    sweep_cmd->add_option("--in", s_in, "Ground-truth raster")->required();
    sweep_cmd->add_option("--fractions", s_fractions, "Comma list (default 0.03,0.06,0.15,0.35,0.55)");
    sweep_cmd->add_option("--seeds", s_seeds, "Comma list of seeds (default 1,2,3)");
    sweep_cmd->add_option("--config", s_cfg, "Network config file");
    sweep_cmd->add_option("--out-csv", s_csv, "Raw per-run CSV path")->required();
    sweep_cmd->add_option("--median-csv", s_median_csv, "Per-fraction median CSV path");
    sweep_cmd->add_option("--period", s_period, "Stripe period (default 16)");
    sweep_cmd->add_option("--slope", s_slope, "Stripe slope (default 0)");
    sweep_cmd->add_flag("--quiet", s_quiet, "Suppress the iteration log");

    // --- compare-modes ---
    std::string cm_in, cm_mask, cm_cfg, cm_csv, cm_seeds = "1,2,3";
    bool cm_quiet = false;
    auto* modes_cmd =
        app.add_subcommand("compare-modes", "Per-band vs composite training comparison");
    modes_cmd->add_option("--in", cm_in, "Ground-truth raster")->required();
    modes_cmd->add_option("--mask", cm_mask, "Gap mask (PBM)")->required();
    modes_cmd->add_option("--config", cm_cfg, "Network config file");
    modes_cmd->add_option("--seeds", cm_seeds, "Comma list of seeds (default 1,2,3)");
    modes_cmd->add_option("--out-csv", cm_csv, "Comparison CSV path")->required();
    modes_cmd->add_flag("--quiet", cm_quiet, "Suppress the iteration log");

    // --- compare ---
    std::string cb_pred, cb_truth, cb_mask, cb_csv;
    auto* compare_cmd =
        app.add_subcommand("compare", "Side-by-side table against published baselines");
    compare_cmd->add_option("--pred", cb_pred, "Predicted raster")->required();
    compare_cmd->add_option("--truth", cb_truth, "Ground-truth raster")->required();
    compare_cmd->add_option("--mask", cb_mask, "Gap mask (PBM)")->required();
    compare_cmd->add_option("--out-csv", cb_csv, "Comparison CSV path");

    // --- selftest ---
    std::uint64_t st_seed = 7;
    auto* selftest_cmd =
        app.add_subcommand("selftest", "Gradient checks and operator oracles");
    selftest_cmd->add_option("--seed", st_seed, "Seed for the random check tensors (default 7)");

    // --- synth ---
    int sy_bands = 4, sy_h = 64, sy_w = 64, sy_bumps = 6;
    std::uint64_t sy_seed = 0;
    std::string sy_out;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a smooth synthetic test raster");
    synth_cmd->add_option("--bands", sy_bands, "Band count (default 4)");
    synth_cmd->add_option("--height", sy_h, "Height (default 64)");
    synth_cmd->add_option("--width", sy_w, "Width (default 64)");
    synth_cmd->add_option("--bumps", sy_bumps, "Gaussian bumps per band (default 6)");
    synth_cmd->add_option("--seed", sy_seed, "Seed (default 0)");
    synth_cmd->add_option("--out", sy_out, "Output raster path")->required();

    try {
        run(app, args);

        if (mask_cmd->parsed()) {
            const int phase = phase_opt->count() ? ma.phase
                                                 : static_cast<int>(mix_seed(ma.seed, 0) %
                                                                    static_cast<std::uint64_t>(ma.period));
            GapMask m;
            if (frac_opt->count()) {
                m = mask_for_fraction(ma.height, ma.width, ma.fraction, ma.period, ma.slope, phase);
            } else {
                const int mw = width_opt->count() ? ma.max_width : 14;
                m = slc_wedge_mask(ma.height, ma.width, ma.period, mw, phase, ma.slope);
            }
            write_mask_pbm(m, ma.out);
            std::fprintf(stderr, "mask %dx%d corruption %.4f -> %s\n", ma.height, ma.width,
                         corruption_fraction(m), ma.out.c_str());
        } else if (corrupt_cmd->parsed()) {
            const Raster r = read_raster(c_in);
            const GapMask m = load_mask(c_mask);
            write_raster(apply_mask(r, m, c_fill), c_out);
        } else if (restore_cmd->parsed()) {
            RestorationJob job;
            job.corrupted = read_raster(ra.in);
            job.mask = load_mask(ra.mask);
            job.config = ra.config.empty() ? HourglassConfig::reference() : load_config(ra.config);
            job.mode = ra.mode == "per-band" ? RestoreMode::per_band : RestoreMode::composite;
            job.output = ra.output_mode == "splice" ? OutputMode::splice
                                                    : OutputMode::full_reconstruction;
            job.seed = seed_opt->count() ? ra.seed : job.config.seed;
            job.log_progress = !ra.quiet;
            RestorationResult res = restore(job);
            write_raster(res.restored, ra.out);
            if (!ra.trace.empty()) {
                const bool single = res.traces.size() == 1;
                for (const auto& t : res.traces) {
                    write_trace_csv(t, trace_path_for(ra.trace, t.label, single));
                }
            }
        } else if (eval_cmd->parsed()) {
            const Raster pred = read_raster(e_pred);
            const Raster truth = read_raster(e_truth);
            const GapMask m = load_mask(e_mask);
            const MetricsReport rep = compute_metrics(pred, truth, m);
            write_file_atomic(e_csv, rep.to_csv());
            if (!e_sim.empty()) write_raster(similarity_map(pred, truth), e_sim);
        } else if (sweep_cmd->parsed()) {
            const Raster truth = read_raster(s_in);
            const HourglassConfig cfg =
                s_cfg.empty() ? HourglassConfig::reference() : load_config(s_cfg);
            const SweepResult result =
                corruption_sweep(truth, parse_double_list(s_fractions), cfg,
                                 parse_seed_list(s_seeds), s_period, s_slope, !s_quiet);
            write_file_atomic(s_csv, result.rows_csv());
            if (!s_median_csv.empty()) write_file_atomic(s_median_csv, result.medians_csv());
        } else if (modes_cmd->parsed()) {
            const Raster truth = read_raster(cm_in);
            const GapMask m = load_mask(cm_mask);
            const HourglassConfig cfg =
                cm_cfg.empty() ? HourglassConfig::reference() : load_config(cm_cfg);
            const ModeComparison cmp =
                run_separate_vs_composite(truth, m, cfg, parse_seed_list(cm_seeds), !cm_quiet);
            write_file_atomic(cm_csv, cmp.to_csv());
        } else if (compare_cmd->parsed()) {
            const Raster pred = read_raster(cb_pred);
            const Raster truth = read_raster(cb_truth);
            const GapMask m = load_mask(cb_mask);
            const BaselineComparison cmp = compare_to_baselines(compute_metrics(pred, truth, m));
            std::fputs(cmp.to_text().c_str(), stdout);
            if (!cb_csv.empty()) write_file_atomic(cb_csv, cmp.to_csv());
        } else if (selftest_cmd->parsed()) {
            const auto results = run_selftest(st_seed);
            std::fputs(selftest_table(results).c_str(), stdout);
            if (!all_passed(results)) return 3;
        } else if (synth_cmd->parsed()) {
            write_raster(make_synthetic_bumps(sy_bands, sy_h, sy_w, sy_bumps, sy_seed), sy_out);
        }
        return 0;
    } catch (const CLI::CallForHelp& e) {
        std::fputs(app.help().c_str(), stdout);
        return 0;
    } catch (const CLI::ParseError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 1;
    } catch (const NumericError& e) {
        std::fprintf(stderr, "numeric failure: %s\n", e.what());
        return 3;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}

int cli_main(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return cli_main(args);
}

}  // namespace dipfill
