#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dipfill/errors.hpp"
#include "dipfill/evaluation.hpp"
#include "dipfill/gap_mask.hpp"
#include "dipfill/hourglass.hpp"
#include "dipfill/raster.hpp"
#include "dipfill/restoration.hpp"
#include "dipfill/selftest.hpp"

namespace py = pybind11;
using namespace dipfill;

namespace {

// (bands, height, width) float64 copy
py::array_t<double> raster_to_array(const Raster& r) {
    py::array_t<double> a({r.bands, r.height, r.width});
    std::copy(r.values.begin(), r.values.end(), a.mutable_data());
    return a;
}

Raster raster_from_array(py::array_t<double, py::array::c_style | py::array::forcecast> a,
                         std::vector<std::string> names) {
    if (a.ndim() != 3) throw DimensionError("expected array of shape (bands, height, width)");
    Raster r = Raster::create(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)),
                              static_cast<int>(a.shape(2)));
    std::copy(a.data(), a.data() + a.size(), r.values.begin());
    if (!names.empty()) {
        if (names.size() != static_cast<std::size_t>(r.bands)) {
            throw DimensionError("band name count does not match band count");
        }
        r.names = std::move(names);
    }
    return r;
}

py::array_t<bool> mask_to_array(const GapMask& m) {
    py::array_t<bool> a({m.height, m.width});
    bool* p = a.mutable_data();
    for (std::size_t i = 0; i < m.cells.size(); ++i) p[i] = m.cells[i] != 0;
    return a;
}

GapMask mask_from_array(py::array_t<bool, py::array::c_style | py::array::forcecast> a) {
    if (a.ndim() != 2) throw DimensionError("expected array of shape (height, width)");
    GapMask m;
    m.height = static_cast<int>(a.shape(0));
    m.width = static_cast<int>(a.shape(1));
    m.cells.resize(static_cast<std::size_t>(m.height) * m.width);
    const bool* p = a.data();
    for (std::size_t i = 0; i < m.cells.size(); ++i) m.cells[i] = p[i] ? 1 : 0;
    return m;
}

RestoreMode parse_mode(const std::string& s) {
    if (s == "per_band" || s == "per-band") return RestoreMode::per_band;
    if (s == "composite") return RestoreMode::composite;
    throw ConfigError("mode must be 'per_band' or 'composite', got '" + s + "'");
}

OutputMode parse_output_mode(const std::string& s) {
    if (s == "full") return OutputMode::full_reconstruction;
    if (s == "splice") return OutputMode::splice;
    throw ConfigError("output_mode must be 'full' or 'splice', got '" + s + "'");
}

}  // namespace

PYBIND11_MODULE(_dipfill, m) {
    m.doc() = "Single-image gap filling for multi-band rasters via a deep image prior";

    py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<ParseError>(m, "FileParseError", PyExc_ValueError);
    py::register_exception<DegenerateError>(m, "DegenerateError", PyExc_ValueError);
    py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

    py::class_<Raster>(m, "Raster")
        .def(py::init([](py::array_t<double, py::array::c_style | py::array::forcecast> a,
                         std::vector<std::string> names) {
                 return raster_from_array(std::move(a), std::move(names));
             }),
             py::arg("values"), py::arg("names") = std::vector<std::string>{})
        .def_readonly("bands", &Raster::bands)
        .def_readonly("height", &Raster::height)
        .def_readonly("width", &Raster::width)
        .def_readwrite("names", &Raster::names)
        .def_property_readonly("nodata",
                               [](const Raster& r) {
                                   return r.nodata ? py::cast(*r.nodata) : py::none().cast<py::object>();
                               })
        .def("to_numpy", &raster_to_array)
        .def("__repr__", [](const Raster& r) {
            return "<Raster " + std::to_string(r.bands) + "x" + std::to_string(r.height) + "x" +
                   std::to_string(r.width) + ">";
        });

    py::class_<GapMask>(m, "GapMask")
        .def(py::init([](py::array_t<bool, py::array::c_style | py::array::forcecast> a) {
                 return mask_from_array(std::move(a));
             }),
             py::arg("observed"))
        .def_readonly("height", &GapMask::height)
        .def_readonly("width", &GapMask::width)
        .def("to_numpy", &mask_to_array)
        .def("__repr__", [](const GapMask& g) {
            return "<GapMask " + std::to_string(g.height) + "x" + std::to_string(g.width) +
                   " corruption " + std::to_string(corruption_fraction(g)) + ">";
        });

    py::class_<HourglassConfig>(m, "HourglassConfig")
        .def(py::init<>())
        .def_readwrite("depth", &HourglassConfig::depth)
        .def_readwrite("n_d", &HourglassConfig::n_d)
        .def_readwrite("n_u", &HourglassConfig::n_u)
        .def_readwrite("n_s", &HourglassConfig::n_s)
        .def_readwrite("k_d", &HourglassConfig::k_d)
        .def_readwrite("k_u", &HourglassConfig::k_u)
        .def_readwrite("k_s", &HourglassConfig::k_s)
        .def_readwrite("in_channels", &HourglassConfig::in_channels)
        .def_readwrite("out_channels", &HourglassConfig::out_channels)
        .def_readwrite("leaky_slope", &HourglassConfig::leaky_slope)
        .def_readwrite("sigma_p", &HourglassConfig::sigma_p)
        .def_readwrite("lr", &HourglassConfig::lr)
        .def_readwrite("num_iter", &HourglassConfig::num_iter)
        .def_readwrite("input_kind", &HourglassConfig::input_kind)
        .def_readwrite("input_amplitude", &HourglassConfig::input_amplitude)
        .def_readwrite("seed", &HourglassConfig::seed)
        .def("validate", &HourglassConfig::validate)
        .def_static("reference", &HourglassConfig::reference);

    m.def("load_config", &load_config, py::arg("path"));
    m.def("save_config", &save_config, py::arg("config"), py::arg("path"));

    m.def("slc_wedge_mask", &slc_wedge_mask, py::arg("height"), py::arg("width"),
          py::arg("period"), py::arg("max_width"), py::arg("phase") = 0,
          py::arg("angle_slope") = 0.0, py::arg("wedge") = true);
    m.def("mask_for_fraction", &mask_for_fraction, py::arg("height"), py::arg("width"),
          py::arg("target"), py::arg("period") = 16, py::arg("angle_slope") = 0.0,
          py::arg("phase") = 0);
    m.def("corruption_fraction", &corruption_fraction, py::arg("mask"));
    m.def("apply_mask", &apply_mask, py::arg("raster"), py::arg("mask"), py::arg("fill") = 0.0);

    m.def(
        "restore",
        [](const Raster& corrupted, const GapMask& mask, const HourglassConfig& config,
           const std::string& mode, const std::string& output_mode, std::uint64_t seed,
           bool log_progress) {
            RestorationJob job{corrupted, mask,       config, parse_mode(mode),
                               parse_output_mode(output_mode), seed,   log_progress};
            RestorationResult res;
            {
                py::gil_scoped_release release;
                res = restore(job);
            }
            py::list traces;
            for (const auto& t : res.traces) {
                traces.append(py::make_tuple(t.label, py::cast(t.losses)));
            }
            return py::make_tuple(res.restored, traces);
        },
        py::arg("corrupted"), py::arg("mask"), py::arg("config"), py::arg("mode") = "composite",
        py::arg("output_mode") = "full", py::arg("seed") = 0, py::arg("log_progress") = false);

    m.def("splice", &splice, py::arg("restored"), py::arg("corrupted"), py::arg("mask"));

    m.def(
        "rmse",
        [](const Raster& pred, const Raster& truth, int band, const GapMask& m,
           const std::string& region) {
            return rmse(pred, truth, band, m,
                        region == "hidden" ? Region::hidden
                                           : region == "observed" ? Region::observed : Region::all);
        },
        py::arg("pred"), py::arg("truth"), py::arg("band"), py::arg("mask"),
        py::arg("region") = "hidden");
    m.def(
        "r2",
        [](const Raster& pred, const Raster& truth, int band, const GapMask& m,
           const std::string& region) {
            return r2(pred, truth, band, m,
                      region == "hidden" ? Region::hidden
                                         : region == "observed" ? Region::observed : Region::all);
        },
        py::arg("pred"), py::arg("truth"), py::arg("band"), py::arg("mask"),
        py::arg("region") = "hidden");

    m.def("similarity_map", &similarity_map, py::arg("pred"), py::arg("truth"));
    m.def(
        "compute_metrics",
        [](const Raster& pred, const Raster& truth, const GapMask& m) {
            const MetricsReport rep = compute_metrics(pred, truth, m);
            py::dict out;
            const char* regions[3] = {"hidden", "observed", "all"};
            for (std::size_t b = 0; b < rep.entries.size(); ++b) {
                py::dict per_region;
                for (int ri = 0; ri < 3; ++ri) {
                    const auto& cell = rep.entries[b][ri];
                    py::dict d;
                    d["rmse"] = cell.rmse;
                    d["r2"] = cell.r2;
                    d["pixels"] = cell.pixels;
                    per_region[regions[ri]] = d;
                }
                out[py::cast(rep.band_names[b])] = per_region;
            }
            return out;
        },
        py::arg("pred"), py::arg("truth"), py::arg("mask"));

    m.def("make_synthetic_bumps", &make_synthetic_bumps, py::arg("bands"), py::arg("height"),
          py::arg("width"), py::arg("bumps_per_band") = 6, py::arg("seed") = 0);
    m.def("nearest_observed_fill", &nearest_observed_fill, py::arg("corrupted"), py::arg("mask"));

    m.def("read_raster", [](const std::string& path) { return read_raster(path); },
          py::arg("path"));
    m.def("write_raster", [](const Raster& r, const std::string& path) { write_raster(r, path); },
          py::arg("raster"), py::arg("path"));
    m.def("read_mask", &read_mask_pbm, py::arg("path"));
    m.def("write_mask", &write_mask_pbm, py::arg("mask"), py::arg("path"));

    m.def("selftest", [](std::uint64_t seed) {
        const auto results = run_selftest(seed);
        py::list out;
        for (const auto& r : results) {
            out.append(py::make_tuple(r.name, r.max_rel_error, r.tolerance, r.pass));
        }
        return out;
    }, py::arg("seed") = 7);
}
