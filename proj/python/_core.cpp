#include "qarcast/backtest_io.hpp"
#include "qarcast/error.hpp"
#include "qarcast/interval_methods.hpp"
#include "qarcast/quantile_solver.hpp"
#include "qarcast/sim_lab.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace qarcast;

namespace {

MethodConfig make_method(const std::string& method, int p, int k, const std::vector<double>& levels, int B,
                         double tau, const std::string& multipliers, const std::string& loo) {
    MethodConfig cfg;
    cfg.method = parse_method(method);
    cfg.p = p;
    cfg.max_horizon = k;
    cfg.levels = levels;
    cfg.B = B;
    cfg.tau = tau;
    cfg.multipliers = parse_multiplier_law(multipliers);
    if (loo != "full" && loo != "row") throw Error(ErrorKind::InvalidArgument, "loo must be full or row");
    cfg.loo = loo == "row" ? LooMode::Row : LooMode::Full;
    return cfg;
}

py::object json_loads(const std::string& text) { return py::module_::import("json").attr("loads")(text); }

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Bootstrap prediction intervals for AR(p) and QAR(p) series";

    static py::exception<Error> error(m, "QarcastError");
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::object exc = py::reinterpret_borrow<py::object>(error.ptr())(e.what());
            exc.attr("kind") = std::string(to_string(e.kind()));
            PyErr_SetObject(error.ptr(), exc.ptr());
        }
    });

    py::class_<PredictionInterval>(m, "PredictionInterval")
        .def_readonly("lower", &PredictionInterval::lower)
        .def_readonly("upper", &PredictionInterval::upper)
        .def_readonly("horizon", &PredictionInterval::horizon)
        .def_readonly("level", &PredictionInterval::level)
        .def_property_readonly("method", [](const PredictionInterval& pi) { return std::string(method_tag(pi.method)); })
        .def_readonly("point", &PredictionInterval::point)
        .def("__repr__", [](const PredictionInterval& pi) {
            std::ostringstream os;
            os << "PredictionInterval(" << method_tag(pi.method) << ", k=" << pi.horizon << ", level=" << pi.level
               << ", [" << pi.lower << ", " << pi.upper << "])";
            return os.str();
        });

    m.def("methods", [] {
        std::vector<std::string> out;
        for (Method mt : all_methods()) out.emplace_back(method_tag(mt));
        return out;
    }, "Tags of the eleven interval methods.");

    m.def(
        "prediction_intervals",
        [](const std::vector<double>& series, const std::string& method, int p, int k, std::vector<double> levels,
           int B, double tau, std::uint64_t seed, const std::string& multipliers, const std::string& loo) {
            const auto cfg = make_method(method, p, k, levels, B, tau, multipliers, loo);
            py::gil_scoped_release release;
            return prediction_intervals(series, cfg, RngStream(seed, 0));
        },
        py::arg("series"), py::arg("method") = "ar-perc", py::arg("p") = 1, py::arg("k") = 1,
        py::arg("levels") = std::vector<double>{0.95}, py::arg("B") = 0, py::arg("tau") = 0.5, py::arg("seed") = 1,
        py::arg("multipliers") = "exponential", py::arg("loo") = "full",
        "Intervals for horizons 1..k at the end of the series. B=0 uses 1000 (AR) or 5000 (QAR).");

    m.def(
        "bootstrap_draws",
        [](const std::vector<double>& series, const std::string& method, int p, int k, int B, double tau,
           std::uint64_t seed) {
            const auto cfg = make_method(method, p, k, {0.95}, B, tau, "exponential", "full");
            BootstrapDraws d;
            {
                py::gil_scoped_release release;
                d = bootstrap_draws(series, cfg, RngStream(seed, 0));
            }
            py::dict out;
            out["root_based"] = d.root_based;
            out["values"] = d.values;
            out["point"] = d.point;
            out["estimation_part"] = d.estimation_part;
            out["innovation_part"] = d.innovation_part;
            return out;
        },
        py::arg("series"), py::arg("method") = "ar-perc", py::arg("p") = 1, py::arg("k") = 1, py::arg("B") = 0,
        py::arg("tau") = 0.5, py::arg("seed") = 1, "Raw bootstrap values[k-1][b] of a method.");

    m.def(
        "solve_qr",
        [](const RowMatrix& x, const Eigen::VectorXd& y, double tau, std::vector<double> weights) {
            CheckLossProblem prob{y, x, tau, std::move(weights)};
            const auto sol = solve_weighted_qr_detailed(prob);
            return py::make_tuple(sol.coefs.coefs, sol.objective);
        },
        py::arg("x"), py::arg("y"), py::arg("tau"), py::arg("weights") = std::vector<double>{},
        "Weighted check-loss regression; returns (coefficients, objective).");

    m.def(
        "simulate",
        [](const std::string& model, int n, std::uint64_t seed, double phi1, int order, const std::string& law,
           int burn_in) {
            DgpSpec spec;
            spec.model = parse_model(model);
            spec.phi1 = phi1;
            spec.m2_order = order;
            spec.law = parse_law(law);
            spec.burn_in = burn_in;
            spec.validate();
            RngStream rng(seed, 0);
            return simulate_dgp(spec, n, rng);
        },
        py::arg("model") = "M1", py::arg("n") = 50, py::arg("seed") = 1, py::arg("phi1") = 0.6, py::arg("order") = 2,
        py::arg("law") = "normal", py::arg("burn_in") = 300, "Simulate one series from Models 1-4.");

    m.def(
        "run_experiment",
        [](const std::string& config_json, int workers) {
            const auto cfg = parse_experiment_config(config_json);
            std::ostringstream os;
            {
                py::gil_scoped_release release;
                const auto report = run_experiment(cfg, workers);
                write_report_json(os, report);
            }
            return json_loads(os.str());
        },
        py::arg("config_json"), py::arg("workers") = 1,
        "Coverage experiment from a JSON config string; returns the JSON report as a dict.");

    m.def(
        "load_series_csv",
        [](const std::string& path) {
            const auto ts = load_series_csv(path);
            return py::make_tuple(std::vector<double>(ts.values().begin(), ts.values().end()), ts.labels());
        },
        py::arg("path"), "Returns (values, labels).");

    m.def(
        "backtest",
        [](const std::vector<double>& series, int window, int p, const std::vector<std::string>& methods, double level,
           int k, std::uint64_t seed, bool common_origins, int workers) {
            BacktestConfig cfg;
            cfg.window = window;
            cfg.p = p;
            cfg.level = level;
            cfg.seed = seed;
            cfg.common_origins = common_origins;
            cfg.horizons.clear();
            for (int h = 1; h <= k; ++h) cfg.horizons.push_back(h);
            for (const auto& tag : methods) {
                if (tag == "all") {
                    for (Method mt : all_methods()) cfg.methods.push_back(MethodConfig{.method = mt});
                } else {
                    cfg.methods.push_back(MethodConfig{.method = parse_method(tag)});
                }
            }
            std::ostringstream os;
            {
                py::gil_scoped_release release;
                write_backtest_json(os, rwpoos(TimeSeries(series), cfg, workers));
            }
            return json_loads(os.str());
        },
        py::arg("series"), py::arg("window") = 50, py::arg("p") = 1, py::arg("methods") = std::vector<std::string>{"all"},
        py::arg("level") = 0.95, py::arg("k") = 4, py::arg("seed") = 1, py::arg("common_origins") = false,
        py::arg("workers") = 1, "Rolling-window backtest; returns the JSON report as a dict.");
}
