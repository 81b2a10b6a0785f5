// qarcast command-line front end: interval, simulate, backtest.

#include "qarcast/backtest_io.hpp"
#include "qarcast/error.hpp"
#include "qarcast/interval_methods.hpp"
#include "qarcast/sim_lab.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace {

using namespace qarcast;

constexpr int kExitFlags = 2;
constexpr int kExitData = 3;
constexpr int kExitMethod = 4;

/// Flag-level problem detected after parsing.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::ConfigError:
        case ErrorKind::InvalidArgument:
            return kExitFlags;
        case ErrorKind::SeriesTooShort:
        case ErrorKind::NonFinite:
        case ErrorKind::EmptyInput:
        case ErrorKind::ParseError:
        case ErrorKind::NonMonotoneLabels:
        case ErrorKind::EmptyFile:
            return kExitData;
        case ErrorKind::DomainError:
        case ErrorKind::RankDeficient:
        case ErrorKind::NoConvergence:
        case ErrorKind::InsufficientDoF:
            return kExitMethod;
    }
    return kExitMethod;
}

std::string format6(double v) {
    std::ostringstream os;
    os << std::setprecision(6) << v;
    return os.str();
}

int default_workers() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

void write_file(const std::string& path, const std::function<void(std::ostream&)>& body) {
    const auto parent = std::filesystem::path(path).parent_path();
    std::error_code ec;
    if (!parent.empty()) std::filesystem::create_directories(parent, ec);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw UsageError("cannot write " + path);
    body(out);
    if (!out) throw UsageError("failed writing " + path);
}

std::vector<Method> parse_method_list(const std::string& list) {
    if (list == "all") return all_methods();
    std::vector<Method> out;
    std::stringstream ss(list);
    std::string tag;
    while (std::getline(ss, tag, ',')) {
        if (tag == "all") {
            for (Method m : all_methods()) out.push_back(m);
        } else if (!tag.empty()) {
            out.push_back(parse_method(tag));
        }
    }
    if (out.empty()) throw UsageError("--methods is empty");
    return out;
}

struct IntervalFlags {
    std::string input;
    std::string method = "ar-perc";
    int p = 1;
    int k = 1;
    double level = 0.95;
    std::optional<int> B;
    double tau0 = 0.5;
    std::optional<std::uint64_t> seed;
    std::string format = "csv";
    std::string multipliers = "exponential";
    std::string loo = "full";
    bool bj_dof = false;
};

struct SimulateFlags {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    int workers = default_workers();
    std::optional<std::string> profile;
    bool progress = false;
};

struct BacktestFlags {
    std::string input;
    int window = 50;
    int p = 1;
    std::string methods = "all";
    double level = 0.95;
    int k = 4;
    std::optional<int> B_ar;
    std::optional<int> B_qar;
    std::optional<std::uint64_t> seed;
    int workers = default_workers();
    bool common_origins = false;
    std::string out;
    std::string format = "table";
};

int cmd_interval(const IntervalFlags& f, bool strict) {
    if (strict && !f.seed) throw UsageError("--seed is required in strict mode");
    const auto series = load_series_csv(f.input);
    MethodConfig cfg;
    cfg.method = parse_method(f.method);
    if (cfg.method == Method::ORACLE) throw UsageError("oracle needs the true process and is available in simulate only");
    cfg.p = f.p;
    cfg.max_horizon = f.k;
    cfg.levels = {f.level};
    cfg.tau = f.tau0;
    cfg.multipliers = parse_multiplier_law(f.multipliers);
    cfg.loo = f.loo == "row" ? LooMode::Row : LooMode::Full;
    cfg.bj_dof_correction = f.bj_dof;
    if (f.B) {
        if (is_deterministic(cfg.method)) {
            std::cerr << "warning: --B is ignored by " << method_tag(cfg.method) << "\n";
        } else {
            cfg.B = *f.B;
        }
    }
    cfg.validate();
    const RngStream rng(f.seed.value_or(1), 0);
    const auto pis = prediction_intervals(series, cfg, rng);
    if (f.format == "json") {
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& pi : pis) {
            rows.push_back({{"horizon", pi.horizon},
                            {"level", pi.level},
                            {"point", pi.point.value_or(std::nan(""))},
                            {"lower", pi.lower},
                            {"upper", pi.upper}});
        }
        std::cout << nlohmann::json{{"method", method_tag(cfg.method)}, {"intervals", rows}}.dump(2) << "\n";
    } else {
        std::cout << "horizon,level,point,lower,upper\n";
        for (const auto& pi : pis) {
            std::cout << pi.horizon << "," << format6(pi.level) << ","
                      << (pi.point ? format6(*pi.point) : std::string("NA")) << "," << format6(pi.lower) << ","
                      << format6(pi.upper) << "\n";
        }
    }
    return 0;
}

int cmd_simulate(const SimulateFlags& f, bool strict) {
    if (strict && !f.seed) throw UsageError("--seed is required in strict mode");
    std::optional<Profile> profile;
    if (f.profile) profile = parse_profile(*f.profile);
    auto cfg = load_experiment_config(f.config, profile);
    if (f.seed) cfg.seed = *f.seed;
    cfg.validate();
    ProgressCallback progress;
    if (f.progress) {
        progress = [](int done, int total) {
            if (done == total || done % std::max(1, total / 20) == 0) std::cerr << "\r" << done << "/" << total << std::flush;
            if (done == total) std::cerr << "\n";
        };
    }
    const auto report = run_experiment(cfg, f.workers, progress);
    write_file(f.out + ".csv", [&](std::ostream& o) { write_report_csv(o, report); });
    write_file(f.out + ".json", [&](std::ostream& o) { write_report_json(o, report); });
    write_file(f.out + ".raw.csv", [&](std::ostream& o) { write_raw_csv(o, report); });
    if (report.total_failures() > 0) {
        std::cerr << "warning: " << report.total_failures() << " method runs failed and were dropped\n";
    }
    return 0;
}

int cmd_backtest(const BacktestFlags& f, bool strict) {
    if (strict && !f.seed) throw UsageError("--seed is required in strict mode");
    const auto series = load_series_csv(f.input);
    BacktestConfig cfg;
    cfg.window = f.window;
    cfg.p = f.p;
    cfg.level = f.level;
    cfg.seed = f.seed.value_or(1);
    cfg.common_origins = f.common_origins;
    cfg.horizons.clear();
    for (int k = 1; k <= f.k; ++k) cfg.horizons.push_back(k);
    for (Method m : parse_method_list(f.methods)) {
        if (m == Method::ORACLE) throw UsageError("oracle needs the true process and is available in simulate only");
        MethodConfig mc;
        mc.method = m;
        if (is_qar_based(m) && f.B_qar) mc.B = *f.B_qar;
        if (!is_qar_based(m) && !is_deterministic(m) && f.B_ar) mc.B = *f.B_ar;
        cfg.methods.push_back(mc);
    }
    const auto report = rwpoos(series, cfg, f.workers);
    if (!f.out.empty()) {
        write_file(f.out + ".csv", [&](std::ostream& o) { write_backtest_csv(o, report); });
        write_file(f.out + ".json", [&](std::ostream& o) { write_backtest_json(o, report); });
    }
    if (f.format == "csv") {
        write_backtest_csv(std::cout, report);
    } else if (f.format == "json") {
        write_backtest_json(std::cout, report);
    } else {
        write_backtest_table(std::cout, report);
    }
    for (const auto& r : report.results) {
        if (r.failures > 0) {
            std::cerr << "warning: " << method_tag(r.method) << " failed on " << r.failures
                      << " windows (scored as not covered)\n";
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bootstrap prediction intervals for AR(p) and QAR(p) series"};
    app.name("qarcast");
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);
    app.option_defaults()->always_capture_default();
    bool strict = false;
    app.add_flag("--strict", strict, "Require --seed for every command");

    IntervalFlags fi;
    auto* interval = app.add_subcommand("interval", "Prediction intervals at the end of a series");
    interval->add_option("--input", fi.input, "Series CSV (label,value)")->required()->check(CLI::ExistingFile);
    interval->add_option("--method", fi.method, "Method tag: bj ts cb prr prr-lad pp ar-perc ar-proot x qar-perc qar-proot");
    interval->add_option("--p", fi.p, "Autoregressive order")->check(CLI::PositiveNumber);
    interval->add_option("--k", fi.k, "Largest horizon")->check(CLI::PositiveNumber);
    interval->add_option("--level", fi.level, "Nominal level")->check(CLI::Range(0.0, 1.0));
    interval->add_option("--B", fi.B, "Bootstrap replications")->default_str("1000/5000");
    interval->add_option("--tau0", fi.tau0, "Quantile order of the AR-perc/AR-proot fit and QAR-proot centre")
        ->check(CLI::Range(0.0, 1.0));
    interval->add_option("--seed", fi.seed, "Random seed")->default_str("1");
    interval->add_option("--format", fi.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    interval->add_option("--multipliers", fi.multipliers, "Multiplier law")
        ->check(CLI::IsMember({"exponential", "lognormal"}));
    interval->add_option("--loo", fi.loo, "Predictive residual deletion")->check(CLI::IsMember({"full", "row"}));
    interval->add_flag("--bj-dof", fi.bj_dof, "BJ: divide the residual sum of squares by n - 2p - 1 instead of n - p");

    SimulateFlags fs;
    auto* simulate = app.add_subcommand("simulate", "Monte-Carlo coverage experiment from a JSON config");
    simulate->add_option("--config", fs.config, "Experiment JSON")->required()->check(CLI::ExistingFile);
    simulate->add_option("--out", fs.out, "Output prefix; writes PREFIX.csv, PREFIX.json, PREFIX.raw.csv")->required();
    simulate->add_option("--seed", fs.seed, "Seed (overrides the config)");
    simulate->add_option("--workers", fs.workers, "Worker threads")->check(CLI::PositiveNumber);
    simulate->add_option("--profile", fs.profile, "desk (S=200 F=500 B=500/2000) or paper (S=500 F=1000 B=1000/5000)")
        ->check(CLI::IsMember({"desk", "paper"}))
        ->default_str("$QARCAST_PROFILE or desk");
    simulate->add_flag("--progress", fs.progress, "Report progress on stderr");

    BacktestFlags fb;
    auto* backtest = app.add_subcommand("backtest", "Rolling-window pseudo-out-of-sample evaluation");
    backtest->add_option("--input", fb.input, "Series CSV (label,value)")->required()->check(CLI::ExistingFile);
    backtest->add_option("--window", fb.window, "Training window R")->check(CLI::PositiveNumber);
    backtest->add_option("--p", fb.p, "Autoregressive order")->check(CLI::PositiveNumber);
    backtest->add_option("--methods", fb.methods, "Comma-separated method tags or all");
    backtest->add_option("--level", fb.level, "Nominal level")->check(CLI::Range(0.0, 1.0));
    backtest->add_option("--k", fb.k, "Horizons 1..k")->check(CLI::PositiveNumber);
    backtest->add_option("--B-ar", fb.B_ar, "Replications for AR-based methods")->default_str("1000");
    backtest->add_option("--B-qar", fb.B_qar, "Replications for QAR-based methods")->default_str("5000");
    backtest->add_option("--seed", fb.seed, "Random seed")->default_str("1");
    backtest->add_option("--workers", fb.workers, "Worker threads")->check(CLI::PositiveNumber);
    backtest->add_flag("--common-origins", fb.common_origins, "Score every horizon on the same forecast origins");
    backtest->add_option("--out", fb.out, "Also write PREFIX.csv and PREFIX.json");
    backtest->add_option("--format", fb.format, "Output format")->check(CLI::IsMember({"table", "csv", "json"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        (void)app.exit(e);
        return kExitFlags;
    }

    try {
        if (interval->parsed()) return cmd_interval(fi, strict);
        if (simulate->parsed()) return cmd_simulate(fs, strict);
        return cmd_backtest(fb, strict);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFlags;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(e.kind());
    }
}
