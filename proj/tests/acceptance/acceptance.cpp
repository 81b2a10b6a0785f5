// Acceptance suite: one PASS/FAIL/SKIP line per criterion.
//
//   acceptance [--only 1,6,...] [--workers N] [--out DIR]
//
// Exit status is the number of failed criteria.

#include "../unit/vertex_oracle.hpp"

#include "qarcast/backtest_io.hpp"
#include "qarcast/error.hpp"
#include "qarcast/interval_methods.hpp"
#include "qarcast/quantile_solver.hpp"
#include "qarcast/sim_lab.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace qarcast;
namespace fs = std::filesystem;

namespace {

enum class Status { Pass, Fail, Skip };

struct Outcome {
    Status status;
    std::string detail;
};

struct Options {
    std::set<int> only;
    int workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    fs::path out = "acceptance_reports";
    fs::path data = QARCAST_DATA_DIR;
};

Options opts;

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

MethodConfig method(Method m, int B = 0) {
    MethodConfig c;
    c.method = m;
    c.p = 0;
    c.B = B;
    return c;
}

std::vector<MethodConfig> methods_of(const std::vector<Method>& ms) {
    std::vector<MethodConfig> out;
    for (Method m : ms) out.push_back(method(m));
    return out;
}

ExperimentConfig model1(double phi, int n, std::vector<int> horizons, double level, Profile profile) {
    ExperimentConfig cfg;
    cfg.dgp.model = ModelKind::M1;
    cfg.dgp.phi1 = phi;
    cfg.n = n;
    cfg.horizons = std::move(horizons);
    cfg.levels = {level};
    cfg.profile = profile;
    cfg.S = profile_defaults(profile).S;
    cfg.F = profile_defaults(profile).F;
    return cfg;
}

/// Resolves B <= 0 from the profile, as the JSON loader does.
void resolve_B(ExperimentConfig& cfg) {
    const auto d = profile_defaults(cfg.profile);
    for (auto& m : cfg.methods) {
        if (m.B <= 0 && !is_deterministic(m.method)) m.B = is_qar_based(m.method) ? d.B_qar : d.B_ar;
    }
}

struct Run {
    ExperimentConfig cfg;
    CoverageReport report;
    std::string csv, json, raw;
};

std::map<std::string, Run> runs;

Run& experiment(const std::string& name, ExperimentConfig cfg, int workers) {
    resolve_B(cfg);
    Run r;
    r.cfg = cfg;
    r.report = run_experiment(cfg, workers);
    std::ostringstream a, b, c;
    write_report_csv(a, r.report);
    write_report_json(b, r.report);
    write_raw_csv(c, r.report);
    r.csv = a.str();
    r.json = b.str();
    r.raw = c.str();
    fs::create_directories(opts.out);
    const std::string stem = name + "_w" + std::to_string(workers);
    std::ofstream(opts.out / (stem + ".csv"), std::ios::binary) << r.csv;
    std::ofstream(opts.out / (stem + ".json"), std::ios::binary) << r.json;
    std::ofstream(opts.out / (stem + ".raw.csv"), std::ios::binary) << r.raw;
    return runs[name] = std::move(r);
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

// 1 -------------------------------------------------------------------------

Outcome solver_oracle() {
    const auto t0 = std::chrono::steady_clock::now();
    RngStream rng = RngStream(1, 0).substream(StreamTag::Oracle, 1);
    double worst = 0.0;
    int bad = 0;
    for (int trial = 0; trial < 500; ++trial) {
        const int m = 1 + static_cast<int>(rng.index(3));
        const int n = m + 1 + static_cast<int>(rng.index(static_cast<std::size_t>(10 - m)));
        RowMatrix x(n, m);
        Eigen::VectorXd y(n);
        std::vector<double> w(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            x(i, 0) = 1.0;
            for (int j = 1; j < m; ++j) x(i, j) = draw_standard_normal(rng);
            y(i) = draw_standard_normal(rng);
            w[static_cast<std::size_t>(i)] = -std::log(rng.uniform_open());
        }
        const double tau = 0.02 + 0.96 * rng.uniform();
        const auto sol = solve_weighted_qr_detailed(CheckLossProblem{y, x, tau, w});
        const double oracle = testing::vertex_oracle_minimum(x, y, tau, w);
        const double rel = std::abs(sol.objective - oracle) / std::max(1.0, std::abs(oracle));
        worst = std::max(worst, rel);
        if (rel > 1e-8) ++bad;
    }
    const double secs = seconds_since(t0);
    const bool ok = bad == 0 && secs < 10.0;
    return {ok ? Status::Pass : Status::Fail, "500 problems, " + std::to_string(bad) + " mismatches, worst rel " +
                                                   fmt("%.2e", worst) + ", " + fmt("%.2f", secs) + " s"};
}

// 2 -------------------------------------------------------------------------

std::vector<std::pair<std::string, ExperimentConfig>> oracle_configs() {
    std::vector<std::pair<std::string, ExperimentConfig>> out;
    for (ModelKind mk : {ModelKind::M1, ModelKind::M2, ModelKind::M3, ModelKind::M4}) {
        ExperimentConfig cfg = model1(0.6, 100, {1, 3}, 0.9, Profile::Desk);
        cfg.levels = {0.9, 0.95};
        cfg.dgp.model = mk;
        cfg.methods = {method(Method::ORACLE)};
        cfg.seed = 200 + static_cast<std::uint64_t>(mk);
        out.emplace_back("c2_" + model_name(mk), cfg);
    }
    return out;
}

Outcome oracle_exactness() {
    const auto t0 = std::chrono::steady_clock::now();
    std::ostringstream detail;
    bool ok = true;
    for (const auto& [name, cfg] : oracle_configs()) {
        const auto& rep = experiment(name, cfg, opts.workers).report;
        double worst = 0.0;
        for (const auto& c : rep.cells) {
            const double z = std::abs(c.stats.beta_bar - c.level) / c.stats.se;
            worst = std::max(worst, z);
            if (!(z <= 3.0)) ok = false;
        }
        detail << model_name(cfg.dgp.model) << " max|z|=" << fmt("%.2f", worst) << " ";
    }
    const double secs = seconds_since(t0);
    if (secs >= 300.0) ok = false;
    detail << fmt("%.1f", secs) << " s";
    return {ok ? Status::Pass : Status::Fail, detail.str()};
}

// 3 -------------------------------------------------------------------------

ExperimentConfig m1_k1_config() {
    ExperimentConfig cfg = model1(0.6, 50, {1}, 0.95, Profile::Paper);
    cfg.methods = methods_of({Method::BJ, Method::PP, Method::AR_PERC, Method::AR_PROOT, Method::X, Method::QAR_PROOT});
    cfg.seed = 3;
    return cfg;
}

Outcome m1_k1_cell() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto& rep = experiment("c3_m1_k1", m1_k1_config(), opts.workers).report;
    struct Ref {
        Method m;
        double beta, se;
    };
    const std::array<Ref, 6> refs{{{Method::BJ, 93.26, 0.14},
                                   {Method::PP, 94.28, 0.15},
                                   {Method::AR_PERC, 93.88, 0.15},
                                   {Method::AR_PROOT, 94.26, 0.15},
                                   {Method::X, 90.86, 0.27},
                                   {Method::QAR_PROOT, 93.01, 0.21}}};
    bool ok = true;
    std::ostringstream detail;
    for (const auto& r : refs) {
        const auto& s = rep.cell(r.m, 1, 0.95).stats;
        const double ours = 100.0 * s.beta_bar;
        const double tol = 3.0 * std::hypot(100.0 * s.se, r.se);
        const bool hit = std::abs(ours - r.beta) <= tol;
        ok = ok && hit;
        detail << method_label(r.m) << " " << fmt("%.2f", ours) << "/" << fmt("%.2f", r.beta) << (hit ? "" : "!")
               << " ";
    }
    detail << fmt("%.0f", seconds_since(t0)) << " s";
    return {ok ? Status::Pass : Status::Fail, detail.str()};
}

// 4 -------------------------------------------------------------------------

ExperimentConfig m1_k3_config() {
    ExperimentConfig cfg = model1(0.6, 50, {3}, 0.95, Profile::Paper);
    cfg.methods = methods_of({Method::AR_PERC, Method::AR_PROOT, Method::ORACLE});
    cfg.seed = 4;
    return cfg;
}

Outcome m1_k3_cell() {
    const auto& rep = experiment("c4_m1_k3", m1_k3_config(), opts.workers).report;
    const double perc = 100.0 * rep.cell(Method::AR_PERC, 3, 0.95).stats.beta_bar;
    const double proot = 100.0 * rep.cell(Method::AR_PROOT, 3, 0.95).stats.beta_bar;
    const double len = rep.cell(Method::ORACLE, 3, 0.95).stats.len_bar;
    const bool ok = std::abs(perc - 94.12) <= 0.7 && std::abs(proot - 94.16) <= 0.7 && std::abs(len - 4.78) <= 3 * 0.14;
    return {ok ? Status::Pass : Status::Fail, "AR-perc " + fmt("%.2f", perc) + "/94.12, AR-proot " +
                                                   fmt("%.2f", proot) + "/94.16, ORACLE len " + fmt("%.3f", len) +
                                                   "/4.78"};
}

// 5 -------------------------------------------------------------------------

ExperimentConfig m4_config() {
    ExperimentConfig cfg = model1(0.6, 200, {1}, 0.9, Profile::Desk);
    cfg.dgp.model = ModelKind::M4;
    cfg.methods = methods_of({Method::X, Method::QAR_PERC, Method::QAR_PROOT});
    cfg.seed = 5;
    return cfg;
}

Outcome m4_cells() {
    const auto& rep = experiment("c5_m4", m4_config(), opts.workers).report;
    const double x = 100.0 * rep.cell(Method::X, 1, 0.9).stats.beta_bar;
    const double perc = 100.0 * rep.cell(Method::QAR_PERC, 1, 0.9).stats.beta_bar;
    const double proot = 100.0 * rep.cell(Method::QAR_PROOT, 1, 0.9).stats.beta_bar;
    const bool near = std::abs(x - 88.56) <= 1.0 && std::abs(perc - 88.96) <= 1.0 && std::abs(proot - 89.47) <= 1.0;
    const bool order = x <= perc && perc <= proot;
    return {near && order ? Status::Pass : Status::Fail,
            "X " + fmt("%.2f", x) + "/88.56, QAR-perc " + fmt("%.2f", perc) + "/88.96, QAR-proot " +
                fmt("%.2f", proot) + "/89.47" + (order ? "" : ", ordering broken")};
}

// 6 -------------------------------------------------------------------------

Outcome unit_root_mass() {
    const auto t0 = std::chrono::steady_clock::now();
    DgpSpec spec;
    spec.model = ModelKind::M3;
    RngStream rng(6, 0);
    std::vector<double> slopes;
    (void)simulate_dgp_traced(spec, 1000000, rng, slopes);
    const double freq = static_cast<double>(std::count(slopes.begin(), slopes.end(), 1.0)) / 1e6;
    const double secs = seconds_since(t0);
    const bool ok = std::abs(freq - 0.118) <= 0.003 && secs < 5.0;
    return {ok ? Status::Pass : Status::Fail, "boundary frequency " + fmt("%.4f", freq) + ", " + fmt("%.2f", secs) + " s"};
}

// 7 -------------------------------------------------------------------------

Outcome figure1_trend() {
    std::map<double, CoverageReport> reps;
    for (double phi : {0.1, 0.8, 0.9}) {
        ExperimentConfig cfg = model1(phi, 25, {4}, 0.95, Profile::Desk);
        cfg.methods = methods_of(all_methods());
        cfg.seed = 7;
        resolve_B(cfg);
        reps[phi] = run_experiment(cfg, opts.workers);
    }
    bool ok = true;
    std::ostringstream detail;
    for (Method m : all_methods()) {
        const double lo = reps[0.1].cell(m, 4, 0.95).stats.beta_bar;
        const double hi = reps[0.9].cell(m, 4, 0.95).stats.beta_bar;
        if (!(hi < lo)) {
            ok = false;
            detail << method_label(m) << " no drop; ";
        }
    }
    std::vector<std::pair<double, Method>> ar;
    for (Method m : all_methods()) {
        if (is_qar_based(m)) continue;
        ar.emplace_back(std::abs(reps[0.8].cell(m, 4, 0.95).stats.beta_bar - 0.95), m);
    }
    std::sort(ar.begin(), ar.end());
    const std::set<Method> top{ar[0].second, ar[1].second};
    const bool top_ok = top == std::set<Method>{Method::AR_PERC, Method::AR_PROOT};
    ok = ok && top_ok;
    detail << "phi=0.8 top two: " << method_label(ar[0].second) << " "
           << fmt("%.2f", 100 * reps[0.8].cell(ar[0].second, 4, 0.95).stats.beta_bar) << ", "
           << method_label(ar[1].second) << " " << fmt("%.2f", 100 * reps[0.8].cell(ar[1].second, 4, 0.95).stats.beta_bar)
           << ", next " << method_label(ar[2].second) << " "
           << fmt("%.2f", 100 * reps[0.8].cell(ar[2].second, 4, 0.95).stats.beta_bar);
    return {ok ? Status::Pass : Status::Fail, detail.str()};
}

// 8 -------------------------------------------------------------------------

Outcome figure3_signature() {
    std::map<int, CoverageReport> reps;
    for (int n : {100, 1000}) {
        ExperimentConfig cfg = model1(0.6, n, {1}, 0.9, Profile::Desk);
        cfg.dgp.model = ModelKind::M3;
        cfg.methods = methods_of({Method::AR_PROOT, Method::QAR_PROOT});
        cfg.seed = 8;
        resolve_B(cfg);
        reps[n] = run_experiment(cfg, opts.workers);
    }
    auto med = [&](int n, Method m) { return reps[n].cell(m, 1, 0.9).stats.median_beta; };
    const double a100 = med(100, Method::AR_PROOT), a1000 = med(1000, Method::AR_PROOT);
    const double q100 = med(100, Method::QAR_PROOT), q1000 = med(1000, Method::QAR_PROOT);
    const bool ar_stuck = std::abs(a1000 - 0.9) >= std::abs(a100 - 0.9);
    const bool qar_better = std::abs(q1000 - 0.9) < std::abs(q100 - 0.9);
    return {ar_stuck && qar_better ? Status::Pass : Status::Fail,
            "median AR-proot " + fmt("%.4f", a100) + " -> " + fmt("%.4f", a1000) + ", QAR-proot " + fmt("%.4f", q100) +
                " -> " + fmt("%.4f", q1000)};
}

// 9, 10 ---------------------------------------------------------------------

BacktestReport run_backtest(const TimeSeries& series, int window, int p) {
    BacktestConfig cfg;
    cfg.window = window;
    cfg.p = p;
    cfg.level = 0.95;
    cfg.seed = 9;
    // Reference coverages score all horizons on the same origins.
    cfg.common_origins = true;
    for (Method m : all_methods()) cfg.methods.push_back(MethodConfig{.method = m});
    return rwpoos(series, cfg, opts.workers);
}

Outcome unemployment_backtest() {
    const auto path = opts.data / "unrate_semiannual.csv";
    if (!fs::exists(path)) return {Status::Skip, "data absent: " + path.string()};
    const auto rep = run_backtest(load_series_csv(path.string()), 50, 2);
    const std::map<Method, std::array<double, 4>> reference{
        {Method::BJ, {93.14, 86.27, 83.33, 82.35}},       {Method::TS, {92.16, 87.25, 88.24, 85.29}},
        {Method::CB, {92.16, 87.25, 88.24, 81.37}},       {Method::PRR, {94.12, 88.24, 86.27, 82.35}},
        {Method::PRR_LAD, {93.14, 90.20, 88.24, 86.27}},  {Method::PP, {93.14, 89.22, 91.18, 88.24}},
        {Method::AR_PERC, {92.16, 91.18, 90.20, 92.16}},  {Method::AR_PROOT, {95.10, 92.16, 89.22, 88.24}},
        {Method::X, {88.24, 79.41, 74.51, 76.47}},        {Method::QAR_PERC, {91.18, 90.20, 82.35, 81.37}},
        {Method::QAR_PROOT, {94.12, 91.18, 88.24, 89.22}}};
    std::ostringstream detail;
    bool within = true;
    for (const auto& r : rep.results) {
        for (std::size_t h = 0; h < 4; ++h) {
            if (std::abs(r.coverage[h] - reference.at(r.method)[h]) > 2.5) {
                within = false;
                detail << method_label(r.method) << " k=" << h + 1 << " " << fmt("%.2f", r.coverage[h]) << "; ";
            }
        }
    }
    const double d = rep.result(Method::AR_PERC).d_bar;
    int rank = 1;
    for (const auto& r : rep.results) {
        if (r.d_bar < d) ++rank;
    }
    const bool ok = within && d <= 5.0 && rank <= 3;
    detail << "AR-perc D_bar " << fmt("%.2f", d) << " rank " << rank;
    return {ok ? Status::Pass : Status::Fail, detail.str()};
}

Outcome gasoline_backtest() {
    const auto path = opts.data / "gasoline_weekly.csv";
    if (!fs::exists(path)) return {Status::Skip, "data absent: " + path.string()};
    const auto rep = run_backtest(load_series_csv(path.string()), 600, 4);
    bool ok = true;
    std::ostringstream detail;
    for (const auto& r : rep.results) {
        for (double c : r.coverage) {
            if (is_qar_based(r.method) ? c < 92.0 : c > 90.0) {
                ok = false;
                detail << method_label(r.method) << " " << fmt("%.2f", c) << "; ";
                break;
            }
        }
    }
    const double d = rep.result(Method::QAR_PERC).d_bar;
    ok = ok && d <= 3.0;
    detail << "QAR-perc D_bar " << fmt("%.2f", d);
    return {ok ? Status::Pass : Status::Fail, detail.str()};
}

// 11 ------------------------------------------------------------------------

Outcome determinism() {
    const int other = opts.workers == 1 ? 3 : 1;
    std::vector<std::pair<std::string, ExperimentConfig>> cfgs = oracle_configs();
    cfgs.emplace_back("c3_m1_k1", m1_k1_config());
    cfgs.emplace_back("c4_m1_k3", m1_k3_config());
    cfgs.emplace_back("c5_m4", m4_config());
    int compared = 0;
    for (const auto& [name, cfg] : cfgs) {
        if (!runs.count(name)) experiment(name, cfg, opts.workers);
        experiment(name + "_rerun", cfg, other);
        for (const char* ext : {".csv", ".json", ".raw.csv"}) {
            const auto a = read_file(opts.out / (name + "_w" + std::to_string(opts.workers) + ext));
            const auto b = read_file(opts.out / (name + "_rerun_w" + std::to_string(other) + ext));
            if (a.empty() || a != b) return {Status::Fail, name + ext + " differs between worker counts"};
            ++compared;
        }
    }
    return {Status::Pass, std::to_string(compared) + " report files identical for " + std::to_string(opts.workers) +
                              " vs " + std::to_string(other) + " workers"};
}

// 12 ------------------------------------------------------------------------

Outcome timing_order() {
    constexpr int series_count = 10;
    DgpSpec spec;
    std::vector<std::vector<double>> series;
    for (int s = 0; s < series_count; ++s) {
        RngStream rng = RngStream(12, 0).substream(StreamTag::Timing, static_cast<std::uint64_t>(s));
        series.push_back(simulate_dgp(spec, 200, rng));
    }
    std::map<Method, double> mean;
    for (Method m : all_methods()) {
        MethodConfig cfg;
        cfg.method = m;
        cfg.max_horizon = 4;
        const auto t0 = std::chrono::steady_clock::now();
        for (int s = 0; s < series_count; ++s) {
            (void)prediction_intervals(series[static_cast<std::size_t>(s)], cfg,
                                       RngStream(12, 1).substream(StreamTag::Timing, static_cast<std::uint64_t>(s)));
        }
        mean[m] = seconds_since(t0) / series_count;
    }
    std::vector<std::string> broken;
    auto less = [&](Method a, Method b) {
        if (!(mean[a] < mean[b])) broken.push_back(std::string(method_label(a)) + "<" + std::string(method_label(b)));
    };
    for (Method m : {Method::TS, Method::PRR, Method::PRR_LAD, Method::PP}) less(Method::AR_PERC, m);
    less(Method::CB, Method::AR_PERC);
    less(Method::X, Method::QAR_PERC);
    less(Method::QAR_PERC, Method::QAR_PROOT);
    std::ostringstream detail;
    for (Method m : all_methods()) detail << method_label(m) << " " << fmt("%.4f", mean[m]) << " ";
    if (!broken.empty()) {
        detail << "| violated:";
        for (const auto& b : broken) detail << " " << b;
    }
    return {broken.empty() ? Status::Pass : Status::Fail, detail.str()};
}

}  // namespace

int main(int argc, char** argv) {
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--only" && i + 1 < argc) {
            std::stringstream ss(argv[++i]);
            std::string tok;
            while (std::getline(ss, tok, ',')) opts.only.insert(std::stoi(tok));
        } else if (a == "--workers" && i + 1 < argc) {
            opts.workers = std::max(1, std::stoi(argv[++i]));
        } else if (a == "--out" && i + 1 < argc) {
            opts.out = argv[++i];
        } else if (a == "--data" && i + 1 < argc) {
            opts.data = argv[++i];
        } else {
            std::cerr << "usage: acceptance [--only 1,2,...] [--workers N] [--out DIR] [--data DIR]\n";
            return 64;
        }
    }
    if (const char* d = std::getenv("QARCAST_DATA_DIR")) opts.data = d;

    const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
        {1, solver_oracle},         {2, oracle_exactness},      {3, m1_k1_cell},
        {4, m1_k3_cell},                {5, m4_cells},                {6, unit_root_mass},
        {7, figure1_trend},         {8, figure3_signature},     {9, unemployment_backtest},
        {10, gasoline_backtest},    {11, determinism},          {12, timing_order}};

    int failed = 0;
    for (const auto& [id, run] : criteria) {
        if (!opts.only.empty() && !opts.only.count(id)) continue;
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {Status::Fail, std::string("exception: ") + e.what()};
        }
        const char* tag = o.status == Status::Pass ? "PASS" : o.status == Status::Fail ? "FAIL" : "SKIP";
        if (o.status == Status::Fail) ++failed;
        std::cout << "criterion " << id << ": " << tag << "  " << o.detail << std::endl;
    }
    return failed;
}
