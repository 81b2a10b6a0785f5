#include "qarcast/error.hpp"
#include "qarcast/sim_lab.hpp"

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

using namespace qarcast;
using Catch::Approx;

TEST_CASE("Model 1 autocorrelation") {
    DgpSpec spec;
    spec.phi1 = 0.6;
    RngStream rng(1, 0);
    const auto y = simulate_dgp(spec, 100000, rng);
    const double m = std::accumulate(y.begin(), y.end(), 0.0) / y.size();
    double c0 = 0, c1 = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        c0 += (y[i] - m) * (y[i] - m);
        if (i > 0) c1 += (y[i] - m) * (y[i - 1] - m);
    }
    CHECK(std::abs(c1 / c0 - 0.6) < 0.02);
}

TEST_CASE("Model 2 recursion with p=2") {
    DgpSpec spec;
    spec.model = ModelKind::M2;
    spec.m2_order = 2;
    spec.law = InnovationLaw::zero();
    RngStream rng(1, 0);
    const std::vector<double> path{2.0, 4.0};
    CHECK(dgp_step(spec, path, rng) == Approx(0.75 * 4.0 - 0.5 * 2.0));
    spec.m2_order = 6;
    const std::vector<double> six{1, 2, 3, 4, 5, 6};
    // lags 1..6 = 6,5,4,3,2,1 with coefficients .75, -.5, .5, -.5, .5, -.5
    CHECK(dgp_step(spec, six, rng) == Approx(0.75 * 6 - 0.5 * 5 + 0.5 * 4 - 0.5 * 3 + 0.5 * 2 - 0.5 * 1));
}

TEST_CASE("Model 3 unit-root mass") {
    DgpSpec spec;
    spec.model = ModelKind::M3;
    RngStream rng(6, 0);
    std::vector<double> slopes;
    (void)simulate_dgp_traced(spec, 1000000, rng, slopes);
    const auto boundary = std::count(slopes.begin(), slopes.end(), 1.0);
    CHECK(std::abs(static_cast<double>(boundary) / 1e6 - 0.118) < 0.003);

    spec.reading = CoefReading::LiteralCdf;
    RngStream rng2(6, 1);
    (void)simulate_dgp_traced(spec, 100000, rng2, slopes);
    CHECK(std::count(slopes.begin(), slopes.end(), 1.0) == 0);
}

TEST_CASE("Model 4 coefficient function") {
    DgpSpec spec;
    spec.model = ModelKind::M4;
    CHECK(qar_slope(spec, 0.5) == Approx(0.35));
    CHECK(spec.order() == 2);
}

TEST_CASE("true futures") {
    DgpSpec spec;
    spec.phi1 = 0.0;
    const std::vector<double> hist{3.0};
    const auto f = draw_true_futures(spec, hist, 1, 1000, RngStream(2, 2));
    // Kolmogorov distance to N(0,1)
    std::vector<double> s(f);
    std::sort(s.begin(), s.end());
    double ks = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double F = cdf(InnovationLaw::normal(), s[i]);
        ks = std::max({ks, std::abs(F - (i + 1.0) / s.size()), std::abs(F - static_cast<double>(i) / s.size())});
    }
    CHECK(ks < 0.05);

    spec.phi1 = 0.6;
    spec.law = InnovationLaw::zero();
    for (double v : draw_true_futures(spec, hist, 3, 10, RngStream(2, 3))) CHECK(v == Approx(3.0 * 0.216));

    spec.law = InnovationLaw::normal();
    const auto f2 = draw_true_futures(spec, hist, 2, 200000, RngStream(2, 4));
    const double m = std::accumulate(f2.begin(), f2.end(), 0.0) / f2.size();
    double v = 0;
    for (double x : f2) v += (x - m) * (x - m);
    CHECK(v / f2.size() == Approx(1.36).epsilon(0.02));
    CHECK(m == Approx(3.0 * 0.36).margin(0.01));
}

TEST_CASE("conditional coverage counting") {
    const std::vector<double> fut{1, 2, 3, 4};
    const auto s = conditional_coverage(1.5, 3.5, fut);
    CHECK(s.beta == 0.5);
    CHECK(s.above == 0.25);
    CHECK(s.below == 0.25);
    const auto all = conditional_coverage(-1e300, 1e300, fut);
    CHECK(all.beta == 1.0);
    RngStream rng(3, 3);
    for (int t = 0; t < 100; ++t) {
        std::vector<double> f(50);
        for (auto& x : f) x = draw_standard_normal(rng);
        const double a = draw_standard_normal(rng);
        const auto c = conditional_coverage(a, a + 1.0, f);
        CHECK(c.beta + c.above + c.below == Approx(1.0).margin(1e-15));
    }
}

TEST_CASE("aggregate formulas") {
    const std::vector<double> flat(10, 0.95);
    const std::vector<double> zero(10, 0.025);
    const std::vector<double> len(10, 2.0);
    const auto a = aggregate(flat, zero, zero, len, 0.95);
    CHECK(a.mse == Approx(0.0).margin(1e-15));
    CHECK(a.gamma_hat == 1.0);
    CHECK(a.se == Approx(0.0).margin(1e-15));

    std::vector<double> half;
    for (int i = 0; i < 10; ++i) half.push_back(i % 2 ? 0.97 : 0.93);
    const auto b = aggregate(half, zero, zero, len, 0.95);
    CHECK(b.gamma_hat == 0.5);
    CHECK(b.beta_bar == Approx(0.95));
    CHECK(b.mse == Approx(0.0004));

    RngStream rng(4, 4);
    std::vector<double> r(37), l(37);
    for (auto& x : r) x = 0.9 + 0.1 * rng.uniform();
    for (auto& x : l) x = 3.0 + rng.uniform();
    const auto c = aggregate(r, zero.size() == 37 ? zero : std::vector<double>(37, 0.0), std::vector<double>(37, 0.0), l, 0.95);
    const double S = 37.0;
    double var = 0, lv = 0;
    const double lm = std::accumulate(l.begin(), l.end(), 0.0) / S;
    for (std::size_t i = 0; i < 37; ++i) {
        var += (r[i] - c.beta_bar) * (r[i] - c.beta_bar);
        lv += (l[i] - lm) * (l[i] - lm);
    }
    var /= (S - 1.0);
    CHECK(c.mse == Approx((S - 1.0) / S * var + (c.beta_bar - 0.95) * (c.beta_bar - 0.95)).epsilon(1e-12));
    CHECK(c.se == Approx(std::sqrt(var / S)).epsilon(1e-12));
    CHECK(c.len_se == Approx(std::sqrt(lv / (S - 1.0)) / S).epsilon(1e-12));
    CHECK_THROWS_AS(aggregate(std::vector<double>{0.9}, std::vector<double>{0.0}, std::vector<double>{0.0},
                              std::vector<double>{1.0}, 0.9),
                    Error);
}

TEST_CASE("smoke experiment and determinism across workers") {
    const std::string text = R"({
        "dgp": {"model": "M1", "phi1": 0.5, "law": "t3"},
        "n": 30, "horizons": [1, 2], "S": 6, "F": 100, "beta": [0.9, 0.95], "seed": 11,
        "methods": ["bj", "ar-perc", {"method": "qar-proot", "B": 100}, {"method": "oracle", "oracle_draws": 500}],
        "B_ar": 100
    })";
    const auto cfg = parse_experiment_config(text);
    CHECK(cfg.S == 6);
    CHECK(cfg.methods.size() == 4);
    const auto one = run_experiment(cfg, 1);
    const auto three = run_experiment(cfg, 3);
    CHECK(one.cells.size() == 4 * 2 * 2);
    CHECK(one.total_failures() == 0);
    std::ostringstream a1, a2, b1, b2, c1, c2;
    write_report_csv(a1, one);
    write_report_csv(a2, three);
    write_report_json(b1, one);
    write_report_json(b2, three);
    write_raw_csv(c1, one);
    write_raw_csv(c2, three);
    CHECK(a1.str() == a2.str());
    CHECK(b1.str() == b2.str());
    CHECK(c1.str() == c2.str());
    for (const auto& cell : one.cells) {
        for (std::size_t i = 0; i < cell.beta_s.size(); ++i) {
            CHECK(cell.beta_s[i] + cell.above_s[i] + cell.below_s[i] == Approx(1.0).margin(1e-12));
        }
    }
}

TEST_CASE("config errors name the key path") {
    auto expect = [](const std::string& text, const std::string& needle) {
        try {
            (void)parse_experiment_config(text);
            FAIL("expected ConfigError");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::ConfigError);
            CHECK(std::string(e.what()).find(needle) != std::string::npos);
        }
    };
    expect("{", "(document)");
    expect(R"({"dgp": {"model": "M1", "phi1": "x"}, "methods": ["bj"]})", "dgp.phi1");
    expect(R"({"dgp": {"model": "M1"}, "methods": ["bj", {"method": "nope"}]})", "methods[1].method");
    expect(R"({"dgp": {"model": "M1"}, "methods": ["bj"], "colour": 1})", "colour");
    expect(R"({"methods": ["bj"]})", "dgp");
}

TEST_CASE("profiles") {
    CHECK(profile_defaults(Profile::Desk).S == 200);
    CHECK(profile_defaults(Profile::Paper).B_qar == 5000);
    const auto cfg = parse_experiment_config(R"({"dgp": {"model": "M4"}, "methods": ["all"], "profile": "paper"})");
    CHECK(cfg.S == 500);
    CHECK(cfg.F == 1000);
    CHECK(cfg.methods.size() == 11);
}
