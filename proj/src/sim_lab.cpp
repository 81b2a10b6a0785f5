#include "qarcast/sim_lab.hpp"

#include "qarcast/error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

namespace qarcast {

int DgpSpec::order() const noexcept {
    switch (model) {
        case ModelKind::M1: return 1;
        case ModelKind::M2: return m2_order;
        case ModelKind::M3: return 1;
        case ModelKind::M4: return 2;
    }
    return 1;
}

void DgpSpec::validate() const {
    auto bad = [](const std::string& msg) { throw Error(ErrorKind::InvalidArgument, msg); };
    if (burn_in < 0) bad("burn-in must be non-negative");
    if (model == ModelKind::M1 && !(phi1 > -1.0 && phi1 < 1.0)) bad("Model 1 needs |phi1| < 1");
    if (model == ModelKind::M2 && m2_order < 2) bad("Model 2 needs p >= 2");
    if (law.kind == LawKind::StudentT || law.kind == LawKind::ChiSquared) {
        if (law.df < 1) bad("degrees of freedom must be positive");
    }
}

std::string DgpSpec::describe() const {
    std::string s = model_name(model);
    if (model == ModelKind::M1) s += "(phi1=" + std::to_string(phi1) + ")";
    if (model == ModelKind::M2) s += "(p=" + std::to_string(m2_order) + ")";
    return s + " " + law_name(law);
}

std::string model_name(ModelKind model) {
    switch (model) {
        case ModelKind::M1: return "M1";
        case ModelKind::M2: return "M2";
        case ModelKind::M3: return "M3";
        case ModelKind::M4: return "M4";
    }
    return "M1";
}

ModelKind parse_model(const std::string& name) {
    if (name == "M1" || name == "m1" || name == "1") return ModelKind::M1;
    if (name == "M2" || name == "m2" || name == "2") return ModelKind::M2;
    if (name == "M3" || name == "m3" || name == "3") return ModelKind::M3;
    if (name == "M4" || name == "m4" || name == "4") return ModelKind::M4;
    throw Error(ErrorKind::InvalidArgument, "unknown model '" + name + "'");
}

double qar_slope(const DgpSpec& spec, double u) {
    const double g = spec.reading == CoefReading::Uniform ? u : cdf(spec.law, u);
    if (spec.model == ModelKind::M4) return 0.7 * g;
    return std::min(spec.gamma0 + spec.gamma1 * g, 1.0);
}

namespace {

double additive_innovation(const DgpSpec& spec, RngStream& rng) {
    const double a = draw(spec.law, rng);
    return spec.median_center ? a - median(spec.law) : a;
}

double step_traced(const DgpSpec& spec, std::span<const double> path, RngStream& rng, double* slope) {
    const std::size_t t = path.size();
    switch (spec.model) {
        case ModelKind::M1: return spec.phi1 * path[t - 1] + additive_innovation(spec, rng);
        case ModelKind::M2: {
            double v = 0.75 * path[t - 1];
            for (int lag = 2; lag <= spec.m2_order; ++lag) {
                const double sign = (lag % 2 == 0) ? -1.0 : 1.0;
                v += sign * 0.5 * path[t - static_cast<std::size_t>(lag)];
            }
            return v + additive_innovation(spec, rng);
        }
        case ModelKind::M3: {
            const double u = rng.uniform_open();
            const double phi1 = qar_slope(spec, u);
            if (slope) *slope = phi1;
            return inverse_cdf(spec.law, u) + phi1 * path[t - 1];
        }
        case ModelKind::M4: {
            const double u = rng.uniform_open();
            const double phi2 = qar_slope(spec, u);
            if (slope) *slope = phi2;
            return inverse_cdf(spec.law, u) + 0.3 * path[t - 1] + phi2 * path[t - 2];
        }
    }
    return 0.0;
}

std::vector<double> simulate_impl(const DgpSpec& spec, int n, RngStream& rng, std::vector<double>* trace) {
    spec.validate();
    if (n < 1) throw Error(ErrorKind::InvalidArgument, "series length must be positive");
    const auto order = static_cast<std::size_t>(spec.order());
    const auto total = static_cast<std::size_t>(spec.burn_in) + static_cast<std::size_t>(n);
    std::vector<double> path(order, 0.0);
    path.reserve(order + total);
    if (trace) trace->clear();
    for (std::size_t i = 0; i < total; ++i) {
        double slope = std::numeric_limits<double>::quiet_NaN();
        path.push_back(step_traced(spec, path, rng, &slope));
        if (trace && i >= static_cast<std::size_t>(spec.burn_in)) trace->push_back(slope);
    }
    return {path.end() - n, path.end()};
}

}  // namespace

double dgp_step(const DgpSpec& spec, std::span<const double> path, RngStream& rng) {
    if (path.size() < static_cast<std::size_t>(spec.order())) {
        throw Error(ErrorKind::InvalidArgument, "path shorter than the model order");
    }
    return step_traced(spec, path, rng, nullptr);
}

std::vector<double> simulate_dgp(const DgpSpec& spec, int n, RngStream& rng) {
    return simulate_impl(spec, n, rng, nullptr);
}

std::vector<double> simulate_dgp_traced(const DgpSpec& spec, int n, RngStream& rng, std::vector<double>& slopes) {
    return simulate_impl(spec, n, rng, &slopes);
}

std::vector<double> simulate_path(const DgpSpec& spec, std::span<const double> history, int steps, RngStream& rng) {
    const auto order = static_cast<std::size_t>(spec.order());
    if (history.size() < order) throw Error(ErrorKind::InvalidArgument, "history shorter than the model order");
    std::vector<double> path(history.end() - static_cast<std::ptrdiff_t>(order), history.end());
    path.reserve(order + static_cast<std::size_t>(steps));
    for (int j = 0; j < steps; ++j) path.push_back(step_traced(spec, path, rng, nullptr));
    return {path.begin() + static_cast<std::ptrdiff_t>(order), path.end()};
}

std::vector<std::vector<double>> draw_future_paths(const DgpSpec& spec, std::span<const double> history, int K,
                                                   int F, const RngStream& rng) {
    if (K < 1 || F < 1) throw Error(ErrorKind::InvalidArgument, "need K >= 1 and F >= 1");
    std::vector<std::vector<double>> out(static_cast<std::size_t>(K), std::vector<double>(static_cast<std::size_t>(F)));
    RngStream stream = rng;
    for (int f = 0; f < F; ++f) {
        const auto path = simulate_path(spec, history, K, stream);
        for (int k = 0; k < K; ++k) out[static_cast<std::size_t>(k)][static_cast<std::size_t>(f)] = path[static_cast<std::size_t>(k)];
    }
    return out;
}

std::vector<double> draw_true_futures(const DgpSpec& spec, std::span<const double> history, int k, int F,
                                      const RngStream& rng) {
    return std::move(draw_future_paths(spec, history, k, F, rng).back());
}

FutureSampler make_future_sampler(const DgpSpec& spec) {
    return [spec](std::span<const double> history, int steps, RngStream& rng) {
        return simulate_path(spec, history, steps, rng);
    };
}

CoverageScore conditional_coverage(double lower, double upper, std::span<const double> futures) {
    if (futures.empty()) throw Error(ErrorKind::EmptyInput, "no future values to score");
    std::size_t inside = 0;
    std::size_t above = 0;
    std::size_t below = 0;
    for (double y : futures) {
        if (y > upper) {
            ++above;
        } else if (y < lower) {
            ++below;
        } else if (y > lower && y < upper) {
            ++inside;
        }
    }
    const auto F = static_cast<double>(futures.size());
    CoverageScore s;
    s.beta = static_cast<double>(inside) / F;
    s.above = static_cast<double>(above) / F;
    s.below = static_cast<double>(below) / F;
    return s;
}

CoverageScore conditional_coverage(const PredictionInterval& interval, std::span<const double> futures) {
    return conditional_coverage(interval.lower, interval.upper, futures);
}

CellStats aggregate(std::span<const double> beta_s, std::span<const double> above_s,
                    std::span<const double> below_s, std::span<const double> lengths, double level) {
    const std::size_t S = beta_s.size();
    if (S < 2 || above_s.size() != S || below_s.size() != S || lengths.size() != S) {
        throw Error(ErrorKind::InvalidArgument, "aggregate needs S >= 2 replications of every statistic");
    }
    const auto s = static_cast<double>(S);
    auto mean = [&](std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0) / s; };
    CellStats out;
    out.S = static_cast<int>(S);
    out.beta_bar = mean(beta_s);
    out.a_bar = mean(above_s);
    out.b_bar = mean(below_s);
    out.len_bar = mean(lengths);
    double ss = 0.0;
    double mse = 0.0;
    double ls = 0.0;
    int at_or_above = 0;
    for (std::size_t i = 0; i < S; ++i) {
        ss += (beta_s[i] - out.beta_bar) * (beta_s[i] - out.beta_bar);
        mse += (beta_s[i] - level) * (beta_s[i] - level);
        ls += (lengths[i] - out.len_bar) * (lengths[i] - out.len_bar);
        at_or_above += beta_s[i] >= level ? 1 : 0;
    }
    out.se = std::sqrt(ss / (s - 1.0)) / std::sqrt(s);
    out.mse = mse / s;
    out.len_se = std::sqrt(ls / (s - 1.0)) / s;
    out.gamma_hat = at_or_above / s;
    std::vector<double> sorted(beta_s.begin(), beta_s.end());
    std::sort(sorted.begin(), sorted.end());
    out.median_beta = S % 2 == 1 ? sorted[S / 2] : 0.5 * (sorted[S / 2 - 1] + sorted[S / 2]);
    return out;
}

ProfileDefaults profile_defaults(Profile profile) noexcept {
    if (profile == Profile::Paper) return {500, 1000, 1000, 5000};
    return {200, 500, 500, 2000};
}

Profile parse_profile(const std::string& name) {
    if (name == "desk") return Profile::Desk;
    if (name == "paper") return Profile::Paper;
    throw Error(ErrorKind::InvalidArgument, "unknown profile '" + name + "' (expected desk or paper)");
}

std::string profile_name(Profile profile) { return profile == Profile::Paper ? "paper" : "desk"; }

Profile default_profile() {
    if (const char* env = std::getenv("QARCAST_PROFILE")) {
        const std::string v(env);
        if (v == "paper") return Profile::Paper;
    }
    return Profile::Desk;
}

int ExperimentConfig::max_horizon() const {
    return horizons.empty() ? 0 : *std::max_element(horizons.begin(), horizons.end());
}

void ExperimentConfig::validate() const {
    auto bad = [](const std::string& msg) { throw Error(ErrorKind::ConfigError, msg); };
    dgp.validate();
    if (n < 1) bad("n must be positive");
    if (S < 2) bad("S must be at least 2");
    if (F < 1) bad("F must be at least 1");
    if (horizons.empty()) bad("at least one horizon is required");
    for (int k : horizons) {
        if (k < 1) bad("horizons must be positive");
    }
    if (methods.empty()) bad("at least one method is required");
    if (levels.empty()) bad("at least one level is required");
    for (double b : levels) {
        if (!(b > 0.0 && b < 1.0)) bad("levels must lie in (0,1)");
    }
}

const CellReport& CoverageReport::cell(Method method, int horizon, double level) const {
    for (const auto& c : cells) {
        if (c.method == method && c.horizon == horizon && std::abs(c.level - level) < 1e-12) return c;
    }
    throw Error(ErrorKind::InvalidArgument, "report has no such cell");
}

int CoverageReport::total_failures() const {
    int total = 0;
    for (const auto& c : cells) total += c.failures;
    return total;
}

namespace {

std::vector<MethodConfig> resolve_methods(const ExperimentConfig& cfg) {
    const auto defaults = profile_defaults(cfg.profile);
    std::vector<MethodConfig> out;
    for (MethodConfig m : cfg.methods) {
        if (m.p <= 0) m.p = cfg.dgp.order();
        if (m.B <= 0) m.B = is_qar_based(m.method) ? defaults.B_qar : defaults.B_ar;
        m.levels = cfg.levels;
        m.max_horizon = cfg.max_horizon();
        m.validate();
        out.push_back(m);
    }
    return out;
}

struct MethodOutcome {
    bool ok = false;
    // indexed [horizon slot][level]
    std::vector<CoverageScore> scores;
    std::vector<double> lengths;
};

}  // namespace

CoverageReport run_experiment(const ExperimentConfig& cfg, int workers, const ProgressCallback& progress) {
    cfg.validate();
    const auto methods = resolve_methods(cfg);
    const int K = cfg.max_horizon();
    const std::size_t H = cfg.horizons.size();
    const std::size_t L = cfg.levels.size();
    const FutureSampler sampler = make_future_sampler(cfg.dgp);

    std::vector<std::vector<MethodOutcome>> outcomes(static_cast<std::size_t>(cfg.S),
                                                     std::vector<MethodOutcome>(methods.size()));
    std::atomic<int> next{0};
    std::atomic<int> done{0};
    std::mutex progress_mutex;

    auto work = [&] {
        for (;;) {
            const int s = next.fetch_add(1);
            if (s >= cfg.S) return;
            const RngStream rep = RngStream(cfg.seed, 0).substream(StreamTag::Replication, static_cast<std::uint64_t>(s));
            RngStream series_rng = rep.substream(StreamTag::Series, 0);
            const auto series = simulate_dgp(cfg.dgp, cfg.n, series_rng);
            const auto futures = draw_future_paths(cfg.dgp, series, K, cfg.F, rep.substream(StreamTag::Futures, 0));
            for (std::size_t mi = 0; mi < methods.size(); ++mi) {
                const MethodConfig& mc = methods[mi];
                MethodOutcome& out = outcomes[static_cast<std::size_t>(s)][mi];
                try {
                    const RngStream mrng = rep.substream(StreamTag::Method, static_cast<std::uint64_t>(mc.method));
                    const auto intervals = prediction_intervals(series, mc, mrng, &sampler);
                    out.scores.resize(H * L);
                    out.lengths.resize(H * L);
                    for (std::size_t h = 0; h < H; ++h) {
                        const int k = cfg.horizons[h];
                        for (std::size_t l = 0; l < L; ++l) {
                            const auto& pi = find_interval(intervals, k, cfg.levels[l]);
                            out.scores[h * L + l] = conditional_coverage(pi, futures[static_cast<std::size_t>(k - 1)]);
                            out.lengths[h * L + l] = pi.upper - pi.lower;
                        }
                    }
                    out.ok = true;
                } catch (const Error&) {
                    out.ok = false;
                }
            }
            const int finished = done.fetch_add(1) + 1;
            if (progress) {
                std::lock_guard<std::mutex> lock(progress_mutex);
                progress(finished, cfg.S);
            }
        }
    };

    const int n_workers = std::max(1, std::min(workers, cfg.S));
    if (n_workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_workers));
        for (int w = 0; w < n_workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }

    CoverageReport report;
    report.config = cfg;
    report.config.methods = methods;
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
        for (std::size_t h = 0; h < H; ++h) {
            for (std::size_t l = 0; l < L; ++l) {
                CellReport cell;
                cell.method = methods[mi].method;
                cell.horizon = cfg.horizons[h];
                cell.level = cfg.levels[l];
                for (int s = 0; s < cfg.S; ++s) {
                    const auto& o = outcomes[static_cast<std::size_t>(s)][mi];
                    if (!o.ok) {
                        ++cell.failures;
                        continue;
                    }
                    const auto& sc = o.scores[h * L + l];
                    cell.replication.push_back(s);
                    cell.beta_s.push_back(sc.beta);
                    cell.above_s.push_back(sc.above);
                    cell.below_s.push_back(sc.below);
                    cell.length_s.push_back(o.lengths[h * L + l]);
                }
                if (cell.beta_s.size() >= 2) {
                    cell.stats = aggregate(cell.beta_s, cell.above_s, cell.below_s, cell.length_s, cell.level);
                } else {
                    const double nan = std::numeric_limits<double>::quiet_NaN();
                    cell.stats = CellStats{static_cast<int>(cell.beta_s.size()), nan, nan, nan, nan, nan, nan, nan, nan, nan};
                }
                report.cells.push_back(std::move(cell));
            }
        }
    }
    return report;
}

}  // namespace qarcast
