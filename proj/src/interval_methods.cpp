#include "qarcast/interval_methods.hpp"

#include "qarcast/distributions.hpp"
#include "qarcast/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

namespace qarcast {

namespace {

struct MethodInfo {
    Method method;
    std::string_view tag;
    std::string_view label;
};

constexpr std::array<MethodInfo, 12> kMethods{{
    {Method::BJ, "bj", "BJ"},
    {Method::TS, "ts", "TS"},
    {Method::CB, "cb", "CB"},
    {Method::PRR, "prr", "PRR"},
    {Method::PRR_LAD, "prr-lad", "PRR-LAD"},
    {Method::PP, "pp", "PP"},
    {Method::AR_PERC, "ar-perc", "AR-perc"},
    {Method::AR_PROOT, "ar-proot", "AR-proot"},
    {Method::X, "x", "X"},
    {Method::QAR_PERC, "qar-perc", "QAR-perc"},
    {Method::QAR_PROOT, "qar-proot", "QAR-proot"},
    {Method::ORACLE, "oracle", "ORACLE"},
}};

const MethodInfo& info(Method method) {
    for (const auto& m : kMethods) {
        if (m.method == method) return m;
    }
    return kMethods.back();
}

double next_value(std::span<const double> coefs, const std::vector<double>& path) {
    const std::size_t p = coefs.size() - 1;
    const std::size_t now = path.size();
    double v = coefs[0];
    for (std::size_t j = 1; j <= p; ++j) v += coefs[j] * path[now - j];
    return v;
}

std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

/// Simulates a length-n series forward from a block of p consecutive observed
/// values chosen uniformly, with innovations drawn from dist.
std::vector<double> forward_regeneration(std::span<const double> series, int p, std::span<const double> coefs,
                                         const EmpiricalResidualDist& dist, bool zero_innovations,
                                         RngStream& rng) {
    const std::size_t n = series.size();
    const auto pp = static_cast<std::size_t>(p);
    const std::size_t start = rng.index(n - pp + 1);
    std::vector<double> y(series.begin() + static_cast<std::ptrdiff_t>(start),
                          series.begin() + static_cast<std::ptrdiff_t>(start + pp));
    y.reserve(n);
    while (y.size() < n) {
        const double e = zero_innovations ? 0.0 : dist.draw(rng);
        y.push_back(next_value(coefs, y) + e);
    }
    return y;
}

std::vector<double> draw_innovations(const EmpiricalResidualDist& dist, int k, bool zero, RngStream& rng) {
    std::vector<double> e(static_cast<std::size_t>(k), 0.0);
    if (!zero) {
        for (auto& v : e) v = dist.draw(rng);
    }
    return e;
}

struct Streams {
    RngStream multipliers;
    RngStream innovations;
    RngStream uniforms;
    RngStream regeneration;

    Streams(const RngStream& rng, int b)
        : multipliers(rep(rng, b).substream(StreamTag::Multipliers, 0)),
          innovations(rep(rng, b).substream(StreamTag::Innovations, 0)),
          uniforms(rep(rng, b).substream(StreamTag::Uniforms, 0)),
          regeneration(rep(rng, b).substream(StreamTag::SeriesRegen, 0)) {}

    static RngStream rep(const RngStream& rng, int b) {
        return rng.substream(StreamTag::Replication, static_cast<std::uint64_t>(b));
    }
};

double uniform_draw(const MethodConfig& cfg, RngStream& rng) {
    return cfg.fixed_uniform ? *cfg.fixed_uniform : rng.uniform_open();
}

BootstrapDraws make_draws(const MethodConfig& cfg, bool root_based) {
    BootstrapDraws d;
    d.method = cfg.method;
    d.root_based = root_based;
    d.values.assign(static_cast<std::size_t>(cfg.max_horizon),
                    std::vector<double>(static_cast<std::size_t>(cfg.replications())));
    return d;
}

// ---------------------------------------------------------------- AR (quantile)

BootstrapDraws ar_perc(std::span<const double> series, const MethodConfig& cfg, const RngStream& rng) {
    const LaggedDesign design = build_design(series, cfg.p);
    const QuantileRegression qr(design);
    const QrSolution fit = qr.solve(cfg.tau);
    EmpiricalResidualDist dist;
    dist.kind = ResidualKind::Ordinary;
    {
        const Eigen::Map<const Eigen::VectorXd> beta(fit.coefs.coefs.data(), design.regressors.cols());
        dist.atoms = to_vector(design.responses - design.regressors * beta);
    }
    const auto history = series.last(static_cast<std::size_t>(cfg.p));
    const int K = cfg.max_horizon;

    BootstrapDraws out = make_draws(cfg, false);
    out.point = predict_recursive(history, fit.coefs, K);
    std::vector<double> w(design.rows());
    for (int b = 0; b < cfg.replications(); ++b) {
        Streams s(rng, b);
        draw_multipliers(cfg.multipliers, s.multipliers, w);
        const auto star = qr.solve(cfg.tau, w, fit.basis);
        const auto e = draw_innovations(dist, K, cfg.zero_innovations, s.innovations);
        const auto path = simulate_forward(history, star.coefs, e);
        for (int k = 0; k < K; ++k) out.values[static_cast<std::size_t>(k)][static_cast<std::size_t>(b)] = path[static_cast<std::size_t>(k)];
    }
    return out;
}

BootstrapDraws ar_proot(std::span<const double> series, const MethodConfig& cfg, const RngStream& rng) {
    const LaggedDesign design = build_design(series, cfg.p);
    const QuantileRegression qr(design);
    const QrSolution fit = qr.solve(cfg.tau);
    const EmpiricalResidualDist dist = predictive_residuals(series, cfg.p, cfg.tau, cfg.loo);
    const auto history = series.last(static_cast<std::size_t>(cfg.p));
    const int K = cfg.max_horizon;
    const int B = cfg.replications();

    BootstrapDraws out = make_draws(cfg, true);
    out.point = predict_recursive(history, fit.coefs, K);
    out.estimation_part.resize(static_cast<std::size_t>(B));
    out.innovation_part.resize(static_cast<std::size_t>(B));
    std::vector<double> w(design.rows());
    for (int b = 0; b < B; ++b) {
        Streams s(rng, b);
        draw_multipliers(cfg.multipliers, s.multipliers, w);
        const auto star = qr.solve(cfg.tau, w, fit.basis);
        const auto predicted = predict_recursive(history, star.coefs, K);
        const auto e = draw_innovations(dist, K, cfg.zero_innovations, s.innovations);
        const auto future = simulate_forward(history, fit.coefs, e);
        for (int k = 0; k < K; ++k) {
            const auto kk = static_cast<std::size_t>(k);
            out.values[kk][static_cast<std::size_t>(b)] = future[kk] - predicted[kk];
        }
        out.estimation_part[static_cast<std::size_t>(b)] = out.point[0] - predicted[0];
        out.innovation_part[static_cast<std::size_t>(b)] = e[0];
    }
    return out;
}

// ------------------------------------------------------------------------ QAR

BootstrapDraws qar_percentile(std::span<const double> series, const MethodConfig& cfg, const RngStream& rng,
                              bool perturb) {
    const LaggedDesign design = build_design(series, cfg.p);
    const QuantileFitter fitter(design);
    const auto history = series.last(static_cast<std::size_t>(cfg.p));
    const int K = cfg.max_horizon;

    BootstrapDraws out = make_draws(cfg, false);
    out.point = predict_recursive(history, fitter.fit(cfg.tau), K);
    std::vector<double> w(perturb ? design.rows() : 0);
    std::vector<double> path;
    for (int b = 0; b < cfg.replications(); ++b) {
        Streams s(rng, b);
        if (perturb) draw_multipliers(cfg.multipliers, s.multipliers, w);
        path.assign(history.begin(), history.end());
        for (int k = 0; k < K; ++k) {
            const double u = uniform_draw(cfg, s.uniforms);
            const auto coefs = fitter.fit(u, w);
            path.push_back(next_value(coefs, path));
            out.values[static_cast<std::size_t>(k)][static_cast<std::size_t>(b)] = path.back();
        }
    }
    return out;
}

BootstrapDraws qar_proot(std::span<const double> series, const MethodConfig& cfg, const RngStream& rng) {
    const LaggedDesign design = build_design(series, cfg.p);
    const QuantileFitter fitter(design);
    const auto history = series.last(static_cast<std::size_t>(cfg.p));
    const int K = cfg.max_horizon;
    const int B = cfg.replications();
    const auto fit0 = fitter.fit(cfg.tau);

    BootstrapDraws out = make_draws(cfg, true);
    out.point = predict_recursive(history, fit0, K);
    out.estimation_part.resize(static_cast<std::size_t>(B));
    out.innovation_part.resize(static_cast<std::size_t>(B));
    std::vector<double> w(design.rows());
    std::vector<double> path;
    for (int b = 0; b < B; ++b) {
        Streams s(rng, b);
        draw_multipliers(cfg.multipliers, s.multipliers, w);
        const auto star = fitter.fit(cfg.tau, w);
        const auto predicted = predict_recursive(history, star, K);
        path.assign(history.begin(), history.end());
        for (int k = 0; k < K; ++k) {
            const double u = uniform_draw(cfg, s.uniforms);
            const auto coefs = fitter.fit(u);
            path.push_back(next_value(coefs, path));
            const auto kk = static_cast<std::size_t>(k);
            out.values[kk][static_cast<std::size_t>(b)] = path.back() - predicted[kk];
        }
        out.estimation_part[static_cast<std::size_t>(b)] = out.point[0] - predicted[0];
        out.innovation_part[static_cast<std::size_t>(b)] = path[static_cast<std::size_t>(cfg.p)] - out.point[0];
    }
    return out;
}

// ---------------------------------------------------------- least-squares family

BootstrapDraws thombs_schucany(std::span<const double> series, const MethodConfig& cfg, const RngStream& rng) {
    const int p = cfg.p;
    const auto n = series.size();
    const ARFit forward = fit_ar_ls(series, p);
    const auto forward_dist = residual_dist(forward, ResidualKind::RescaledCentered);

    // Backward representation: Y_t on (1, Y_{t+1}, ..., Y_{t+p}).
    const std::vector<double> reversed(series.rbegin(), series.rend());
    const ARFit backward = fit_ar_ls(reversed, p);
    const auto backward_dist = residual_dist(backward, ResidualKind::RescaledCentered);

    const auto history = series.last(static_cast<std::size_t>(p));
    const int K = cfg.max_horizon;
    BootstrapDraws out = make_draws(cfg, false);
    out.point = predict_recursive(history, forward.coefs, K);

    std::vector<double> rev;
    for (int b = 0; b < cfg.replications(); ++b) {
        Streams s(rng, b);
        // reversed bootstrap series, starting from Y_n, ..., Y_{n-p+1}
        rev.assign(reversed.begin(), reversed.begin() + p);
        while (rev.size() < n) {
            const double e = cfg.zero_innovations ? 0.0 : backward_dist.draw(s.regeneration);
            rev.push_back(next_value(backward.coefs.coefs, rev) + e);
        }
        const std::vector<double> star_series(rev.rbegin(), rev.rend());
        const ARFit star = fit_ar_ls(star_series, p);
        const auto e = draw_innovations(forward_dist, K, cfg.zero_innovations, s.innovations);
        const auto path = simulate_forward(history, star.coefs, e);
        for (int k = 0; k < K; ++k) out.values[static_cast<std::size_t>(k)][static_cast<std::size_t>(b)] = path[static_cast<std::size_t>(k)];
    }
    return out;
}

BootstrapDraws cao(std::span<const double> series, const MethodConfig& cfg, const RngStream& rng) {
    const ARFit fit = fit_ar_ls(series, cfg.p);
    const auto dist = residual_dist(fit, ResidualKind::RescaledCentered);
    const auto history = series.last(static_cast<std::size_t>(cfg.p));
    const int K = cfg.max_horizon;
    BootstrapDraws out = make_draws(cfg, false);
    out.point = predict_recursive(history, fit.coefs, K);
    for (int b = 0; b < cfg.replications(); ++b) {
        Streams s(rng, b);
        const auto e = draw_innovations(dist, K, cfg.zero_innovations, s.innovations);
        const auto path = simulate_forward(history, fit.coefs, e);
        for (int k = 0; k < K; ++k) out.values[static_cast<std::size_t>(k)][static_cast<std::size_t>(b)] = path[static_cast<std::size_t>(k)];
    }
    return out;
}

BootstrapDraws pascual_romo_ruiz(std::span<const double> series, const MethodConfig& cfg, const RngStream& rng,
                                 bool lad) {
    const int p = cfg.p;
    const ARFit fit = lad ? fit_ar_quantile(series, p, 0.5) : fit_ar_ls(series, p);
    const auto dist = residual_dist(fit, ResidualKind::RescaledCentered);
    const auto history = series.last(static_cast<std::size_t>(p));
    const int K = cfg.max_horizon;
    BootstrapDraws out = make_draws(cfg, false);
    out.point = predict_recursive(history, fit.coefs, K);
    for (int b = 0; b < cfg.replications(); ++b) {
        Streams s(rng, b);
        const auto star_series =
            forward_regeneration(series, p, fit.coefs.coefs, dist, cfg.zero_innovations, s.regeneration);
        const ARFit star = lad ? fit_ar_quantile(star_series, p, 0.5) : fit_ar_ls(star_series, p);
        const auto e = draw_innovations(dist, K, cfg.zero_innovations, s.innovations);
        const auto path = simulate_forward(history, star.coefs, e);
        for (int k = 0; k < K; ++k) out.values[static_cast<std::size_t>(k)][static_cast<std::size_t>(b)] = path[static_cast<std::size_t>(k)];
    }
    return out;
}

BootstrapDraws pan_politis(std::span<const double> series, const MethodConfig& cfg, const RngStream& rng) {
    const int p = cfg.p;
    const ARFit fit = fit_ar_ls(series, p);
    EmpiricalResidualDist dist = predictive_residuals_ls(series, p, LooMode::Row);
    const double mean = std::accumulate(dist.atoms.begin(), dist.atoms.end(), 0.0) / static_cast<double>(dist.atoms.size());
    for (double& a : dist.atoms) a -= mean;

    const auto history = series.last(static_cast<std::size_t>(p));
    const int K = cfg.max_horizon;
    BootstrapDraws out = make_draws(cfg, true);
    out.point = predict_recursive(history, fit.coefs, K);
    for (int b = 0; b < cfg.replications(); ++b) {
        Streams s(rng, b);
        const auto star_series =
            forward_regeneration(series, p, fit.coefs.coefs, dist, cfg.zero_innovations, s.regeneration);
        const ARFit star = fit_ar_ls(star_series, p);
        const auto predicted = predict_recursive(history, star.coefs, K);
        const auto e = draw_innovations(dist, K, cfg.zero_innovations, s.innovations);
        const auto future = simulate_forward(history, fit.coefs, e);
        for (int k = 0; k < K; ++k) {
            const auto kk = static_cast<std::size_t>(k);
            out.values[kk][static_cast<std::size_t>(b)] = future[kk] - predicted[kk];
        }
    }
    return out;
}

BootstrapDraws oracle(std::span<const double> series, const MethodConfig& cfg, const RngStream& rng,
                      const FutureSampler* truth) {
    if (truth == nullptr || !*truth) {
        throw Error(ErrorKind::InvalidArgument, "the ORACLE interval needs the true data-generating process");
    }
    const int K = cfg.max_horizon;
    BootstrapDraws out;
    out.method = Method::ORACLE;
    out.values.assign(static_cast<std::size_t>(K), std::vector<double>(static_cast<std::size_t>(cfg.oracle_draws)));
    for (int d = 0; d < cfg.oracle_draws; ++d) {
        RngStream s = rng.substream(StreamTag::Oracle, static_cast<std::uint64_t>(d));
        const auto path = (*truth)(series, K, s);
        for (int k = 0; k < K; ++k) out.values[static_cast<std::size_t>(k)][static_cast<std::size_t>(d)] = path[static_cast<std::size_t>(k)];
    }
    return out;
}

}  // namespace

std::string_view method_tag(Method method) noexcept { return info(method).tag; }
std::string_view method_label(Method method) noexcept { return info(method).label; }

Method parse_method(std::string_view tag) {
    for (const auto& m : kMethods) {
        if (m.tag == tag || m.label == tag) return m.method;
    }
    if (tag == "prr_lad") return Method::PRR_LAD;
    throw Error(ErrorKind::InvalidArgument, "unknown method '" + std::string(tag) + "'");
}

const std::vector<Method>& all_methods() {
    static const std::vector<Method> methods{Method::BJ,      Method::TS,       Method::CB,       Method::PRR,
                                             Method::PRR_LAD, Method::PP,       Method::AR_PERC,  Method::AR_PROOT,
                                             Method::X,       Method::QAR_PERC, Method::QAR_PROOT};
    return methods;
}

bool is_qar_based(Method method) noexcept {
    return method == Method::X || method == Method::QAR_PERC || method == Method::QAR_PROOT;
}

bool is_root_based(Method method) noexcept {
    return method == Method::PP || method == Method::AR_PROOT || method == Method::QAR_PROOT;
}

bool is_deterministic(Method method) noexcept { return method == Method::BJ; }

std::string_view multiplier_law_name(MultiplierLaw law) noexcept {
    switch (law) {
        case MultiplierLaw::Exponential: return "exponential";
        case MultiplierLaw::LogNormal: return "lognormal";
        case MultiplierLaw::Unit: return "unit";
    }
    return "exponential";
}

MultiplierLaw parse_multiplier_law(std::string_view name) {
    if (name == "exponential" || name == "exp") return MultiplierLaw::Exponential;
    if (name == "lognormal") return MultiplierLaw::LogNormal;
    if (name == "unit" || name == "one") return MultiplierLaw::Unit;
    throw Error(ErrorKind::InvalidArgument, "unknown multiplier law '" + std::string(name) + "'");
}

void draw_multipliers(MultiplierLaw law, RngStream& rng, std::span<double> out) {
    switch (law) {
        case MultiplierLaw::Exponential:
            for (double& w : out) w = draw_exponential_mean1(rng);
            return;
        case MultiplierLaw::LogNormal: {
            const double s2 = std::log(2.0);
            const double s = std::sqrt(s2);
            for (double& w : out) w = std::exp(s * draw_standard_normal(rng) - 0.5 * s2);
            return;
        }
        case MultiplierLaw::Unit:
            std::fill(out.begin(), out.end(), 1.0);
            return;
    }
}

int default_replications(Method method) noexcept { return is_qar_based(method) ? 5000 : 1000; }

int MethodConfig::replications() const noexcept { return B > 0 ? B : default_replications(method); }

void MethodConfig::validate() const {
    auto bad = [](const std::string& msg) { throw Error(ErrorKind::InvalidArgument, msg); };
    if (p < 1) bad("lag order p must be positive");
    if (!(tau > 0.0 && tau < 1.0)) bad("tau must lie in (0,1)");
    if (max_horizon < 1) bad("horizon must be positive");
    if (levels.empty()) bad("at least one level is required");
    if (B < 0) bad("B must be non-negative");
    if (oracle_draws < 1) bad("oracle draw count must be positive");
    if (fixed_uniform && !(*fixed_uniform > 0.0 && *fixed_uniform < 1.0)) bad("fixed uniform must lie in (0,1)");
    for (double level : levels) {
        if (!(level > 0.0 && level < 1.0)) bad("level must lie in (0,1)");
        const auto needed = static_cast<int>(std::ceil(2.0 / (1.0 - level) - 1e-9));
        const int count = method == Method::ORACLE ? oracle_draws : replications();
        if (!is_deterministic(method) && count < needed) {
            bad("B=" + std::to_string(count) + " is too small for level " + std::to_string(level) +
                " (need at least " + std::to_string(needed) + ")");
        }
    }
}

BootstrapDraws bootstrap_draws(std::span<const double> series, const MethodConfig& cfg, const RngStream& rng,
                               const FutureSampler* truth) {
    cfg.validate();
    switch (cfg.method) {
        case Method::AR_PERC: return ar_perc(series, cfg, rng);
        case Method::AR_PROOT: return ar_proot(series, cfg, rng);
        case Method::QAR_PERC: return qar_percentile(series, cfg, rng, true);
        case Method::X: return qar_percentile(series, cfg, rng, false);
        case Method::QAR_PROOT: return qar_proot(series, cfg, rng);
        case Method::TS: return thombs_schucany(series, cfg, rng);
        case Method::CB: return cao(series, cfg, rng);
        case Method::PRR: return pascual_romo_ruiz(series, cfg, rng, false);
        case Method::PRR_LAD: return pascual_romo_ruiz(series, cfg, rng, true);
        case Method::PP: return pan_politis(series, cfg, rng);
        case Method::ORACLE: return oracle(series, cfg, rng, truth);
        case Method::BJ: break;
    }
    BootstrapDraws none;
    none.method = cfg.method;
    return none;
}

std::vector<PredictionInterval> intervals_from_draws(const BootstrapDraws& draws, const MethodConfig& cfg) {
    std::vector<PredictionInterval> out;
    out.reserve(draws.values.size() * cfg.levels.size());
    for (std::size_t k = 0; k < draws.values.size(); ++k) {
        std::vector<double> sorted = draws.values[k];
        std::sort(sorted.begin(), sorted.end());
        for (double level : cfg.levels) {
            const double alpha = 1.0 - level;
            PredictionInterval pi;
            pi.horizon = static_cast<int>(k) + 1;
            pi.level = level;
            pi.method = draws.method;
            const double lo = sorted_quantile(sorted, alpha / 2.0);
            const double hi = sorted_quantile(sorted, 1.0 - alpha / 2.0);
            if (!draws.point.empty()) pi.point = draws.point[k];
            if (draws.root_based) {
                pi.lower = draws.point[k] + lo;
                pi.upper = draws.point[k] + hi;
            } else {
                pi.lower = lo;
                pi.upper = hi;
            }
            out.push_back(pi);
        }
    }
    return out;
}

std::vector<PredictionInterval> bj_intervals(std::span<const double> series, const MethodConfig& cfg) {
    cfg.validate();
    const ARFit fit = fit_ar_ls(series, cfg.p);
    const auto rows = static_cast<double>(fit.residuals.size());
    const double dof = cfg.bj_dof_correction ? rows - (cfg.p + 1.0) : rows;
    if (dof <= 0.0) throw Error(ErrorKind::InsufficientDoF, "no residual degrees of freedom left");
    double rss = 0.0;
    for (double r : fit.residuals) rss += r * r;
    const double sigma = std::sqrt(rss / dof);

    const int K = cfg.max_horizon;
    const auto point = predict_recursive(series.last(static_cast<std::size_t>(cfg.p)), fit.coefs, K);
    const auto psi = ma_weights(fit.coefs.coefs, K);
    std::vector<PredictionInterval> out;
    double cum = 0.0;
    for (int k = 1; k <= K; ++k) {
        cum += psi[static_cast<std::size_t>(k - 1)] * psi[static_cast<std::size_t>(k - 1)];
        for (double level : cfg.levels) {
            const double z = inverse_cdf(InnovationLaw::normal(), 0.5 + level / 2.0);
            const double half = z * sigma * std::sqrt(cum);
            PredictionInterval pi;
            pi.horizon = k;
            pi.level = level;
            pi.method = Method::BJ;
            pi.point = point[static_cast<std::size_t>(k - 1)];
            pi.lower = *pi.point - half;
            pi.upper = *pi.point + half;
            out.push_back(pi);
        }
    }
    return out;
}

std::vector<PredictionInterval> prediction_intervals(std::span<const double> series, const MethodConfig& cfg,
                                                     const RngStream& rng, const FutureSampler* truth) {
    if (cfg.method == Method::BJ) return bj_intervals(series, cfg);
    return intervals_from_draws(bootstrap_draws(series, cfg, rng, truth), cfg);
}

std::vector<PredictionInterval> prediction_intervals(const TimeSeries& series, const MethodConfig& cfg,
                                                     const RngStream& rng, const FutureSampler* truth) {
    return prediction_intervals(series.values(), cfg, rng, truth);
}

const PredictionInterval& find_interval(const std::vector<PredictionInterval>& intervals, int horizon,
                                        double level) {
    for (const auto& pi : intervals) {
        if (pi.horizon == horizon && std::abs(pi.level - level) < 1e-12) return pi;
    }
    throw Error(ErrorKind::InvalidArgument, "no interval for the requested horizon and level");
}

}  // namespace qarcast
