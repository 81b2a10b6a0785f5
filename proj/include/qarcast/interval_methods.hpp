#pragma once

#include "qarcast/ar_engine.hpp"
#include "qarcast/rng.hpp"
#include "qarcast/timeseries.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qarcast {

enum class Method { BJ, TS, CB, PRR, PRR_LAD, PP, AR_PERC, AR_PROOT, X, QAR_PERC, QAR_PROOT, ORACLE };

/// Kebab-case tag: "bj", "prr-lad", "qar-proot", ...
[[nodiscard]] std::string_view method_tag(Method method) noexcept;
/// Display name as used in result tables: "BJ", "PRR-LAD", "QAR-proot", ...
[[nodiscard]] std::string_view method_label(Method method) noexcept;
/// Throws InvalidArgument on an unknown tag.
[[nodiscard]] Method parse_method(std::string_view tag);
/// The eleven interval procedures (everything except ORACLE), in table order.
[[nodiscard]] const std::vector<Method>& all_methods();

[[nodiscard]] bool is_qar_based(Method method) noexcept;
[[nodiscard]] bool is_root_based(Method method) noexcept;
[[nodiscard]] bool is_deterministic(Method method) noexcept;

/// Law of the bootstrap multipliers w_t. Exponential(1) is the default;
/// LogNormal uses sigma^2 = ln 2 so that E(w) = 1 and E(w^2) = 2.
/// Unit sets every multiplier to 1 and exists for reduction checks.
enum class MultiplierLaw { Exponential, LogNormal, Unit };

[[nodiscard]] std::string_view multiplier_law_name(MultiplierLaw law) noexcept;
[[nodiscard]] MultiplierLaw parse_multiplier_law(std::string_view name);

void draw_multipliers(MultiplierLaw law, RngStream& rng, std::span<double> out);

struct MethodConfig {
    Method method = Method::AR_PERC;
    int p = 1;
    /// Quantile order of the AR-perc/AR-proot fit, tau0 for QAR-proot.
    double tau = 0.5;
    /// Bootstrap replications; 0 selects the default (1000 AR-based, 5000 QAR-based).
    int B = 0;
    /// Nominal levels; every level is served by the same bootstrap sample.
    std::vector<double> levels{0.95};
    /// Intervals are produced for horizons 1..max_horizon.
    int max_horizon = 1;
    MultiplierLaw multipliers = MultiplierLaw::Exponential;
    LooMode loo = LooMode::Full;
    /// Number of simulated paths behind an ORACLE interval.
    int oracle_draws = 10000;
    /// BJ innovation variance: RSS / (n - p) by default, RSS / (n - 2p - 1) when set.
    bool bj_dof_correction = false;

    /// Test hooks: force every bootstrap error to 0, or every U* to a constant.
    bool zero_innovations = false;
    std::optional<double> fixed_uniform;

    [[nodiscard]] int replications() const noexcept;
    /// Throws InvalidArgument when a knob is out of range, including
    /// B < ceil(2 / (1 - level)) for any level.
    void validate() const;
};

[[nodiscard]] int default_replications(Method method) noexcept;

struct PredictionInterval {
    double lower = 0.0;
    double upper = 0.0;
    int horizon = 1;
    double level = 0.95;
    Method method = Method::AR_PERC;
    std::optional<double> point;
};

/// Raw bootstrap output of one method run.
struct BootstrapDraws {
    Method method = Method::AR_PERC;
    bool root_based = false;
    /// values[k-1][b]: terminal value Y*_{n+k} (percentile methods) or root
    /// Y*_{n+k} - Yhat*_{n+k} (root methods) of replication b.
    std::vector<std::vector<double>> values;
    /// Point predictions Yhat_{n+1..n+K}; anchors for root intervals.
    std::vector<double> point;
    /// One-step root decomposition for AR-proot and QAR-proot:
    /// estimation part A* and innovation part a*, with A* + a* = root.
    std::vector<double> estimation_part;
    std::vector<double> innovation_part;
};

/// Samples the true process forward: given the last observed values (oldest
/// first), returns one path of the requested length.
using FutureSampler = std::function<std::vector<double>(std::span<const double> history, int steps, RngStream& rng)>;

/// Runs the bootstrap (or simulation) part of a method. BJ produces no draws.
[[nodiscard]] BootstrapDraws bootstrap_draws(std::span<const double> series, const MethodConfig& cfg,
                                             const RngStream& rng, const FutureSampler* truth = nullptr);

/// Equal-tailed intervals for every horizon and level, horizon-major.
[[nodiscard]] std::vector<PredictionInterval> intervals_from_draws(const BootstrapDraws& draws,
                                                                   const MethodConfig& cfg);

/// Convenience: bootstrap_draws + intervals_from_draws (BJ in closed form).
[[nodiscard]] std::vector<PredictionInterval> prediction_intervals(std::span<const double> series,
                                                                   const MethodConfig& cfg, const RngStream& rng,
                                                                   const FutureSampler* truth = nullptr);
[[nodiscard]] std::vector<PredictionInterval> prediction_intervals(const TimeSeries& series,
                                                                   const MethodConfig& cfg, const RngStream& rng,
                                                                   const FutureSampler* truth = nullptr);

/// Gaussian-theory interval around the least-squares recursion.
[[nodiscard]] std::vector<PredictionInterval> bj_intervals(std::span<const double> series, const MethodConfig& cfg);

/// Picks the interval for (horizon, level) out of a horizon-major list.
[[nodiscard]] const PredictionInterval& find_interval(const std::vector<PredictionInterval>& intervals,
                                                      int horizon, double level);

}  // namespace qarcast
