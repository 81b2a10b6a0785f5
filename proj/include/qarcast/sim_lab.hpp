#pragma once

#include "qarcast/distributions.hpp"
#include "qarcast/interval_methods.hpp"
#include "qarcast/rng.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace qarcast {

enum class ModelKind { M1, M2, M3, M4 };

/// How "F_a(U_t)" inside the QAR coefficient functions is read. Uniform uses
/// U_t itself (phi_1(u) = min(gamma0 + gamma1 u, 1)); LiteralCdf evaluates the
/// innovation CDF at U_t.
enum class CoefReading { Uniform, LiteralCdf };

struct DgpSpec {
    ModelKind model = ModelKind::M1;
    double phi1 = 0.6;
    /// Autoregressive order of Model 2.
    int m2_order = 2;
    double gamma0 = 0.25;
    double gamma1 = 0.85;
    InnovationLaw law = InnovationLaw::normal();
    int burn_in = 300;
    /// Subtract the law's median from additive innovations (Models 1 and 2).
    bool median_center = false;
    CoefReading reading = CoefReading::Uniform;

    /// Lag order of the true process.
    [[nodiscard]] int order() const noexcept;
    void validate() const;
    [[nodiscard]] std::string describe() const;
};

[[nodiscard]] std::string model_name(ModelKind model);
[[nodiscard]] ModelKind parse_model(const std::string& name);

/// Coefficient phi_1(u) of Model 3 (or phi_2(u) of Model 4) under the chosen reading.
[[nodiscard]] double qar_slope(const DgpSpec& spec, double u);

/// Next value of the process given the path so far (at least order() values).
[[nodiscard]] double dgp_step(const DgpSpec& spec, std::span<const double> path, RngStream& rng);

/// burn_in + n values from zero initial conditions; the last n are returned.
[[nodiscard]] std::vector<double> simulate_dgp(const DgpSpec& spec, int n, RngStream& rng);

/// As simulate_dgp, also recording the random coefficient phi_1(U_t) (Model 3)
/// or phi_2(U_t) (Model 4) of each returned step; NaN for Models 1 and 2.
[[nodiscard]] std::vector<double> simulate_dgp_traced(const DgpSpec& spec, int n, RngStream& rng,
                                                      std::vector<double>& slopes);

/// One continuation of the given length conditioned on the last order() values of history.
[[nodiscard]] std::vector<double> simulate_path(const DgpSpec& spec, std::span<const double> history, int steps,
                                                RngStream& rng);

/// F independent continuations; returns the k-th value of each.
[[nodiscard]] std::vector<double> draw_true_futures(const DgpSpec& spec, std::span<const double> history, int k,
                                                    int F, const RngStream& rng);

/// futures[k-1][f] for k = 1..K from F continuation paths.
[[nodiscard]] std::vector<std::vector<double>> draw_future_paths(const DgpSpec& spec,
                                                                 std::span<const double> history, int K, int F,
                                                                 const RngStream& rng);

[[nodiscard]] FutureSampler make_future_sampler(const DgpSpec& spec);

struct CoverageScore {
    double beta = 0.0;   ///< fraction strictly inside (L, U)
    double above = 0.0;  ///< fraction strictly above U
    double below = 0.0;  ///< fraction strictly below L
};

[[nodiscard]] CoverageScore conditional_coverage(const PredictionInterval& interval, std::span<const double> futures);
[[nodiscard]] CoverageScore conditional_coverage(double lower, double upper, std::span<const double> futures);

struct CellStats {
    int S = 0;
    double beta_bar = 0.0;
    double se = 0.0;
    double mse = 0.0;
    double a_bar = 0.0;
    double b_bar = 0.0;
    double len_bar = 0.0;
    double len_se = 0.0;
    double gamma_hat = 0.0;
    double median_beta = 0.0;
};

/// Summary statistics over replications. Throws InvalidArgument unless
/// all inputs have the same length S >= 2.
[[nodiscard]] CellStats aggregate(std::span<const double> beta_s, std::span<const double> above_s,
                                  std::span<const double> below_s, std::span<const double> lengths, double level);

enum class Profile { Desk, Paper };

struct ProfileDefaults {
    int S;
    int F;
    int B_ar;
    int B_qar;
};

[[nodiscard]] ProfileDefaults profile_defaults(Profile profile) noexcept;
[[nodiscard]] Profile parse_profile(const std::string& name);
[[nodiscard]] std::string profile_name(Profile profile);
/// QARCAST_PROFILE if set to a valid profile, Desk otherwise.
[[nodiscard]] Profile default_profile();

struct ExperimentConfig {
    DgpSpec dgp;
    int n = 50;
    std::vector<int> horizons{1};
    /// Method settings; p, B and levels are overwritten from the experiment
    /// (p from the model order unless the method sets it explicitly).
    std::vector<MethodConfig> methods;
    int S = 200;
    int F = 500;
    std::vector<double> levels{0.95};
    std::uint64_t seed = 1;
    Profile profile = Profile::Desk;

    [[nodiscard]] int max_horizon() const;
    void validate() const;
};

/// Parses the JSON experiment document. Keys absent from the document take
/// their values from the profile (explicit argument first, then the document's
/// "profile" key, then QARCAST_PROFILE). Throws ConfigError naming the key path.
[[nodiscard]] ExperimentConfig parse_experiment_config(const std::string& json_text,
                                                       std::optional<Profile> profile_override = std::nullopt);
[[nodiscard]] ExperimentConfig load_experiment_config(const std::string& path,
                                                      std::optional<Profile> profile_override = std::nullopt);

struct CellReport {
    Method method = Method::AR_PERC;
    int horizon = 1;
    double level = 0.95;
    CellStats stats;
    std::vector<int> replication;
    std::vector<double> beta_s;
    std::vector<double> above_s;
    std::vector<double> below_s;
    std::vector<double> length_s;
    int failures = 0;
};

struct CoverageReport {
    ExperimentConfig config;
    std::vector<CellReport> cells;

    [[nodiscard]] const CellReport& cell(Method method, int horizon, double level) const;
    [[nodiscard]] int total_failures() const;
};

using ProgressCallback = std::function<void(int done, int total)>;

/// Runs every method on S simulated series. Replication s draws its series,
/// futures and bootstrap streams from substreams keyed by s, so the report is
/// identical for any worker count.
[[nodiscard]] CoverageReport run_experiment(const ExperimentConfig& cfg, int workers = 1,
                                            const ProgressCallback& progress = {});

/// Long format: method,horizon,level,statistic,value (6 significant digits).
void write_report_csv(std::ostream& out, const CoverageReport& report);
/// Full-precision JSON mirror including the resolved configuration.
void write_report_json(std::ostream& out, const CoverageReport& report);
/// One row per replication: method,horizon,level,s,beta_s,above_s,below_s,length.
void write_raw_csv(std::ostream& out, const CoverageReport& report);

}  // namespace qarcast
