#pragma once

#include "qarcast/quantile_solver.hpp"
#include "qarcast/rng.hpp"
#include "qarcast/timeseries.hpp"

#include <memory>
#include <span>
#include <vector>

namespace qarcast {

enum class Estimator { LeastSquares, Quantile };

struct ARFit {
    CoefVector coefs;
    /// responses[i] - <coefs, regressors[i]>, one per design row.
    std::vector<double> residuals;
    Estimator estimator = Estimator::LeastSquares;
    int p = 0;
};

enum class ResidualKind { Ordinary, RescaledCentered, Predictive };

struct EmpiricalResidualDist {
    std::vector<double> atoms;
    ResidualKind kind = ResidualKind::Ordinary;

    /// One atom chosen uniformly at random.
    [[nodiscard]] double draw(RngStream& rng) const { return atoms[rng.index(atoms.size())]; }
};

/// Leave-one-out variant for predictive residuals: Full drops every row that
/// contains Y_t (as response or lag), Row drops only the row with response Y_t.
enum class LooMode { Full, Row };

[[nodiscard]] ARFit fit_ar_ls(const LaggedDesign& design);
[[nodiscard]] ARFit fit_ar_ls(std::span<const double> series, int p);
[[nodiscard]] ARFit fit_ar_ls(const TimeSeries& series, int p);

[[nodiscard]] ARFit fit_ar_quantile(const LaggedDesign& design, double tau);
[[nodiscard]] ARFit fit_ar_quantile(std::span<const double> series, int p, double tau);
[[nodiscard]] ARFit fit_ar_quantile(const TimeSeries& series, int p, double tau);

/// Least-squares coefficients; throws RankDeficient on collinear designs.
[[nodiscard]] std::vector<double> least_squares_coefs(const RowMatrix& x, const Eigen::VectorXd& y);

/// Ordinary keeps the raw residuals. RescaledCentered multiplies them by
/// sqrt(N / (N - (p+1))), N the number of design rows, then subtracts the mean.
/// Throws InsufficientDoF when N <= p+1.
[[nodiscard]] EmpiricalResidualDist residual_dist(const ARFit& fit, ResidualKind kind);

/// Quantile-fit predictive residuals Y_t - Z_t' phi_hat^{(-t)}(tau), t = p+1..n.
[[nodiscard]] EmpiricalResidualDist predictive_residuals(std::span<const double> series, int p, double tau,
                                                         LooMode mode = LooMode::Full);
[[nodiscard]] EmpiricalResidualDist predictive_residuals(const TimeSeries& series, int p, double tau,
                                                         LooMode mode = LooMode::Full);

/// Same construction with least-squares refits.
[[nodiscard]] EmpiricalResidualDist predictive_residuals_ls(std::span<const double> series, int p,
                                                            LooMode mode = LooMode::Full);

/// history holds the last p values, oldest first. Returns Y_hat_{n+1..n+k}.
[[nodiscard]] std::vector<double> predict_recursive(std::span<const double> history,
                                                    std::span<const double> coefs, int k);
[[nodiscard]] std::vector<double> predict_recursive(std::span<const double> history, const CoefVector& coefs,
                                                    int k);

/// Same recursion with innovations[j] added at step j.
[[nodiscard]] std::vector<double> simulate_forward(std::span<const double> history,
                                                   std::span<const double> coefs,
                                                   std::span<const double> innovations);
[[nodiscard]] std::vector<double> simulate_forward(std::span<const double> history, const CoefVector& coefs,
                                                   std::span<const double> innovations);

/// MA(infinity) weights psi_0..psi_{count-1} of the AR polynomial given by
/// coefs (intercept first, ignored).
[[nodiscard]] std::vector<double> ma_weights(std::span<const double> coefs, int count);

/// Quantile fits on one design at many orders and weight vectors.
///
/// Keeps unweighted vertex solutions on a grid of quantile orders and uses the
/// nearest one as the starting basis of every solve. The grid only speeds up
/// convergence; results equal cold-started solves up to ties in the optimum.
class QuantileFitter {
public:
    explicit QuantileFitter(const LaggedDesign& design, int grid_size = 20);

    [[nodiscard]] const QuantileRegression& regression() const noexcept { return *qr_; }
    [[nodiscard]] std::vector<double> fit(double tau, std::span<const double> weights = {}) const;
    [[nodiscard]] QrSolution solve(double tau, std::span<const double> weights = {}) const;

private:
    std::shared_ptr<const QuantileRegression> qr_;
    std::vector<std::vector<int>> grid_bases_;
};

}  // namespace qarcast
