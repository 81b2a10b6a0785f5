#pragma once

#include "qarcast/timeseries.hpp"

#include <Eigen/Core>
#include <Eigen/QR>

#include <span>
#include <vector>

namespace qarcast {

/// rho_tau(u) = u * (tau - 1{u < 0}).
[[nodiscard]] double check_loss(double u, double tau) noexcept;

/// Coefficients (phi_0, ..., phi_p) of a fit targeting quantile order tau.
/// tau is NaN for least-squares fits.
struct CoefVector {
    std::vector<double> coefs;
    double tau = 0.0;

    [[nodiscard]] std::size_t size() const noexcept { return coefs.size(); }
    [[nodiscard]] double operator[](std::size_t i) const noexcept { return coefs[i]; }
};

/// Weighted check-loss minimisation problem. Empty weights mean unit weights.
struct CheckLossProblem {
    Eigen::VectorXd responses;
    RowMatrix regressors;
    double tau = 0.5;
    std::vector<double> weights;

    [[nodiscard]] static CheckLossProblem from_design(const LaggedDesign& design, double tau,
                                                      std::vector<double> weights = {});
};

struct QrSolution {
    CoefVector coefs;
    /// Rows interpolated by the vertex (one per coefficient).
    std::vector<int> basis;
    double objective = 0.0;
    int iterations = 0;
};

/// Exact quantile regression on a fixed design.
///
/// The rank of the design is checked once on construction (column-pivoted QR,
/// relative threshold 1e-10) so repeated solves for bootstrap weights or other
/// quantile orders skip it. Each solve walks the vertices of the linear
/// program: the basis is the set of p+1 interpolated rows, the entering
/// direction is the edge with the most negative directional derivative, and
/// the step goes to the minimiser of the piecewise-linear objective along that
/// edge (which may cross several breakpoints at once). Responses are perturbed
/// symbolically, y_i + eps * delta_i with eps infinitesimal, so every vertex is
/// non-degenerate and the walk cannot cycle; the returned vertex is optimal for
/// the unperturbed problem as well.
///
/// solve() is const and safe to call concurrently.
class QuantileRegression {
public:
    QuantileRegression(RowMatrix regressors, Eigen::VectorXd responses);
    explicit QuantileRegression(const LaggedDesign& design);

    [[nodiscard]] std::size_t rows() const noexcept { return static_cast<std::size_t>(y_.size()); }
    [[nodiscard]] std::size_t cols() const noexcept { return static_cast<std::size_t>(x_.cols()); }
    [[nodiscard]] const RowMatrix& regressors() const noexcept { return x_; }
    [[nodiscard]] const Eigen::VectorXd& responses() const noexcept { return y_; }

    /// weights: empty for unit weights, otherwise one positive finite value per row.
    /// warm_basis: optional starting vertex; ignored if it is not a valid basis.
    [[nodiscard]] QrSolution solve(double tau, std::span<const double> weights = {},
                                   std::span<const int> warm_basis = {}) const;

    [[nodiscard]] double objective(double tau, std::span<const double> weights,
                                   std::span<const double> coefs) const;

    /// Least-squares coefficients from the stored factorisation.
    [[nodiscard]] std::vector<double> least_squares() const;

private:
    [[nodiscard]] std::vector<int> default_basis() const;

    RowMatrix x_;
    Eigen::VectorXd y_;
    Eigen::VectorXd perturbation_;
    Eigen::VectorXd row_l1_;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_;
    std::vector<int> cold_basis_;
};

[[nodiscard]] QrSolution solve_weighted_qr_detailed(const CheckLossProblem& problem);
[[nodiscard]] CoefVector solve_weighted_qr(const CheckLossProblem& problem);
[[nodiscard]] CoefVector solve_qr(const LaggedDesign& design, double tau);

/// Sum of w_i * rho_tau(y_i - x_i' coefs). Empty weights mean unit weights.
[[nodiscard]] double check_loss_objective(const RowMatrix& regressors, const Eigen::VectorXd& responses,
                                          double tau, std::span<const double> weights,
                                          std::span<const double> coefs);

}  // namespace qarcast
