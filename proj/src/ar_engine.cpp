#include "qarcast/ar_engine.hpp"

#include "qarcast/error.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace qarcast {

namespace {

std::vector<double> residuals_of(const LaggedDesign& design, std::span<const double> coefs) {
    const Eigen::Map<const Eigen::VectorXd> beta(coefs.data(), static_cast<Eigen::Index>(coefs.size()));
    const Eigen::VectorXd r = design.responses - design.regressors * beta;
    return {r.data(), r.data() + r.size()};
}

/// Rows removed when leaving out the observation that is the response of row i.
std::pair<std::size_t, std::size_t> deleted_rows(std::size_t i, std::size_t rows, int p, LooMode mode) {
    const std::size_t last = mode == LooMode::Full ? std::min(rows - 1, i + static_cast<std::size_t>(p)) : i;
    return {i, last};
}

void check_loo_size(std::size_t rows, int p, LooMode mode) {
    const std::size_t removed = mode == LooMode::Full ? static_cast<std::size_t>(p) + 1 : 1;
    if (rows < removed + static_cast<std::size_t>(p) + 1) {
        throw Error(ErrorKind::InsufficientDoF, "too few design rows for leave-one-out refits");
    }
}

LaggedDesign without_rows(const LaggedDesign& design, std::size_t first, std::size_t last) {
    const auto rows = static_cast<Eigen::Index>(design.rows());
    const auto cut = static_cast<Eigen::Index>(last - first + 1);
    const auto f = static_cast<Eigen::Index>(first);
    LaggedDesign out;
    out.p = design.p;
    out.responses.resize(rows - cut);
    out.regressors.resize(rows - cut, design.regressors.cols());
    out.responses.head(f) = design.responses.head(f);
    out.regressors.topRows(f) = design.regressors.topRows(f);
    const auto tail = rows - f - cut;
    out.responses.tail(tail) = design.responses.tail(tail);
    out.regressors.bottomRows(tail) = design.regressors.bottomRows(tail);
    return out;
}

}  // namespace

std::vector<double> least_squares_coefs(const RowMatrix& x, const Eigen::VectorXd& y) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr;
    qr.setThreshold(1e-10);
    qr.compute(x);
    if (x.rows() < x.cols() || qr.rank() < x.cols()) {
        throw Error(ErrorKind::RankDeficient, "design matrix has rank " + std::to_string(qr.rank()) + " < " +
                                                  std::to_string(x.cols()) + " columns");
    }
    const Eigen::VectorXd beta = qr.solve(y);
    return {beta.data(), beta.data() + beta.size()};
}

ARFit fit_ar_ls(const LaggedDesign& design) {
    ARFit fit;
    fit.p = design.p;
    fit.estimator = Estimator::LeastSquares;
    fit.coefs.coefs = least_squares_coefs(design.regressors, design.responses);
    fit.coefs.tau = std::numeric_limits<double>::quiet_NaN();
    fit.residuals = residuals_of(design, fit.coefs.coefs);
    return fit;
}

ARFit fit_ar_ls(std::span<const double> series, int p) { return fit_ar_ls(build_design(series, p)); }
ARFit fit_ar_ls(const TimeSeries& series, int p) { return fit_ar_ls(series.values(), p); }

ARFit fit_ar_quantile(const LaggedDesign& design, double tau) {
    ARFit fit;
    fit.p = design.p;
    fit.estimator = Estimator::Quantile;
    fit.coefs = solve_qr(design, tau);
    fit.residuals = residuals_of(design, fit.coefs.coefs);
    return fit;
}

ARFit fit_ar_quantile(std::span<const double> series, int p, double tau) {
    return fit_ar_quantile(build_design(series, p), tau);
}
ARFit fit_ar_quantile(const TimeSeries& series, int p, double tau) {
    return fit_ar_quantile(series.values(), p, tau);
}

EmpiricalResidualDist residual_dist(const ARFit& fit, ResidualKind kind) {
    EmpiricalResidualDist dist;
    dist.kind = kind;
    dist.atoms = fit.residuals;
    if (kind == ResidualKind::Ordinary || kind == ResidualKind::Predictive) return dist;

    const auto rows = static_cast<double>(fit.residuals.size());
    const double params = static_cast<double>(fit.p) + 1.0;
    if (rows <= params) throw Error(ErrorKind::InsufficientDoF, "rescaling needs more rows than coefficients");
    const double factor = std::sqrt(rows / (rows - params));
    for (double& a : dist.atoms) a *= factor;
    const double mean = std::accumulate(dist.atoms.begin(), dist.atoms.end(), 0.0) / rows;
    for (double& a : dist.atoms) a -= mean;
    return dist;
}

EmpiricalResidualDist predictive_residuals(std::span<const double> series, int p, double tau, LooMode mode) {
    const LaggedDesign design = build_design(series, p);
    const std::size_t rows = design.rows();
    check_loo_size(rows, p, mode);
    const auto full = QuantileRegression(design).solve(tau);

    EmpiricalResidualDist dist;
    dist.kind = ResidualKind::Predictive;
    dist.atoms.resize(rows);
    for (std::size_t i = 0; i < rows; ++i) {
        const auto [first, last] = deleted_rows(i, rows, p, mode);
        const LaggedDesign reduced = without_rows(design, first, last);

        // Reuse the full-sample vertex when none of its rows were removed.
        std::vector<int> warm;
        const auto cut = static_cast<int>(last - first + 1);
        for (int row : full.basis) {
            if (row >= static_cast<int>(first) && row <= static_cast<int>(last)) {
                warm.clear();
                break;
            }
            warm.push_back(row > static_cast<int>(last) ? row - cut : row);
        }
        const QuantileRegression qr(reduced);
        const auto sol = qr.solve(tau, {}, warm);
        const auto ii = static_cast<Eigen::Index>(i);
        const Eigen::Map<const Eigen::VectorXd> beta(sol.coefs.coefs.data(), design.regressors.cols());
        dist.atoms[i] = design.responses(ii) - design.regressors.row(ii).dot(beta);
    }
    return dist;
}

EmpiricalResidualDist predictive_residuals(const TimeSeries& series, int p, double tau, LooMode mode) {
    return predictive_residuals(series.values(), p, tau, mode);
}

EmpiricalResidualDist predictive_residuals_ls(std::span<const double> series, int p, LooMode mode) {
    const LaggedDesign design = build_design(series, p);
    const std::size_t rows = design.rows();
    check_loo_size(rows, p, mode);
    EmpiricalResidualDist dist;
    dist.kind = ResidualKind::Predictive;
    dist.atoms.resize(rows);
    for (std::size_t i = 0; i < rows; ++i) {
        const auto [first, last] = deleted_rows(i, rows, p, mode);
        const LaggedDesign reduced = without_rows(design, first, last);
        const auto beta = least_squares_coefs(reduced.regressors, reduced.responses);
        const auto ii = static_cast<Eigen::Index>(i);
        const Eigen::Map<const Eigen::VectorXd> b(beta.data(), design.regressors.cols());
        dist.atoms[i] = design.responses(ii) - design.regressors.row(ii).dot(b);
    }
    return dist;
}

std::vector<double> simulate_forward(std::span<const double> history, std::span<const double> coefs,
                                     std::span<const double> innovations) {
    const std::size_t p = coefs.size() - 1;
    if (history.size() != p) throw Error(ErrorKind::InvalidArgument, "history length must equal p");
    std::vector<double> path(history.begin(), history.end());
    path.reserve(p + innovations.size());
    for (double e : innovations) {
        double next = coefs[0];
        const std::size_t now = path.size();
        for (std::size_t j = 1; j <= p; ++j) next += coefs[j] * path[now - j];
        path.push_back(next + e);
    }
    return {path.begin() + static_cast<std::ptrdiff_t>(p), path.end()};
}

std::vector<double> simulate_forward(std::span<const double> history, const CoefVector& coefs,
                                     std::span<const double> innovations) {
    return simulate_forward(history, coefs.coefs, innovations);
}

std::vector<double> predict_recursive(std::span<const double> history, std::span<const double> coefs, int k) {
    const std::vector<double> zeros(static_cast<std::size_t>(std::max(k, 0)), 0.0);
    return simulate_forward(history, coefs, zeros);
}

std::vector<double> predict_recursive(std::span<const double> history, const CoefVector& coefs, int k) {
    return predict_recursive(history, coefs.coefs, k);
}

std::vector<double> ma_weights(std::span<const double> coefs, int count) {
    const auto p = static_cast<int>(coefs.size()) - 1;
    std::vector<double> psi(static_cast<std::size_t>(std::max(count, 0)), 0.0);
    for (int j = 0; j < count; ++j) {
        if (j == 0) {
            psi[0] = 1.0;
            continue;
        }
        double v = 0.0;
        for (int i = 1; i <= std::min(j, p); ++i) {
            v += coefs[static_cast<std::size_t>(i)] * psi[static_cast<std::size_t>(j - i)];
        }
        psi[static_cast<std::size_t>(j)] = v;
    }
    return psi;
}

QuantileFitter::QuantileFitter(const LaggedDesign& design, int grid_size)
    : qr_(std::make_shared<const QuantileRegression>(design)) {
    grid_bases_.reserve(static_cast<std::size_t>(grid_size));
    std::vector<int> previous;
    for (int g = 0; g < grid_size; ++g) {
        const double tau = (g + 0.5) / grid_size;
        auto sol = qr_->solve(tau, {}, previous);
        previous = sol.basis;
        grid_bases_.push_back(std::move(sol.basis));
    }
}

QrSolution QuantileFitter::solve(double tau, std::span<const double> weights) const {
    std::span<const int> warm;
    if (!grid_bases_.empty() && tau > 0.0 && tau < 1.0) {
        const auto g = std::min(grid_bases_.size() - 1,
                                static_cast<std::size_t>(tau * static_cast<double>(grid_bases_.size())));
        warm = grid_bases_[g];
    }
    return qr_->solve(tau, weights, warm);
}

std::vector<double> QuantileFitter::fit(double tau, std::span<const double> weights) const {
    return solve(tau, weights).coefs.coefs;
}

}  // namespace qarcast
