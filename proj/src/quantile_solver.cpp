#include "qarcast/quantile_solver.hpp"

#include "qarcast/error.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

namespace qarcast {

namespace {

constexpr double kRankThreshold = 1e-10;
constexpr double kResidualSnap = 1e-11;
constexpr double kRatioTie = 1e-11;

std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

struct Breakpoint {
    double t1;
    double t2;
    double jump;
    int row;
};

struct Workspace {
    std::vector<double> r;
    std::vector<double> s;
    std::vector<signed char> sign;
    std::vector<char> in_basis;
    std::vector<Breakpoint> heap;
    std::vector<Breakpoint> group;

    void reset(std::size_t n) {
        r.resize(n);
        s.resize(n);
        sign.resize(n);
        in_basis.assign(n, 0);
        heap.clear();
        heap.reserve(n);
    }
};

Workspace& workspace() {
    thread_local Workspace ws;
    return ws;
}

bool valid_basis_shape(std::span<const int> basis, std::size_t n, std::size_t m) {
    if (basis.size() != m) return false;
    std::vector<int> sorted(basis.begin(), basis.end());
    std::sort(sorted.begin(), sorted.end());
    if (sorted.front() < 0 || static_cast<std::size_t>(sorted.back()) >= n) return false;
    return std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end();
}

}  // namespace

double check_loss(double u, double tau) noexcept { return u * (tau - (u < 0.0 ? 1.0 : 0.0)); }

CheckLossProblem CheckLossProblem::from_design(const LaggedDesign& design, double tau,
                                               std::vector<double> weights) {
    CheckLossProblem problem;
    problem.responses = design.responses;
    problem.regressors = design.regressors;
    problem.tau = tau;
    problem.weights = std::move(weights);
    return problem;
}

double check_loss_objective(const RowMatrix& regressors, const Eigen::VectorXd& responses, double tau,
                            std::span<const double> weights, std::span<const double> coefs) {
    const Eigen::Map<const Eigen::VectorXd> beta(coefs.data(), static_cast<Eigen::Index>(coefs.size()));
    const Eigen::VectorXd resid = responses - regressors * beta;
    double total = 0.0;
    for (Eigen::Index i = 0; i < resid.size(); ++i) {
        const double w = weights.empty() ? 1.0 : weights[static_cast<std::size_t>(i)];
        total += w * check_loss(resid(i), tau);
    }
    return total;
}

QuantileRegression::QuantileRegression(const LaggedDesign& design)
    : QuantileRegression(design.regressors, design.responses) {}

QuantileRegression::QuantileRegression(RowMatrix regressors, Eigen::VectorXd responses)
    : x_(std::move(regressors)), y_(std::move(responses)) {
    const auto n = y_.size();
    const auto m = x_.cols();
    if (n == 0 || m == 0) throw Error(ErrorKind::EmptyInput, "empty regression design");
    if (x_.rows() != n) throw Error(ErrorKind::InvalidArgument, "design rows do not match responses");
    if (!x_.allFinite() || !y_.allFinite()) throw Error(ErrorKind::NonFinite, "design contains non-finite values");

    qr_.setThreshold(kRankThreshold);
    qr_.compute(x_);
    if (n < m || qr_.rank() < m) {
        throw Error(ErrorKind::RankDeficient, "design matrix has rank " + std::to_string(qr_.rank()) +
                                                  " < " + std::to_string(m) + " columns");
    }

    perturbation_.resize(n);
    row_l1_.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const std::uint64_t h = mix64(static_cast<std::uint64_t>(i) ^ 0x5851F42D4C957F2DULL);
        const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
        perturbation_(i) = ((h & 1U) ? 1.0 : -1.0) * (1.0 + u);
        row_l1_(i) = x_.row(i).cwiseAbs().sum();
    }
    cold_basis_ = default_basis();
}

std::vector<double> QuantileRegression::least_squares() const {
    const Eigen::VectorXd beta = qr_.solve(y_);
    return {beta.data(), beta.data() + beta.size()};
}

std::vector<int> QuantileRegression::default_basis() const {
    // Rows closest to the least-squares fit, kept only if linearly independent.
    const auto n = y_.size();
    const auto m = x_.cols();
    const Eigen::VectorXd beta = qr_.solve(y_);
    const Eigen::VectorXd resid = (y_ - x_ * beta).cwiseAbs();
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return resid(a) < resid(b); });

    for (double threshold : {1e-6, 1e-10, 1e-14}) {
        std::vector<int> basis;
        Eigen::MatrixXd q(m, m);
        for (int row : order) {
            Eigen::VectorXd v = x_.row(row).transpose();
            const double norm0 = v.norm();
            if (norm0 == 0.0) continue;
            for (std::size_t k = 0; k < basis.size(); ++k) {
                const auto kk = static_cast<Eigen::Index>(k);
                v -= q.col(kk).dot(v) * q.col(kk);
            }
            const double norm = v.norm();
            if (norm > threshold * norm0) {
                q.col(static_cast<Eigen::Index>(basis.size())) = v / norm;
                basis.push_back(row);
                if (static_cast<Eigen::Index>(basis.size()) == m) return basis;
            }
        }
    }
    throw Error(ErrorKind::RankDeficient, "could not find an independent set of rows");
}

double QuantileRegression::objective(double tau, std::span<const double> weights,
                                     std::span<const double> coefs) const {
    return check_loss_objective(x_, y_, tau, weights, coefs);
}

QrSolution QuantileRegression::solve(double tau, std::span<const double> weights,
                                     std::span<const int> warm_basis) const {
    if (!(tau > 0.0 && tau < 1.0)) {
        throw Error(ErrorKind::DomainError, "quantile order must lie in (0,1), got " + std::to_string(tau));
    }
    const auto n = static_cast<std::size_t>(y_.size());
    const auto m = static_cast<std::size_t>(x_.cols());
    const auto mi = static_cast<Eigen::Index>(m);
    if (!weights.empty() && weights.size() != n) {
        throw Error(ErrorKind::InvalidArgument, "weight count does not match design rows");
    }
    double wsum = 0.0;
    for (double w : weights) {
        if (!std::isfinite(w) || w < 0.0) throw Error(ErrorKind::DomainError, "weights must be finite and >= 0");
        wsum += w;
    }
    if (weights.empty()) wsum = static_cast<double>(n);
    if (!(wsum > 0.0)) throw Error(ErrorKind::DomainError, "weights sum to zero");
    auto weight = [&](std::size_t i) { return weights.empty() ? 1.0 : weights[i]; };

    std::vector<int> basis;
    bool warm = valid_basis_shape(warm_basis, n, m);
    if (warm) {
        basis.assign(warm_basis.begin(), warm_basis.end());
    } else {
        basis = cold_basis_;
    }

    Workspace& ws = workspace();
    const double opt_tol = 1e-11 * wsum;
    const int max_iter = static_cast<int>(50 * n + 200);

    Eigen::MatrixXd b(mi, mi);
    Eigen::VectorXd yh(mi);
    Eigen::VectorXd dh(mi);
    Eigen::VectorXd beta(mi);
    Eigen::VectorXd gamma(mi);
    Eigen::VectorXd v(mi);
    Eigen::VectorXd g(mi);
    Eigen::VectorXd dir(mi);

    for (int iter = 0; iter < max_iter; ++iter) {
        for (std::size_t k = 0; k < m; ++k) {
            const auto kk = static_cast<Eigen::Index>(k);
            b.row(kk) = x_.row(basis[k]);
            yh(kk) = y_(basis[k]);
            dh(kk) = perturbation_(basis[k]);
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(b);
        if (!lu.isInvertible()) {
            if (iter == 0 && warm) {
                warm = false;
                basis = cold_basis_;
                --iter;
                continue;
            }
            throw Error(ErrorKind::NoConvergence, "quantile solver reached a singular basis");
        }
        beta = lu.solve(yh);
        gamma = lu.solve(dh);
        const double beta_max = beta.cwiseAbs().maxCoeff();

        ws.reset(n);
        for (int row : basis) ws.in_basis[static_cast<std::size_t>(row)] = 1;
        v.setZero();
        for (std::size_t i = 0; i < n; ++i) {
            if (ws.in_basis[i]) {
                ws.r[i] = 0.0;
                ws.s[i] = 0.0;
                ws.sign[i] = 0;
                continue;
            }
            const auto ii = static_cast<Eigen::Index>(i);
            double r = y_(ii) - x_.row(ii).dot(beta);
            const double s = perturbation_(ii) - x_.row(ii).dot(gamma);
            const double snap = kResidualSnap * (std::abs(y_(ii)) + row_l1_(ii) * beta_max);
            if (std::abs(r) <= snap) r = 0.0;
            ws.r[i] = r;
            ws.s[i] = s;
            const double key = r != 0.0 ? r : s;
            ws.sign[i] = key < 0.0 ? -1 : 1;
            const double psi = ws.sign[i] > 0 ? tau : tau - 1.0;
            v.noalias() += (weight(i) * psi) * x_.row(ii).transpose();
        }
        g = lu.transpose().solve(v);

        double best = -opt_tol;
        int best_j = -1;
        int best_sigma = 0;
        for (std::size_t k = 0; k < m; ++k) {
            const auto kk = static_cast<Eigen::Index>(k);
            const double wh = weight(static_cast<std::size_t>(basis[k]));
            const double up = wh * (1.0 - tau) - g(kk);
            const double down = wh * tau + g(kk);
            if (up < best) {
                best = up;
                best_j = static_cast<int>(k);
                best_sigma = 1;
            }
            if (down < best) {
                best = down;
                best_j = static_cast<int>(k);
                best_sigma = -1;
            }
        }

        if (best_j < 0) {
            QrSolution out;
            out.coefs.coefs.assign(beta.data(), beta.data() + beta.size());
            out.coefs.tau = tau;
            out.basis = basis;
            out.iterations = iter;
            out.objective = check_loss_objective(x_, y_, tau, weights, out.coefs.coefs);
            return out;
        }

        dir = lu.solve(Eigen::VectorXd::Unit(mi, best_j));
        const double dir_max = dir.cwiseAbs().maxCoeff();
        auto cmp = [](const Breakpoint& a, const Breakpoint& c) { return a.t1 > c.t1; };
        for (std::size_t i = 0; i < n; ++i) {
            if (ws.in_basis[i]) continue;
            const auto ii = static_cast<Eigen::Index>(i);
            const double a = best_sigma * x_.row(ii).dot(dir);
            if (std::abs(a) <= 1e-13 * row_l1_(ii) * dir_max) continue;
            if ((a > 0.0) != (ws.sign[i] > 0)) continue;
            ws.heap.push_back({ws.r[i] / a, ws.s[i] / a, weight(i) * std::abs(a), static_cast<int>(i)});
        }
        std::make_heap(ws.heap.begin(), ws.heap.end(), cmp);

        double slope = best;
        int entering = -1;
        while (entering < 0 && !ws.heap.empty()) {
            ws.group.clear();
            std::pop_heap(ws.heap.begin(), ws.heap.end(), cmp);
            ws.group.push_back(ws.heap.back());
            ws.heap.pop_back();
            const double lead = ws.group.front().t1;
            const double tie = kRatioTie * std::abs(lead);
            while (!ws.heap.empty() && ws.heap.front().t1 <= lead + tie) {
                std::pop_heap(ws.heap.begin(), ws.heap.end(), cmp);
                ws.group.push_back(ws.heap.back());
                ws.heap.pop_back();
            }
            std::sort(ws.group.begin(), ws.group.end(), [](const Breakpoint& a, const Breakpoint& c) {
                return a.t2 < c.t2 || (a.t2 == c.t2 && a.row < c.row);
            });
            for (const Breakpoint& bp : ws.group) {
                slope += bp.jump;
                if (slope >= 0.0) {
                    entering = bp.row;
                    break;
                }
            }
        }
        if (entering < 0) throw Error(ErrorKind::NoConvergence, "check-loss objective is unbounded");
        basis[static_cast<std::size_t>(best_j)] = entering;
    }
    throw Error(ErrorKind::NoConvergence, "quantile solver exceeded its iteration limit");
}

QrSolution solve_weighted_qr_detailed(const CheckLossProblem& problem) {
    const QuantileRegression solver(problem.regressors, problem.responses);
    return solver.solve(problem.tau, problem.weights);
}

CoefVector solve_weighted_qr(const CheckLossProblem& problem) {
    return solve_weighted_qr_detailed(problem).coefs;
}

CoefVector solve_qr(const LaggedDesign& design, double tau) {
    return solve_weighted_qr(CheckLossProblem::from_design(design, tau));
}

}  // namespace qarcast
