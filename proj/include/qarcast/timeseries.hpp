#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace qarcast {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Observed series Y_1..Y_n with optional time labels.
///
/// Construction validates that every value is finite and, when labels are
/// given, that there is one per value.
class TimeSeries {
public:
    explicit TimeSeries(std::vector<double> values, std::vector<std::string> labels = {});

    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
    [[nodiscard]] const std::vector<std::string>& labels() const noexcept { return labels_; }
    [[nodiscard]] bool has_labels() const noexcept { return !labels_.empty(); }
    [[nodiscard]] double operator[](std::size_t i) const noexcept { return values_[i]; }

    /// Last p values, oldest first.
    [[nodiscard]] std::span<const double> tail(std::size_t p) const;
    /// Contiguous sub-series [first, first + count).
    [[nodiscard]] TimeSeries slice(std::size_t first, std::size_t count) const;

private:
    std::vector<double> values_;
    std::vector<std::string> labels_;
};

/// Responses Y_t (t = p+1..n) and regressor rows Z_t = (1, Y_{t-1}, ..., Y_{t-p}).
struct LaggedDesign {
    Eigen::VectorXd responses;
    RowMatrix regressors;
    int p = 0;

    [[nodiscard]] std::size_t rows() const noexcept { return static_cast<std::size_t>(responses.size()); }
    [[nodiscard]] std::size_t cols() const noexcept { return static_cast<std::size_t>(regressors.cols()); }
};

/// Throws SeriesTooShort when n - p < p + 2 and NonFinite on bad values.
[[nodiscard]] LaggedDesign build_design(std::span<const double> values, int p);
[[nodiscard]] LaggedDesign build_design(const TimeSeries& series, int p);

/// 1-based rank ceil(alpha * m) of the left-continuous empirical inverse CDF,
/// clamped to [1, m]. A relative guard of 1e-9 absorbs round-up in alpha * m.
[[nodiscard]] std::size_t quantile_rank(std::size_t m, double alpha);

/// Empirical alpha-quantile (left-continuous inverse CDF).
/// Throws EmptyInput on an empty sample.
[[nodiscard]] double empirical_quantile(std::span<const double> samples, double alpha);

/// Same convention on an already sorted sample (no copy).
[[nodiscard]] double sorted_quantile(std::span<const double> sorted, double alpha);

}  // namespace qarcast
