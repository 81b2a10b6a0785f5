#include "qarcast/timeseries.hpp"

#include "qarcast/error.hpp"

#include <algorithm>
#include <cmath>

namespace qarcast {

TimeSeries::TimeSeries(std::vector<double> values, std::vector<std::string> labels)
    : values_(std::move(values)), labels_(std::move(labels)) {
    if (values_.empty()) throw Error(ErrorKind::EmptyInput, "time series has no observations");
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i])) {
            throw Error(ErrorKind::NonFinite, "observation " + std::to_string(i + 1) + " is not finite");
        }
    }
    if (!labels_.empty() && labels_.size() != values_.size()) {
        throw Error(ErrorKind::InvalidArgument, "label count does not match value count");
    }
}

std::span<const double> TimeSeries::tail(std::size_t p) const {
    if (p > values_.size()) throw Error(ErrorKind::SeriesTooShort, "tail longer than series");
    return std::span<const double>(values_).subspan(values_.size() - p);
}

TimeSeries TimeSeries::slice(std::size_t first, std::size_t count) const {
    if (first + count > values_.size() || count == 0) {
        throw Error(ErrorKind::SeriesTooShort, "slice outside series");
    }
    std::vector<double> v(values_.begin() + static_cast<std::ptrdiff_t>(first),
                          values_.begin() + static_cast<std::ptrdiff_t>(first + count));
    std::vector<std::string> l;
    if (!labels_.empty()) {
        l.assign(labels_.begin() + static_cast<std::ptrdiff_t>(first),
                 labels_.begin() + static_cast<std::ptrdiff_t>(first + count));
    }
    return TimeSeries(std::move(v), std::move(l));
}

LaggedDesign build_design(std::span<const double> values, int p) {
    if (p < 1) throw Error(ErrorKind::InvalidArgument, "lag order must be positive");
    const auto n = static_cast<long>(values.size());
    for (double v : values) {
        if (!std::isfinite(v)) throw Error(ErrorKind::NonFinite, "series contains a non-finite value");
    }
    if (n - p < p + 2) {
        throw Error(ErrorKind::SeriesTooShort, "need n - p >= p + 2 (n=" + std::to_string(n) +
                                                   ", p=" + std::to_string(p) + ")");
    }
    const long rows = n - p;
    LaggedDesign design;
    design.p = p;
    design.responses.resize(rows);
    design.regressors.resize(rows, p + 1);
    for (long i = 0; i < rows; ++i) {
        design.responses(i) = values[static_cast<std::size_t>(p + i)];
        design.regressors(i, 0) = 1.0;
        for (int j = 1; j <= p; ++j) {
            design.regressors(i, j) = values[static_cast<std::size_t>(p + i - j)];
        }
    }
    return design;
}

LaggedDesign build_design(const TimeSeries& series, int p) { return build_design(series.values(), p); }

std::size_t quantile_rank(std::size_t m, double alpha) {
    const double scaled = alpha * static_cast<double>(m);
    auto rank = static_cast<long long>(std::ceil(scaled - 1e-9 * std::max(1.0, scaled)));
    rank = std::clamp<long long>(rank, 1, static_cast<long long>(m));
    return static_cast<std::size_t>(rank);
}

double empirical_quantile(std::span<const double> samples, double alpha) {
    if (samples.empty()) throw Error(ErrorKind::EmptyInput, "empirical quantile of an empty sample");
    std::vector<double> copy(samples.begin(), samples.end());
    const std::size_t r = quantile_rank(copy.size(), alpha) - 1;
    std::nth_element(copy.begin(), copy.begin() + static_cast<std::ptrdiff_t>(r), copy.end());
    return copy[r];
}

double sorted_quantile(std::span<const double> sorted, double alpha) {
    if (sorted.empty()) throw Error(ErrorKind::EmptyInput, "empirical quantile of an empty sample");
    return sorted[quantile_rank(sorted.size(), alpha) - 1];
}

}  // namespace qarcast
