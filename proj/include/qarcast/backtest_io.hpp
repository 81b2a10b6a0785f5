#pragma once

#include "qarcast/interval_methods.hpp"
#include "qarcast/timeseries.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace qarcast {

/// Reads a two-column (label, value) CSV with a header row. Labels must be
/// strictly increasing: numerically when both parse as numbers, otherwise as
/// strings (which orders ISO dates correctly).
/// Errors: EmptyFile, ParseError (with the 1-based file line), NonMonotoneLabels.
[[nodiscard]] TimeSeries load_series_csv(const std::string& path);
[[nodiscard]] TimeSeries parse_series_csv(std::istream& in);

struct BacktestConfig {
    int window = 50;
    int p = 1;
    std::vector<int> horizons{1, 2, 3, 4};
    /// p and levels of each entry are overwritten from the backtest settings.
    std::vector<MethodConfig> methods;
    double level = 0.95;
    std::uint64_t seed = 1;
    /// Score every horizon on the same origins (len - R - max_k + 1 windows)
    /// instead of len - R - k + 1 windows per horizon.
    bool common_origins = false;

    [[nodiscard]] int max_horizon() const;
    /// InvalidArgument on bad knobs; SeriesTooShort unless length > R + max_k.
    void validate(std::size_t length) const;
};

struct BacktestMethodResult {
    Method method = Method::AR_PERC;
    std::vector<int> windows;       ///< per horizon
    std::vector<int> covered;       ///< per horizon
    std::vector<double> coverage;   ///< per horizon, percent
    std::vector<double> mean_length;
    double d_bar = 0.0;             ///< mean |coverage - 100 level| over horizons, percent
    int failures = 0;               ///< windows where the method raised; scored as not covered
};

struct BacktestReport {
    BacktestConfig config;
    std::size_t series_length = 0;
    std::vector<BacktestMethodResult> results;

    [[nodiscard]] const BacktestMethodResult& result(Method method) const;
};

/// Rolling-window pseudo-out-of-sample evaluation. Window i (1-based) trains
/// on Y_i..Y_{i+R-1} and scores Y_{i+R-1+k} by strict containment; a
/// zero-width interval covers only a value equal to its endpoint. A constant
/// training window yields the interval [c, c] for every method. Window i of a
/// method draws from the stream (seed, method, i), so results do not depend
/// on the worker count.
[[nodiscard]] BacktestReport rwpoos(const TimeSeries& series, const BacktestConfig& cfg, int workers = 1);

/// One row per method: method, beta_1..beta_K, D_bar, len_1..len_K (6 significant digits).
void write_backtest_csv(std::ostream& out, const BacktestReport& report);
void write_backtest_json(std::ostream& out, const BacktestReport& report);
/// Fixed-width table for terminals.
void write_backtest_table(std::ostream& out, const BacktestReport& report);

}  // namespace qarcast
