#include "qarcast/error.hpp"
#include "qarcast/timeseries.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

using namespace qarcast;

TEST_CASE("design from a short series") {
    const auto d = build_design(std::vector<double>{1, 2, 3, 4}, 1);
    REQUIRE(d.rows() == 3);
    CHECK(d.responses(0) == 2);
    CHECK(d.responses(2) == 4);
    CHECK(d.regressors(0, 0) == 1);
    CHECK(d.regressors(0, 1) == 1);
    CHECK(d.regressors(2, 1) == 3);

    const auto d2 = build_design(std::vector<double>{1, 2, 3, 4, 5, 6}, 2);
    REQUIRE(d2.rows() == 4);
    CHECK(d2.responses(0) == 3);
    CHECK(d2.regressors(0, 1) == 2);
    CHECK(d2.regressors(0, 2) == 1);

    CHECK_THROWS_AS(build_design(std::vector<double>{1, 2, 3, 4}, 2), Error);
    try {
        (void)build_design(std::vector<double>{1, 2, 3, 4}, 2);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::SeriesTooShort);
    }
    CHECK_THROWS_AS(build_design(std::vector<double>{1, 2, NAN, 4, 5, 6}, 1), Error);
}

TEST_CASE("design round trip reproduces the series") {
    std::vector<double> y(30);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::sin(0.7 * static_cast<double>(i)) * 3.0 + i;
    for (int p = 1; p <= 4; ++p) {
        const auto d = build_design(y, p);
        for (std::size_t i = 0; i < d.rows(); ++i) {
            CHECK(d.regressors(static_cast<long>(i), 0) == 1.0);
            CHECK(d.responses(static_cast<long>(i)) == y[i + static_cast<std::size_t>(p)]);
            for (int j = 1; j <= p; ++j) {
                CHECK(d.regressors(static_cast<long>(i), j) == y[i + static_cast<std::size_t>(p - j)]);
            }
        }
    }
}

TEST_CASE("time series validation") {
    CHECK_THROWS_AS(TimeSeries(std::vector<double>{}), Error);
    CHECK_THROWS_AS(TimeSeries(std::vector<double>{1.0, std::numeric_limits<double>::infinity()}), Error);
    CHECK_THROWS_AS(TimeSeries({1.0, 2.0}, {"a"}), Error);
    const TimeSeries s({1, 2, 3, 4, 5});
    CHECK(s.tail(2)[0] == 4);
    CHECK(s.slice(1, 3).size() == 3);
    CHECK(s.slice(1, 3)[0] == 2);
}

TEST_CASE("empirical quantile examples") {
    std::vector<double> ten(10);
    std::iota(ten.begin(), ten.end(), 1.0);
    CHECK(empirical_quantile(ten, 0.5) == 5);
    std::vector<double> thousand(1000);
    std::iota(thousand.begin(), thousand.end(), 1.0);
    CHECK(empirical_quantile(thousand, 0.95) == 950);
    CHECK(empirical_quantile(thousand, 0.025) == 25);
    CHECK(empirical_quantile(std::vector<double>(7, 2.5), 0.3) == 2.5);
    CHECK_THROWS_AS(empirical_quantile(std::vector<double>{}, 0.5), Error);
}

TEST_CASE("empirical quantile exhaustive small cases") {
    for (std::size_t m = 1; m <= 100; ++m) {
        std::vector<double> sorted(m);
        std::iota(sorted.begin(), sorted.end(), 0.0);
        std::vector<double> reversed(sorted.rbegin(), sorted.rend());
        double previous = -1.0;
        for (int a = 1; a <= 99; ++a) {
            const double alpha = a / 100.0;
            // integer arithmetic version of ceil(alpha * m)
            const std::size_t rank = std::max<std::size_t>(1, (static_cast<std::size_t>(a) * m + 99) / 100);
            const double q = empirical_quantile(reversed, alpha);
            REQUIRE(q == sorted[rank - 1]);
            REQUIRE(sorted_quantile(sorted, alpha) == q);
            REQUIRE(q >= previous);
            previous = q;
        }
    }
}
