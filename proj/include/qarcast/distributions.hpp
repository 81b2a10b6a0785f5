#pragma once

#include "qarcast/rng.hpp"

#include <string>

namespace qarcast {

enum class LawKind {
    Normal,
    StudentT,
    ChiSquared,
    /// Point mass at zero. Only used to switch randomness off in tests.
    Zero,
};

/// One of the innovation laws used by the simulation models.
struct InnovationLaw {
    LawKind kind = LawKind::Normal;
    int df = 0;

    static InnovationLaw normal() { return {LawKind::Normal, 0}; }
    static InnovationLaw student_t(int df) { return {LawKind::StudentT, df}; }
    static InnovationLaw chi_squared(int df) { return {LawKind::ChiSquared, df}; }
    static InnovationLaw zero() { return {LawKind::Zero, 0}; }

    bool operator==(const InnovationLaw&) const = default;
};

/// Parses "normal", "t3", "chi2_5" (and "t<df>", "chi2_<df>", "zero").
[[nodiscard]] InnovationLaw parse_law(const std::string& text);
[[nodiscard]] std::string law_name(const InnovationLaw& law);

[[nodiscard]] double cdf(const InnovationLaw& law, double x);

/// Quantile function F^{-1}(u); throws DomainError unless 0 < u < 1.
[[nodiscard]] double inverse_cdf(const InnovationLaw& law, double u);

[[nodiscard]] double median(const InnovationLaw& law);

[[nodiscard]] double draw(const InnovationLaw& law, RngStream& rng);

}  // namespace qarcast
