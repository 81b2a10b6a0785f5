#include "qarcast/distributions.hpp"

#include "qarcast/error.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <cmath>
#include <stdexcept>

namespace qarcast {

namespace {

int parse_df(const std::string& text, const std::string& whole) {
    try {
        std::size_t used = 0;
        const int df = std::stoi(text, &used);
        if (used != text.size() || df <= 0) throw std::invalid_argument(text);
        return df;
    } catch (const std::exception&) {
        throw Error(ErrorKind::InvalidArgument, "bad degrees of freedom in law '" + whole + "'");
    }
}

}  // namespace

InnovationLaw parse_law(const std::string& text) {
    if (text == "normal" || text == "n01") return InnovationLaw::normal();
    if (text == "zero") return InnovationLaw::zero();
    if (text.rfind("chi2_", 0) == 0) return InnovationLaw::chi_squared(parse_df(text.substr(5), text));
    if (text.size() > 1 && text[0] == 't') return InnovationLaw::student_t(parse_df(text.substr(1), text));
    throw Error(ErrorKind::InvalidArgument, "unknown innovation law '" + text + "'");
}

std::string law_name(const InnovationLaw& law) {
    switch (law.kind) {
        case LawKind::Normal: return "normal";
        case LawKind::StudentT: return "t" + std::to_string(law.df);
        case LawKind::ChiSquared: return "chi2_" + std::to_string(law.df);
        case LawKind::Zero: return "zero";
    }
    return "unknown";
}

double cdf(const InnovationLaw& law, double x) {
    switch (law.kind) {
        case LawKind::Normal: return boost::math::cdf(boost::math::normal_distribution<>(), x);
        case LawKind::StudentT:
            return boost::math::cdf(boost::math::students_t_distribution<>(law.df), x);
        case LawKind::ChiSquared:
            if (x <= 0.0) return 0.0;
            return boost::math::cdf(boost::math::chi_squared_distribution<>(law.df), x);
        case LawKind::Zero: return x < 0.0 ? 0.0 : 1.0;
    }
    return 0.0;
}

double inverse_cdf(const InnovationLaw& law, double u) {
    if (!(u > 0.0 && u < 1.0)) {
        throw Error(ErrorKind::DomainError, "quantile level must lie in (0,1), got " + std::to_string(u));
    }
    switch (law.kind) {
        case LawKind::Normal: return boost::math::quantile(boost::math::normal_distribution<>(), u);
        case LawKind::StudentT:
            return boost::math::quantile(boost::math::students_t_distribution<>(law.df), u);
        case LawKind::ChiSquared:
            return boost::math::quantile(boost::math::chi_squared_distribution<>(law.df), u);
        case LawKind::Zero: return 0.0;
    }
    return 0.0;
}

double median(const InnovationLaw& law) { return inverse_cdf(law, 0.5); }

double draw(const InnovationLaw& law, RngStream& rng) {
    switch (law.kind) {
        case LawKind::Normal: return draw_standard_normal(rng);
        case LawKind::StudentT: return draw_student_t(law.df, rng);
        case LawKind::ChiSquared: return draw_chi_squared(law.df, rng);
        case LawKind::Zero: return 0.0;
    }
    return 0.0;
}

}  // namespace qarcast
