#include "qarcast/error.hpp"
#include "qarcast/sim_lab.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

namespace qarcast {

namespace {

using nlohmann::json;

[[noreturn]] void config_error(const std::string& path, const std::string& msg) {
    throw Error(ErrorKind::ConfigError, path + ": " + msg);
}

void reject_unknown(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.count(key)) config_error(path.empty() ? key : path + "." + key, "unknown key");
    }
}

double get_number(const json& v, const std::string& path) {
    if (!v.is_number()) config_error(path, "expected a number");
    return v.get<double>();
}

int get_int(const json& v, const std::string& path) {
    if (!v.is_number_integer() && !v.is_number_unsigned()) config_error(path, "expected an integer");
    const auto x = v.get<long long>();
    if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) config_error(path, "out of range");
    return static_cast<int>(x);
}

std::string get_string(const json& v, const std::string& path) {
    if (!v.is_string()) config_error(path, "expected a string");
    return v.get<std::string>();
}

bool get_bool(const json& v, const std::string& path) {
    if (!v.is_boolean()) config_error(path, "expected true or false");
    return v.get<bool>();
}

template <class F>
auto wrap(const std::string& path, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::ConfigError) throw;
        config_error(path, e.what());
    }
}

DgpSpec parse_dgp(const json& j) {
    if (!j.is_object()) config_error("dgp", "expected an object");
    reject_unknown(j, "dgp", {"model", "phi1", "p", "gamma0", "gamma1", "law", "burn_in", "median_center",
                              "coef_reading"});
    DgpSpec d;
    if (!j.contains("model")) config_error("dgp.model", "missing");
    d.model = wrap("dgp.model", [&] { return parse_model(get_string(j["model"], "dgp.model")); });
    if (j.contains("phi1")) d.phi1 = get_number(j["phi1"], "dgp.phi1");
    if (j.contains("p")) d.m2_order = get_int(j["p"], "dgp.p");
    if (j.contains("gamma0")) d.gamma0 = get_number(j["gamma0"], "dgp.gamma0");
    if (j.contains("gamma1")) d.gamma1 = get_number(j["gamma1"], "dgp.gamma1");
    if (j.contains("law")) d.law = wrap("dgp.law", [&] { return parse_law(get_string(j["law"], "dgp.law")); });
    if (j.contains("burn_in")) d.burn_in = get_int(j["burn_in"], "dgp.burn_in");
    if (j.contains("median_center")) d.median_center = get_bool(j["median_center"], "dgp.median_center");
    if (j.contains("coef_reading")) {
        const auto r = get_string(j["coef_reading"], "dgp.coef_reading");
        if (r == "uniform") {
            d.reading = CoefReading::Uniform;
        } else if (r == "literal_cdf") {
            d.reading = CoefReading::LiteralCdf;
        } else {
            config_error("dgp.coef_reading", "expected uniform or literal_cdf");
        }
    }
    wrap("dgp", [&] {
        d.validate();
        return 0;
    });
    return d;
}

MethodConfig parse_method_entry(const json& j, const std::string& path, const MethodConfig& base) {
    MethodConfig m = base;
    if (j.is_string()) {
        m.method = wrap(path, [&] { return parse_method(j.get<std::string>()); });
        return m;
    }
    if (!j.is_object()) config_error(path, "expected a method tag or an object");
    reject_unknown(j, path, {"method", "p", "tau", "tau0", "B", "multipliers", "loo", "oracle_draws", "bj_dof_correction"});
    if (!j.contains("method")) config_error(path + ".method", "missing");
    m.method = wrap(path + ".method", [&] { return parse_method(get_string(j["method"], path + ".method")); });
    if (j.contains("p")) m.p = get_int(j["p"], path + ".p");
    if (j.contains("tau")) m.tau = get_number(j["tau"], path + ".tau");
    if (j.contains("tau0")) m.tau = get_number(j["tau0"], path + ".tau0");
    if (j.contains("B")) m.B = get_int(j["B"], path + ".B");
    if (j.contains("multipliers")) {
        m.multipliers = wrap(path + ".multipliers",
                             [&] { return parse_multiplier_law(get_string(j["multipliers"], path + ".multipliers")); });
    }
    if (j.contains("loo")) {
        const auto v = get_string(j["loo"], path + ".loo");
        if (v != "full" && v != "row") config_error(path + ".loo", "expected full or row");
        m.loo = v == "row" ? LooMode::Row : LooMode::Full;
    }
    if (j.contains("oracle_draws")) m.oracle_draws = get_int(j["oracle_draws"], path + ".oracle_draws");
    if (j.contains("bj_dof_correction")) {
        m.bj_dof_correction = get_bool(j["bj_dof_correction"], path + ".bj_dof_correction");
    }
    return m;
}

std::string format6(double v) {
    if (std::isnan(v)) return "NA";
    std::ostringstream os;
    os << std::setprecision(6) << v;
    return os.str();
}

std::string loo_name(LooMode mode) { return mode == LooMode::Row ? "row" : "full"; }

json config_to_json(const ExperimentConfig& cfg) {
    json dgp = {{"model", model_name(cfg.dgp.model)},
                {"law", law_name(cfg.dgp.law)},
                {"burn_in", cfg.dgp.burn_in},
                {"median_center", cfg.dgp.median_center},
                {"coef_reading", cfg.dgp.reading == CoefReading::Uniform ? "uniform" : "literal_cdf"}};
    if (cfg.dgp.model == ModelKind::M1) dgp["phi1"] = cfg.dgp.phi1;
    if (cfg.dgp.model == ModelKind::M2) dgp["p"] = cfg.dgp.m2_order;
    if (cfg.dgp.model == ModelKind::M3) {
        dgp["gamma0"] = cfg.dgp.gamma0;
        dgp["gamma1"] = cfg.dgp.gamma1;
    }
    json methods = json::array();
    for (const auto& m : cfg.methods) {
        json e = {{"method", std::string(method_tag(m.method))}, {"p", m.p}, {"tau", m.tau}, {"B", m.replications()},
                  {"multipliers", std::string(multiplier_law_name(m.multipliers))}, {"loo", loo_name(m.loo)}};
        if (m.method == Method::ORACLE) e["oracle_draws"] = m.oracle_draws;
        if (m.method == Method::BJ) e["bj_dof_correction"] = m.bj_dof_correction;
        methods.push_back(e);
    }
    return {{"dgp", dgp},   {"n", cfg.n}, {"horizons", cfg.horizons}, {"methods", methods},
            {"S", cfg.S},   {"F", cfg.F}, {"beta", cfg.levels},       {"seed", cfg.seed},
            {"profile", profile_name(cfg.profile)}};
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text, std::optional<Profile> profile_override) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        config_error("(document)", std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object()) config_error("(document)", "expected a JSON object");
    reject_unknown(j, "", {"dgp", "n", "horizons", "methods", "S", "F", "beta", "seed", "profile", "p", "tau",
                           "multipliers", "loo", "oracle_draws", "B_ar", "B_qar"});

    ExperimentConfig cfg;
    cfg.profile = default_profile();
    if (j.contains("profile")) {
        cfg.profile = wrap("profile", [&] { return parse_profile(get_string(j["profile"], "profile")); });
    }
    if (profile_override) cfg.profile = *profile_override;
    const ProfileDefaults defaults = profile_defaults(cfg.profile);
    cfg.S = defaults.S;
    cfg.F = defaults.F;

    if (!j.contains("dgp")) config_error("dgp", "missing");
    cfg.dgp = parse_dgp(j["dgp"]);
    if (j.contains("n")) cfg.n = get_int(j["n"], "n");
    if (j.contains("S")) cfg.S = get_int(j["S"], "S");
    if (j.contains("F")) cfg.F = get_int(j["F"], "F");
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer()) config_error("seed", "expected an integer");
        cfg.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("horizons")) {
        const auto& h = j["horizons"];
        if (h.is_number()) {
            cfg.horizons = {get_int(h, "horizons")};
        } else if (h.is_array()) {
            cfg.horizons.clear();
            for (std::size_t i = 0; i < h.size(); ++i) cfg.horizons.push_back(get_int(h[i], "horizons[" + std::to_string(i) + "]"));
        } else {
            config_error("horizons", "expected an integer or an array of integers");
        }
    }
    if (j.contains("beta")) {
        const auto& b = j["beta"];
        if (b.is_number()) {
            cfg.levels = {b.get<double>()};
        } else if (b.is_array()) {
            cfg.levels.clear();
            for (std::size_t i = 0; i < b.size(); ++i) cfg.levels.push_back(get_number(b[i], "beta[" + std::to_string(i) + "]"));
        } else {
            config_error("beta", "expected a number or an array of numbers");
        }
    }

    MethodConfig base;
    base.p = 0;
    base.B = 0;
    if (j.contains("p")) base.p = get_int(j["p"], "p");
    if (j.contains("tau")) base.tau = get_number(j["tau"], "tau");
    if (j.contains("multipliers")) {
        base.multipliers = wrap("multipliers", [&] { return parse_multiplier_law(get_string(j["multipliers"], "multipliers")); });
    }
    if (j.contains("loo")) {
        const auto v = get_string(j["loo"], "loo");
        if (v != "full" && v != "row") config_error("loo", "expected full or row");
        base.loo = v == "row" ? LooMode::Row : LooMode::Full;
    }
    if (j.contains("oracle_draws")) base.oracle_draws = get_int(j["oracle_draws"], "oracle_draws");
    const int b_ar = j.contains("B_ar") ? get_int(j["B_ar"], "B_ar") : 0;
    const int b_qar = j.contains("B_qar") ? get_int(j["B_qar"], "B_qar") : 0;

    if (!j.contains("methods")) config_error("methods", "missing");
    const auto& ms = j["methods"];
    if (!ms.is_array()) config_error("methods", "expected an array");
    for (std::size_t i = 0; i < ms.size(); ++i) {
        const std::string path = "methods[" + std::to_string(i) + "]";
        if (ms[i].is_string() && ms[i].get<std::string>() == "all") {
            for (Method m : all_methods()) {
                MethodConfig mc = base;
                mc.method = m;
                cfg.methods.push_back(mc);
            }
            continue;
        }
        cfg.methods.push_back(parse_method_entry(ms[i], path, base));
    }
    for (auto& m : cfg.methods) {
        if (m.B <= 0) m.B = is_qar_based(m.method) ? b_qar : b_ar;
    }
    wrap("(document)", [&] {
        cfg.validate();
        return 0;
    });
    return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path, std::optional<Profile> profile_override) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::ConfigError, "cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_experiment_config(buf.str(), profile_override);
}

void write_report_csv(std::ostream& out, const CoverageReport& report) {
    out << "method,horizon,level,statistic,value\n";
    for (const auto& c : report.cells) {
        const std::string prefix =
            std::string(method_tag(c.method)) + "," + std::to_string(c.horizon) + "," + format6(c.level) + ",";
        const std::pair<const char*, double> rows[] = {
            {"beta_bar", c.stats.beta_bar}, {"se", c.stats.se},           {"mse", c.stats.mse},
            {"b_bar", c.stats.b_bar},       {"a_bar", c.stats.a_bar},     {"len_bar", c.stats.len_bar},
            {"len_se", c.stats.len_se},     {"gamma_hat", c.stats.gamma_hat}, {"median_beta", c.stats.median_beta},
            {"S", static_cast<double>(c.stats.S)}, {"failures", static_cast<double>(c.failures)}};
        for (const auto& [name, value] : rows) out << prefix << name << "," << format6(value) << "\n";
    }
}

void write_report_json(std::ostream& out, const CoverageReport& report) {
    json cells = json::array();
    for (const auto& c : report.cells) {
        cells.push_back({{"method", std::string(method_tag(c.method))},
                         {"label", std::string(method_label(c.method))},
                         {"horizon", c.horizon},
                         {"level", c.level},
                         {"S", c.stats.S},
                         {"failures", c.failures},
                         {"beta_bar", number_or_null(c.stats.beta_bar)},
                         {"se", number_or_null(c.stats.se)},
                         {"mse", number_or_null(c.stats.mse)},
                         {"b_bar", number_or_null(c.stats.b_bar)},
                         {"a_bar", number_or_null(c.stats.a_bar)},
                         {"len_bar", number_or_null(c.stats.len_bar)},
                         {"len_se", number_or_null(c.stats.len_se)},
                         {"gamma_hat", number_or_null(c.stats.gamma_hat)},
                         {"median_beta", number_or_null(c.stats.median_beta)}});
    }
    const json doc = {{"config", config_to_json(report.config)}, {"cells", cells}};
    out << doc.dump(2) << "\n";
}

void write_raw_csv(std::ostream& out, const CoverageReport& report) {
    out << "method,horizon,level,s,beta_s,above_s,below_s,length\n";
    out << std::setprecision(17);
    for (const auto& c : report.cells) {
        for (std::size_t i = 0; i < c.beta_s.size(); ++i) {
            out << method_tag(c.method) << "," << c.horizon << "," << c.level << "," << c.replication[i] << ","
                << c.beta_s[i] << "," << c.above_s[i] << "," << c.below_s[i] << "," << c.length_s[i] << "\n";
        }
    }
}

}  // namespace qarcast
