#include "qarcast/backtest_io.hpp"

#include "qarcast/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

namespace qarcast {

namespace {

std::string trim(std::string s) {
    const auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    return s;
}

std::optional<double> parse_number(const std::string& s) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (first != last && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || first == last) return std::nullopt;
    return v;
}

bool label_less(const std::string& a, const std::string& b) {
    const auto na = parse_number(a);
    const auto nb = parse_number(b);
    if (na && nb) return *na < *nb;
    return a < b;
}

std::string format6(double v) {
    if (std::isnan(v)) return "NA";
    std::ostringstream os;
    os << std::setprecision(6) << v;
    return os.str();
}

struct WindowOutcome {
    std::vector<double> lower;
    std::vector<double> upper;
    bool ok = false;
};

bool covers(double lower, double upper, double y) {
    if (lower == upper) return y == lower;
    return lower < y && y < upper;
}

}  // namespace

TimeSeries parse_series_csv(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    bool header = false;
    std::vector<double> values;
    std::vector<std::string> labels;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
        if (trim(line).empty()) continue;
        if (!header) {
            header = true;
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
            throw Error(ErrorKind::ParseError, "row " + std::to_string(line_no) + ": expected two columns");
        }
        const std::string label = trim(line.substr(0, comma));
        const std::string cell = trim(line.substr(comma + 1));
        const auto v = parse_number(cell);
        if (!v) {
            throw Error(ErrorKind::ParseError, "row " + std::to_string(line_no) + ": value '" + cell + "' is not a number");
        }
        if (!std::isfinite(*v)) {
            throw Error(ErrorKind::ParseError, "row " + std::to_string(line_no) + ": value is not finite");
        }
        if (!labels.empty() && !label_less(labels.back(), label)) {
            throw Error(ErrorKind::NonMonotoneLabels,
                        "row " + std::to_string(line_no) + ": label '" + label + "' does not follow '" + labels.back() + "'");
        }
        labels.push_back(label);
        values.push_back(*v);
    }
    if (values.empty()) throw Error(ErrorKind::EmptyFile, "no data rows");
    return TimeSeries(std::move(values), std::move(labels));
}

TimeSeries load_series_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::EmptyFile, "cannot open " + path);
    try {
        return parse_series_csv(in);
    } catch (const Error& e) {
        throw Error(e.kind(), path + ": " + std::string(e.what()).substr(to_string(e.kind()).size() + 2));
    }
}

int BacktestConfig::max_horizon() const {
    return horizons.empty() ? 0 : *std::max_element(horizons.begin(), horizons.end());
}

void BacktestConfig::validate(std::size_t length) const {
    if (p < 1) throw Error(ErrorKind::InvalidArgument, "p must be positive");
    if (window < 2 * p + 2) {
        throw Error(ErrorKind::InvalidArgument, "window must be at least 2p + 2 = " + std::to_string(2 * p + 2));
    }
    if (horizons.empty()) throw Error(ErrorKind::InvalidArgument, "no horizons");
    for (std::size_t i = 0; i < horizons.size(); ++i) {
        if (horizons[i] < 1) throw Error(ErrorKind::InvalidArgument, "horizons must be positive");
        if (i > 0 && horizons[i] <= horizons[i - 1]) {
            throw Error(ErrorKind::InvalidArgument, "horizons must be strictly increasing");
        }
    }
    if (!(level > 0.0 && level < 1.0)) throw Error(ErrorKind::InvalidArgument, "level must lie in (0, 1)");
    if (methods.empty()) throw Error(ErrorKind::InvalidArgument, "no methods");
    for (const auto& m : methods) {
        if (m.method == Method::ORACLE) throw Error(ErrorKind::InvalidArgument, "oracle needs the true process");
    }
    if (length <= static_cast<std::size_t>(window + max_horizon())) {
        throw Error(ErrorKind::SeriesTooShort, "series of length " + std::to_string(length) +
                                                   " needs more than R + max horizon = " +
                                                   std::to_string(window + max_horizon()) + " values");
    }
}

const BacktestMethodResult& BacktestReport::result(Method method) const {
    for (const auto& r : results) {
        if (r.method == method) return r;
    }
    throw Error(ErrorKind::InvalidArgument, "method not in report");
}

BacktestReport rwpoos(const TimeSeries& series, const BacktestConfig& cfg, int workers) {
    cfg.validate(series.size());
    const auto y = series.values();
    const int len = static_cast<int>(series.size());
    const int R = cfg.window;
    const int K = cfg.max_horizon();
    const std::size_t H = cfg.horizons.size();
    // Windows 0..n_windows-1 (0-based start); horizon k uses starts < len - R - k + 1.
    const int n_windows = len - R - cfg.horizons.front() + 1;

    std::vector<MethodConfig> methods = cfg.methods;
    for (auto& m : methods) {
        m.p = cfg.p;
        m.levels = {cfg.level};
        m.max_horizon = K;
        m.validate();
    }

    const std::size_t total = methods.size() * static_cast<std::size_t>(n_windows);
    std::vector<WindowOutcome> outcomes(total);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (;;) {
            const std::size_t job = next.fetch_add(1);
            if (job >= total) return;
            const std::size_t mi = job / static_cast<std::size_t>(n_windows);
            const int i = static_cast<int>(job % static_cast<std::size_t>(n_windows));
            const auto train = y.subspan(static_cast<std::size_t>(i), static_cast<std::size_t>(R));
            WindowOutcome& out = outcomes[job];
            out.lower.assign(H, 0.0);
            out.upper.assign(H, 0.0);
            if (std::all_of(train.begin(), train.end(), [&](double v) { return v == train.front(); })) {
                std::fill(out.lower.begin(), out.lower.end(), train.front());
                std::fill(out.upper.begin(), out.upper.end(), train.front());
                out.ok = true;
                continue;
            }
            try {
                const RngStream rng = RngStream(cfg.seed, 0)
                                          .substream(StreamTag::Method, static_cast<std::uint64_t>(methods[mi].method))
                                          .substream(StreamTag::Window, static_cast<std::uint64_t>(i + 1));
                const auto pis = prediction_intervals(train, methods[mi], rng);
                for (std::size_t h = 0; h < H; ++h) {
                    const auto& pi = find_interval(pis, cfg.horizons[h], cfg.level);
                    out.lower[h] = pi.lower;
                    out.upper[h] = pi.upper;
                }
                out.ok = true;
            } catch (const Error&) {
                out.ok = false;
            }
        }
    };
    const int n_workers = std::max(1, std::min<int>(workers, static_cast<int>(total)));
    if (n_workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < n_workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }

    BacktestReport report;
    report.config = cfg;
    report.config.methods = methods;
    report.series_length = series.size();
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
        BacktestMethodResult r;
        r.method = methods[mi].method;
        for (std::size_t h = 0; h < H; ++h) {
            const int k = cfg.horizons[h];
            const int windows = len - R - (cfg.common_origins ? K : k) + 1;
            int covered = 0;
            int ok_windows = 0;
            double length_sum = 0.0;
            for (int i = 0; i < windows; ++i) {
                const auto& o = outcomes[mi * static_cast<std::size_t>(n_windows) + static_cast<std::size_t>(i)];
                if (!o.ok) continue;
                ++ok_windows;
                const double target = y[static_cast<std::size_t>(i + R - 1 + k)];
                if (covers(o.lower[h], o.upper[h], target)) ++covered;
                length_sum += o.upper[h] - o.lower[h];
            }
            r.windows.push_back(windows);
            r.covered.push_back(covered);
            r.coverage.push_back(100.0 * covered / windows);
            r.mean_length.push_back(ok_windows > 0 ? length_sum / ok_windows : std::nan(""));
        }
        for (int i = 0; i < n_windows; ++i) {
            if (!outcomes[mi * static_cast<std::size_t>(n_windows) + static_cast<std::size_t>(i)].ok) ++r.failures;
        }
        double d = 0.0;
        for (double c : r.coverage) d += std::abs(c - 100.0 * cfg.level);
        r.d_bar = d / static_cast<double>(H);
        report.results.push_back(std::move(r));
    }
    return report;
}

void write_backtest_csv(std::ostream& out, const BacktestReport& report) {
    out << "method";
    for (int k : report.config.horizons) out << ",beta_" << k;
    out << ",D_bar";
    for (int k : report.config.horizons) out << ",len_" << k;
    out << "\n";
    for (const auto& r : report.results) {
        out << method_tag(r.method);
        for (double c : r.coverage) out << "," << format6(c);
        out << "," << format6(r.d_bar);
        for (double l : r.mean_length) out << "," << format6(l);
        out << "\n";
    }
}

void write_backtest_json(std::ostream& out, const BacktestReport& report) {
    using nlohmann::json;
    const auto& c = report.config;
    json methods = json::array();
    for (const auto& r : report.results) {
        json lengths = json::array();
        for (double l : r.mean_length) lengths.push_back(std::isfinite(l) ? json(l) : json(nullptr));
        methods.push_back({{"method", method_tag(r.method)},
                           {"coverage", r.coverage},
                           {"covered", r.covered},
                           {"windows", r.windows},
                           {"D_bar", r.d_bar},
                           {"mean_length", lengths},
                           {"failures", r.failures}});
    }
    json cfg = {{"window", c.window},           {"p", c.p},
                {"horizons", c.horizons},       {"level", c.level},
                {"seed", c.seed},               {"common_origins", c.common_origins},
                {"series_length", report.series_length}};
    json b = json::object();
    for (const auto& m : c.methods) b[std::string(method_tag(m.method))] = m.replications();
    cfg["B"] = b;
    out << json{{"config", cfg}, {"methods", methods}}.dump(2) << "\n";
}

void write_backtest_table(std::ostream& out, const BacktestReport& report) {
    char buf[64];
    out << std::left << std::setw(10) << "k";
    for (int k : report.config.horizons) out << std::right << std::setw(8) << k;
    out << std::setw(8) << "D_bar";
    for (int k : report.config.horizons) out << std::setw(8) << ("len" + std::to_string(k));
    out << "\n";
    for (const auto& r : report.results) {
        out << std::left << std::setw(10) << method_label(r.method) << std::right;
        for (double c : r.coverage) {
            std::snprintf(buf, sizeof buf, "%8.2f", c);
            out << buf;
        }
        std::snprintf(buf, sizeof buf, "%8.2f", r.d_bar);
        out << buf;
        for (double l : r.mean_length) {
            std::snprintf(buf, sizeof buf, "%8.3g", l);
            out << buf;
        }
        out << "\n";
    }
}

}  // namespace qarcast
