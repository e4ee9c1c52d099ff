// Copyright 2026 The qsdc-sim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef QSDC_TOOLS_COMMANDS_HPP
#define QSDC_TOOLS_COMMANDS_HPP

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "qsdc/qsdc.hpp"

namespace qsdc::cli {

enum ExitCode : int { kOk = 0, kConfigError = 2, kDataError = 3, kFitFailure = 4, kSecurityAbort = 5 };

/// Malformed or degenerate input data (as opposed to a bad configuration).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Options {
    std::optional<std::string> config_path;
    std::optional<std::string> out_path;
    std::optional<std::string> counts_path;
    std::optional<std::uint64_t> seed;
    unsigned threads = 1;
};

namespace detail {

inline const std::map<std::string, std::set<std::string>>& schema() {
    static const std::map<std::string, std::set<std::string>> s{
        {"source", {"pair_prob_p", "pump_rate_hz", "car", "vis_0deg", "vis_45deg"}},
        {"belltest", {"coincidence_rate_hz", "duration_s", "s_threshold"}},
        {"bsm",
         {"setting", "center_delay_ps", "coherence_sigma_ps", "max_overlap", "delay_start_ps", "delay_stop_ps",
          "delay_step_ps", "flux_hz", "duration_s", "efficiency_per_photon"}},
        {"perf",
         {"lt_start_km", "lt_stop_km", "lt_step_km", "p_values", "m_values", "atten_db_per_km",
          "group_speed_kmps", "eta_bsm", "eta_s"}},
        {"session",
         {"transmission_km", "memory_km", "atten_db_per_km", "eta_s", "eta_bsm", "security_fraction",
          "min_counts_m", "s_threshold", "significance_k", "eve", "eve_basis_deg", "message",
          "random_message_bits", "bsm_delay_ps", "drift_max_deg"}},
    };
    return s;
}

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& text, const std::string& what) {
    const std::string t = trim(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty() || !std::isfinite(v)) {
        throw ConfigError(what + ": expected a number, got '" + text + "'");
    }
    return v;
}

inline long long parse_integer(const std::string& text, const std::string& what) {
    const std::string t = trim(text);
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty()) {
        throw ConfigError(what + ": expected an integer, got '" + text + "'");
    }
    return v;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, sep)) out.push_back(item);
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

} // namespace detail

/// Flat INI configuration with one section per module. Unknown sections and
/// keys are rejected so a typo never silently falls back to a default.
class Config {
public:
    Config() = default;

    static Config load(const std::optional<std::string>& path) {
        Config c;
        if (!path) return c;
        std::ifstream in(*path);
        if (!in) throw ConfigError("cannot read config file '" + *path + "'");
        try {
            boost::property_tree::ini_parser::read_ini(in, c.tree_);
        } catch (const boost::property_tree::ini_parser_error& e) {
            throw ConfigError(std::string("config parse error: ") + e.what());
        }
        for (const auto& [section, body] : c.tree_) {
            const auto it = detail::schema().find(section);
            if (it == detail::schema().end()) {
                if (body.empty()) throw ConfigError("key '" + section + "' outside any section");
                throw ConfigError("unknown config section [" + section + "]");
            }
            for (const auto& [key, value] : body) {
                if (!it->second.count(key)) throw ConfigError("unknown key '" + key + "' in [" + section + "]");
            }
        }
        return c;
    }

    [[nodiscard]] std::optional<std::string> raw(const std::string& section, const std::string& key) const {
        const auto sec = tree_.get_child_optional(section);
        if (!sec) return std::nullopt;
        const auto v = sec->get_optional<std::string>(key);
        if (!v) return std::nullopt;
        return *v;
    }

    [[nodiscard]] double number(const std::string& section, const std::string& key, double fallback) const {
        const auto r = raw(section, key);
        return r ? detail::parse_double(*r, section + "." + key) : fallback;
    }

    [[nodiscard]] long long integer(const std::string& section, const std::string& key, long long fallback) const {
        const auto r = raw(section, key);
        return r ? detail::parse_integer(*r, section + "." + key) : fallback;
    }

    [[nodiscard]] std::string text(const std::string& section, const std::string& key, const std::string& fallback) const {
        const auto r = raw(section, key);
        return r ? detail::trim(*r) : fallback;
    }

    [[nodiscard]] std::vector<double> numbers(const std::string& section, const std::string& key,
                                              std::vector<double> fallback) const {
        const auto r = raw(section, key);
        if (!r) return fallback;
        std::vector<double> out;
        for (const auto& item : detail::split(*r, ',')) out.push_back(detail::parse_double(item, section + "." + key));
        return out;
    }

private:
    boost::property_tree::ptree tree_;
};

[[nodiscard]] inline SourceParams source_from(const Config& cfg) {
    SourceParams s;
    s.pair_prob_p = cfg.number("source", "pair_prob_p", s.pair_prob_p);
    s.pump_rate_hz = cfg.number("source", "pump_rate_hz", s.pump_rate_hz);
    s.car = cfg.number("source", "car", s.car);
    s.vis_0deg = cfg.number("source", "vis_0deg", s.vis_0deg);
    s.vis_45deg = cfg.number("source", "vis_45deg", s.vis_45deg);
    try {
        s.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return s;
}

[[nodiscard]] inline TwoPhotonDensity source_density(const SourceParams& s) {
    try {
        return source_state(calibrate_source(s.vis_0deg, s.vis_45deg));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

/// Parses a message given as a bit string ("0110") or hex ("0x6f", MSB first).
[[nodiscard]] inline std::vector<int> parse_message(const std::string& text) {
    std::vector<int> bits;
    if (text.size() > 2 && (text.rfind("0x", 0) == 0 || text.rfind("0X", 0) == 0)) {
        for (char ch : text.substr(2)) {
            int nibble = 0;
            const auto [ptr, ec] = std::from_chars(&ch, &ch + 1, nibble, 16);
            if (ec != std::errc{}) throw ConfigError(std::string("message: invalid hex digit '") + ch + "'");
            for (int k = 3; k >= 0; --k) bits.push_back((nibble >> k) & 1);
        }
        return bits;
    }
    for (char ch : text) {
        if (ch != '0' && ch != '1') throw ConfigError(std::string("message: invalid bit '") + ch + "'");
        bits.push_back(ch - '0');
    }
    return bits;
}

namespace detail {

inline std::uint64_t require_seed(const Options& o) {
    if (!o.seed) throw ConfigError("--seed is required for simulation subcommands");
    return *o.seed;
}

inline void write_file(const std::optional<std::string>& path, const std::string& body) {
    if (!path) return;
    std::ofstream f(*path, std::ios::binary | std::ios::trunc);
    if (!f) throw ConfigError("cannot write output file '" + *path + "'");
    f << body;
    if (!f) throw ConfigError("failed writing output file '" + *path + "'");
}

inline std::vector<double> delay_range(double start, double stop, double step) {
    if (!(step > 0.0)) throw ConfigError("bsm.delay_step_ps must be positive");
    if (stop < start) throw ConfigError("bsm delay range is empty");
    std::vector<double> out;
    // Integer stepping avoids accumulating rounding in the grid.
    const auto n = static_cast<long long>(std::floor((stop - start) / step + 1e-9));
    for (long long k = 0; k <= n; ++k) out.push_back(start + static_cast<double>(k) * step);
    return out;
}

inline std::vector<double> length_range(double start, double stop, double step) {
    if (!(step > 0.0)) throw ConfigError("perf.lt_step_km must be positive");
    if (stop < start || start < 0.0) throw ConfigError("perf lt range is empty");
    std::vector<double> out;
    const auto n = static_cast<long long>(std::floor((stop - start) / step + 1e-9));
    for (long long k = 0; k <= n; ++k) out.push_back(start + static_cast<double>(k) * step);
    return out;
}

inline constexpr char kCountsHeader[] = "theta1_deg,theta2_deg,n_ik,n_jl,n_il,n_jk";

inline std::uint64_t parse_count(const std::string& text, std::size_t line) {
    const std::string t = trim(text);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size()) {
        throw DataError(fmt::format("counts CSV line {}: '{}' is not a nonnegative integer", line, text));
    }
    return v;
}

struct CountsTable {
    ChshSettings settings;
    ChshCounts counts{};
};

inline CountsTable read_counts_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read counts CSV '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || trim(line) != kCountsHeader) {
        throw DataError(std::string("counts CSV: header must be '") + kCountsHeader + "'");
    }
    CountsTable t;
    std::size_t row = 0;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        if (row == 4) throw DataError("counts CSV: more than four data rows");
        const auto f = split(line, ',');
        if (f.size() != 6) throw DataError(fmt::format("counts CSV line {}: expected 6 fields, got {}", lineno, f.size()));
        try {
            t.settings.pairs[row] = {Degrees{parse_double(f[0], "theta1_deg")}, Degrees{parse_double(f[1], "theta2_deg")}};
        } catch (const ConfigError& e) {
            throw DataError(fmt::format("counts CSV line {}: {}", lineno, e.what()));
        }
        t.counts[row] = {parse_count(f[2], lineno), parse_count(f[3], lineno), parse_count(f[4], lineno),
                         parse_count(f[5], lineno)};
        ++row;
    }
    if (row != 4) throw DataError(fmt::format("counts CSV: expected four data rows, got {}", row));
    return t;
}

inline std::string counts_csv(const ChshSettings& settings, const ChshCounts& counts) {
    std::string s = std::string(kCountsHeader) + "\n";
    for (std::size_t k = 0; k < 4; ++k) {
        const auto& q = counts[k];
        s += fmt::format("{},{},{},{},{},{}\n", settings.pairs[k].theta1.value, settings.pairs[k].theta2.value,
                         q.n_ik, q.n_jl, q.n_il, q.n_jk);
    }
    return s;
}

} // namespace detail

/// CHSH test. With --counts, analyses a measured table; otherwise simulates
/// the configured source.
inline int cmd_belltest(const Options& o, std::ostream& out) {
    const Config cfg = Config::load(o.config_path);
    SecurityPolicy policy;
    policy.s_threshold = cfg.number("belltest", "s_threshold", policy.s_threshold);

    detail::CountsTable table;
    if (o.counts_path) {
        table = detail::read_counts_csv(*o.counts_path);
    } else {
        const std::uint64_t seed = detail::require_seed(o);
        const SourceParams src = source_from(cfg);
        const double rate = cfg.number("belltest", "coincidence_rate_hz", 1.0e4);
        const double duration = cfg.number("belltest", "duration_s", 1.0);
        if (!(rate > 0.0)) throw ConfigError("belltest.coincidence_rate_hz must be positive");
        if (!(duration > 0.0)) throw ConfigError("belltest.duration_s must be positive");
        table.counts = simulate_bell_counts(source_density(src), table.settings, rate, duration, src.car, seed);
    }

    ChshResult r;
    try {
        r = chsh_S(table.counts, table.settings);
    } catch (const std::domain_error& e) {
        throw DataError(std::string("degenerate counts: ") + e.what());
    }
    detail::write_file(o.out_path, detail::counts_csv(table.settings, table.counts));

    for (std::size_t k = 0; k < 4; ++k) {
        out << fmt::format("E({}, {}) = {:.5f}\n", table.settings.pairs[k].theta1.value,
                           table.settings.pairs[k].theta2.value, r.per_setting_E[k]);
    }
    out << fmt::format("S = {:.4f} +/- {:.4f}\n", r.s_value, r.sigma);
    out << "verdict: " << to_string(security_decision(r.s_value, r.sigma, policy)) << "\n";
    return kOk;
}

/// Delay scan of the BSM for the two encoded states, with Gaussian fits and
/// the resulting visibility.
inline int cmd_bsmscan(const Options& o, std::ostream& out) {
    const Config cfg = Config::load(o.config_path);
    const std::uint64_t seed = detail::require_seed(o);
    const SourceParams src = source_from(cfg);

    const std::string setting_text = cfg.text("bsm", "setting", "M1");
    BsmSetting setting{};
    if (setting_text == "M1") setting = BsmSetting::M1;
    else if (setting_text == "M2") setting = BsmSetting::M2;
    else throw ConfigError("bsm.setting must be M1 or M2, got '" + setting_text + "'");

    OverlapModel overlap;
    overlap.center_delay_ps = cfg.number("bsm", "center_delay_ps", overlap.center_delay_ps);
    overlap.coherence_sigma_ps = cfg.number("bsm", "coherence_sigma_ps", overlap.coherence_sigma_ps);
    overlap.max_overlap = cfg.number("bsm", "max_overlap", overlap.max_overlap);

    ScanParams params;
    params.flux_hz = cfg.number("bsm", "flux_hz", params.flux_hz);
    params.duration_s = cfg.number("bsm", "duration_s", params.duration_s);
    params.efficiency_per_photon = cfg.number("bsm", "efficiency_per_photon", params.efficiency_per_photon);
    params.car = src.car;
    const std::vector<double> delays =
        detail::delay_range(cfg.number("bsm", "delay_start_ps", overlap.center_delay_ps - 100.0),
                            cfg.number("bsm", "delay_stop_ps", overlap.center_delay_ps + 100.0),
                            cfg.number("bsm", "delay_step_ps", 4.0));
    try {
        overlap.validate();
        params.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }

    const BsmScanResult r = run_bsm_scan(source_density(src), setting, overlap, delays, params, seed, o.threads);

    auto fit_cell = [](const FitResult& f, double tau) { return f.ok() ? fmt::format("{}", f.value()(tau)) : std::string(); };
    std::string csv = "delay_ps,counts_psi_minus,counts_psi_plus,fit_psi_minus,fit_psi_plus\n";
    for (std::size_t k = 0; k < r.delays_ps.size(); ++k) {
        csv += fmt::format("{},{},{},{},{}\n", r.delays_ps[k], r.counts_psi_minus[k], r.counts_psi_plus[k],
                           fit_cell(r.fit_psi_minus, r.delays_ps[k]), fit_cell(r.fit_psi_plus, r.delays_ps[k]));
    }
    detail::write_file(o.out_path, csv);

    out << "setting: " << to_string(setting) << "\n";
    auto report_fit = [&out](const char* name, const FitResult& f) {
        if (f.ok()) {
            const GaussianFit& g = f.value();
            out << fmt::format("fit {}: baseline {:.2f}, amplitude {:.2f}, center {:.2f} ps, sigma {:.2f} ps\n", name,
                               g.baseline, g.amplitude, g.center, g.sigma);
        } else {
            out << fmt::format("fit {}: failed ({})\n", name, f.failure().reason);
        }
    };
    report_fit("psi-", r.fit_psi_minus);
    report_fit("psi+", r.fit_psi_plus);
    if (!r.visibility) {
        out << "visibility: unavailable (" << r.diagnostic << ")\n";
        return kFitFailure;
    }
    out << fmt::format("visibility = {:.4f}\n", *r.visibility);
    out << fmt::format("fidelity estimate = {:.4f}\n", fidelity_estimate(*r.visibility));
    return kOk;
}

/// Maximum coincidence rate sweep over transmission length, p and m.
inline int cmd_perf(const Options& o, std::ostream& out) {
    const Config cfg = Config::load(o.config_path);
    LinkParams base;
    base.pump_rate_hz = cfg.number("source", "pump_rate_hz", base.pump_rate_hz);
    base.atten_db_per_km = cfg.number("perf", "atten_db_per_km", base.atten_db_per_km);
    base.group_speed_kmps = cfg.number("perf", "group_speed_kmps", base.group_speed_kmps);
    base.eta_bsm = cfg.number("perf", "eta_bsm", base.eta_bsm);
    base.eta_s = cfg.number("perf", "eta_s", base.eta_s);
    const std::vector<double> lts = detail::length_range(cfg.number("perf", "lt_start_km", 1.0),
                                                         cfg.number("perf", "lt_stop_km", 30.0),
                                                         cfg.number("perf", "lt_step_km", 1.0));
    const std::vector<double> ps = cfg.numbers("perf", "p_values", {0.015, 0.02, 0.025, 0.03});
    std::vector<long long> ms;
    for (double m : cfg.numbers("perf", "m_values", {1000.0})) {
        if (m != std::floor(m) || m < 1.0) throw ConfigError("perf.m_values must be positive integers");
        ms.push_back(static_cast<long long>(m));
    }
    if (ps.empty() || ms.empty()) throw ConfigError("perf: p_values and m_values must be nonempty");

    std::vector<RmaxPoint> pts;
    try {
        pts = rmax_scan(lts, ps, ms, base);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    std::string csv = "lt_km,p,m,t_s,lm_km,rmax_hz\n";
    for (const RmaxPoint& p : pts) {
        csv += fmt::format("{},{},{},{},{},{}\n", p.lt_km, p.pair_prob_p, p.security_counts_m, p.t_seconds, p.lm_km,
                           p.rmax_hz);
    }
    detail::write_file(o.out_path, csv);
    if (!o.out_path) out << csv;
    out << fmt::format("{} points\n", pts.size());
    return kOk;
}

/// Builds the session configuration from the [source], [bsm] and [session]
/// sections.
[[nodiscard]] inline SessionConfig session_from(const Config& cfg, std::uint64_t seed) {
    SessionConfig c;
    c.seed = seed;
    c.source = source_from(cfg);
    const double atten = cfg.number("session", "atten_db_per_km", 0.2);
    const double lt = cfg.number("session", "transmission_km", 10.0);
    const double lm = cfg.number("session", "memory_km", 70.0);
    c.transmission_a = FiberSpan{lt, atten, std::nullopt};
    c.transmission_b = FiberSpan{lt, atten, std::nullopt};
    c.memory_a = FiberSpan{lm, atten, std::nullopt};
    c.memory_b = FiberSpan{lm, atten, std::nullopt};

    const double drift = cfg.number("session", "drift_max_deg", 0.0);
    if (drift < 0.0) throw ConfigError("session.drift_max_deg must be >= 0");
    if (drift > 0.0) {
        const StreamKey key = StreamKey(seed).child(stream::kDrift);
        c.transmission_a.drift = random_drift(key.child(1), Degrees{drift});
        c.transmission_b.drift = random_drift(key.child(2), Degrees{drift});
        c.memory_a.drift = random_drift(key.child(3), Degrees{drift});
        c.memory_b.drift = random_drift(key.child(4), Degrees{drift});
    }

    c.overlap.center_delay_ps = cfg.number("bsm", "center_delay_ps", c.overlap.center_delay_ps);
    c.overlap.coherence_sigma_ps = cfg.number("bsm", "coherence_sigma_ps", c.overlap.coherence_sigma_ps);
    c.overlap.max_overlap = cfg.number("bsm", "max_overlap", c.overlap.max_overlap);
    if (cfg.raw("session", "bsm_delay_ps")) c.bsm_delay_ps = cfg.number("session", "bsm_delay_ps", 0.0);

    c.eta_s = cfg.number("session", "eta_s", c.eta_s);
    c.eta_bsm = cfg.number("session", "eta_bsm", c.eta_bsm);
    c.security_fraction = cfg.number("session", "security_fraction", c.security_fraction);
    c.policy.min_counts_m = cfg.integer("session", "min_counts_m", c.policy.min_counts_m);
    c.policy.s_threshold = cfg.number("session", "s_threshold", c.policy.s_threshold);
    c.policy.significance_k = cfg.number("session", "significance_k", c.policy.significance_k);

    const std::string eve = cfg.text("session", "eve", "none");
    if (eve == "intercept_resend") c.eve = EveModel{EveMode::InterceptResend, Degrees{cfg.number("session", "eve_basis_deg", 0.0)}};
    else if (eve != "none") throw ConfigError("session.eve must be none or intercept_resend, got '" + eve + "'");

    const auto message = cfg.raw("session", "message");
    const long long random_bits = cfg.integer("session", "random_message_bits", 0);
    if (message && random_bits > 0) throw ConfigError("session: give either message or random_message_bits");
    if (message) {
        c.message = parse_message(detail::trim(*message));
    } else if (random_bits > 0) {
        auto rng = StreamKey(seed).child(0x4D5347).engine();
        c.message.resize(static_cast<std::size_t>(random_bits));
        for (int& b : c.message) b = static_cast<int>(rng() >> 63);
    }
    if (c.message.empty()) throw ConfigError("session: message is empty");
    return c;
}

inline int cmd_session(const Options& o, std::ostream& out) {
    const Config cfg = Config::load(o.config_path);
    const SessionConfig c = session_from(cfg, detail::require_seed(o));
    const SessionReport r = run_session(c, o.threads);

    std::string csv = "index,sent,pattern,decoded\n";
    for (std::size_t i = 0; i < r.bits.size(); ++i) {
        csv += fmt::format("{},{},{},{}\n", i, r.bits[i].sent, to_string(r.bits[i].pattern), to_string(r.bits[i].decoded));
    }
    detail::write_file(o.out_path, csv);
    out << r.to_text();
    return r.verdict == Verdict::Accepted ? kOk : kSecurityAbort;
}

/// Runs `fn` and maps the error taxonomy onto the exit-code contract.
template <typename Fn>
int guarded(Fn&& fn, std::ostream& err) {
    try {
        return fn();
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << "\n";
        return kDataError;
    } catch (const std::invalid_argument& e) {
        err << "config error: " << e.what() << "\n";
        return kConfigError;
    }
}

} // namespace qsdc::cli

#endif // QSDC_TOOLS_COMMANDS_HPP
