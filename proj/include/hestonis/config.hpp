#pragma once

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "bench.hpp"
#include "drift_mdp.hpp"
#include "model.hpp"
#include "payoff.hpp"

namespace hestonis {

// Bad configuration text or value; the message names the key (and line when known).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    HestonParams params;
    std::size_t n_steps = 252;
    PayoffKind payoff = PayoffKind::GeometricAsianCall;
    std::vector<double> strikes{50.0};
    std::vector<EstimatorKind> kinds{EstimatorKind::Classic};
    std::size_t n_paths = 100000;
    std::uint64_t seed = 20240607;
    std::string out;  // empty: stdout
    bool dump_drift = false;
    std::optional<double> constant_sigma;
    MdpReduction mdp_reduction = MdpReduction::Printed;
    bool timing = false;  // timing columns are zero unless set

    BenchSetting setting() const { return {params, TimeGrid(n_steps, params.t_end), constant_sigma}; }
    RunOptions run_options() const { return {timing, mdp_reduction}; }

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

inline std::vector<std::string_view> split_list(std::string_view s) {
    std::vector<std::string_view> out;
    while (true) {
        const auto c = s.find(',');
        const auto item = trim(s.substr(0, c));
        if (!item.empty()) out.push_back(item);
        if (c == std::string_view::npos) break;
        s.remove_prefix(c + 1);
    }
    return out;
}

inline double parse_double(std::string_view v, std::string_view key) {
    std::string tmp(v);
    char* end = nullptr;
    const double d = std::strtod(tmp.c_str(), &end);
    if (tmp.empty() || end != tmp.c_str() + tmp.size() || !std::isfinite(d))
        throw ConfigError("key '" + std::string(key) + "': not a finite number: '" + tmp + "'");
    return d;
}

template <class Int>
Int parse_uint(std::string_view v, std::string_view key) {
    Int x{};
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc{} || p != v.data() + v.size())
        throw ConfigError("key '" + std::string(key) + "': not a non-negative integer: '" + std::string(v) + "'");
    return x;
}

inline bool parse_bool(std::string_view v, std::string_view key) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError("key '" + std::string(key) + "': expected true or false");
}

// Shortest decimal that parses back to d.
inline std::string fmt_double(double d) {
    char buf[40];
    const auto r = std::to_chars(buf, buf + sizeof buf, d);
    return std::string(buf, r.ptr);
}

}  // namespace detail

inline const std::vector<std::string_view>& config_keys() {
    static const std::vector<std::string_view> keys{
        "s0", "r", "v0", "rho", "kappa", "theta", "xi", "T", "n_steps", "payoff", "strikes", "kinds",
        "n_paths", "seed", "out", "dump_drift", "constant_sigma", "mdp_reduction", "timing"};
    return keys;
}

// Sets one key; unknown keys and malformed values throw ConfigError.
inline void apply_setting(RunConfig& c, std::string_view key, std::string_view value) {
    using namespace detail;
    value = trim(value);
    auto& p = c.params;
    if (key == "s0") p.s0 = parse_double(value, key);
    else if (key == "r") p.r = parse_double(value, key);
    else if (key == "v0") p.v0 = parse_double(value, key);
    else if (key == "rho") p.rho = parse_double(value, key);
    else if (key == "kappa") p.kappa = parse_double(value, key);
    else if (key == "theta") p.theta = parse_double(value, key);
    else if (key == "xi") p.xi = parse_double(value, key);
    else if (key == "T") p.t_end = parse_double(value, key);
    else if (key == "n_steps") c.n_steps = parse_uint<std::size_t>(value, key);
    else if (key == "n_paths") c.n_paths = parse_uint<std::size_t>(value, key);
    else if (key == "seed") c.seed = parse_uint<std::uint64_t>(value, key);
    else if (key == "out") c.out = std::string(value);
    else if (key == "dump_drift") c.dump_drift = parse_bool(value, key);
    else if (key == "timing") c.timing = parse_bool(value, key);
    else if (key == "payoff") {
        const auto k = payoff_kind_from_string(value);
        if (!k) throw ConfigError("key 'payoff': unknown payoff '" + std::string(value) + "'");
        c.payoff = *k;
    } else if (key == "strikes") {
        c.strikes.clear();
        for (auto s : split_list(value)) c.strikes.push_back(parse_double(s, key));
    } else if (key == "kinds") {
        c.kinds.clear();
        for (auto s : split_list(value)) {
            const auto k = estimator_kind_from_string(s);
            if (!k) throw ConfigError("key 'kinds': unknown estimator '" + std::string(s) + "'");
            c.kinds.push_back(*k);
        }
    } else if (key == "constant_sigma") {
        if (value.empty() || value == "none") c.constant_sigma.reset();
        else c.constant_sigma = parse_double(value, key);
    } else if (key == "mdp_reduction") {
        if (value == "printed") c.mdp_reduction = MdpReduction::Printed;
        else if (value == "rederived") c.mdp_reduction = MdpReduction::Rederived;
        else throw ConfigError("key 'mdp_reduction': expected printed or rederived");
    } else {
        throw ConfigError("unknown key '" + std::string(key) + "'");
    }
}

inline void validate(const RunConfig& c) {
    try {
        validate(c.params);
    } catch (const DomainError& e) {
        const std::string msg = e.what();
        const std::string key = msg.substr(0, msg.find(' '));
        throw ConfigError("key '" + (key == "t_end" ? std::string("T") : key) + "': " + msg);
    }
    if (c.n_steps == 0) throw ConfigError("key 'n_steps': must be positive");
    if (c.n_paths < 2) throw ConfigError("key 'n_paths': need at least 2");
    for (double k : c.strikes)
        if (k < 0.0) throw ConfigError("key 'strikes': strikes must be non-negative");
    if (c.constant_sigma && !(*c.constant_sigma > 0.0))
        throw ConfigError("key 'constant_sigma': must be positive");
}

// `key = value` lines; '#' starts a comment. Result is validated.
inline RunConfig parse_config(std::istream& in, RunConfig base = {}) {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view s = line;
        if (const auto h = s.find('#'); h != std::string_view::npos) s = s.substr(0, h);
        s = detail::trim(s);
        if (s.empty()) continue;
        const auto eq = s.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        const auto key = detail::trim(s.substr(0, eq));
        try {
            apply_setting(base, key, s.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    validate(base);
    return base;
}

inline RunConfig parse_config(std::string_view text, RunConfig base = {}) {
    std::istringstream in{std::string(text)};
    return parse_config(in, std::move(base));
}

inline std::string serialize(const RunConfig& c) {
    using detail::fmt_double;
    std::ostringstream os;
    const auto& p = c.params;
    os << "s0 = " << fmt_double(p.s0) << '\n'
       << "r = " << fmt_double(p.r) << '\n'
       << "v0 = " << fmt_double(p.v0) << '\n'
       << "rho = " << fmt_double(p.rho) << '\n'
       << "kappa = " << fmt_double(p.kappa) << '\n'
       << "theta = " << fmt_double(p.theta) << '\n'
       << "xi = " << fmt_double(p.xi) << '\n'
       << "T = " << fmt_double(p.t_end) << '\n'
       << "n_steps = " << c.n_steps << '\n'
       << "payoff = " << to_string(c.payoff) << '\n';
    os << "strikes = ";
    for (std::size_t i = 0; i < c.strikes.size(); ++i) os << (i ? "," : "") << fmt_double(c.strikes[i]);
    os << "\nkinds = ";
    for (std::size_t i = 0; i < c.kinds.size(); ++i) os << (i ? "," : "") << to_string(c.kinds[i]);
    os << "\nn_paths = " << c.n_paths << '\n'
       << "seed = " << c.seed << '\n'
       << "out = " << c.out << '\n'
       << "dump_drift = " << (c.dump_drift ? "true" : "false") << '\n'
       << "constant_sigma = " << (c.constant_sigma ? fmt_double(*c.constant_sigma) : std::string("none")) << '\n'
       << "mdp_reduction = " << (c.mdp_reduction == MdpReduction::Printed ? "printed" : "rederived") << '\n'
       << "timing = " << (c.timing ? "true" : "false") << '\n';
    return os.str();
}

// Preset family, strikes, kinds and volatility mode on top of `c`.
inline void apply_preset(RunConfig& c, const Preset& p) {
    c.payoff = p.family;
    c.strikes = p.strikes;
    c.kinds = p.kinds;
    c.constant_sigma = p.constant_sigma;
}

}  // namespace hestonis
