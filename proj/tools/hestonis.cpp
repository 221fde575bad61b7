#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <hestonis/bench.hpp>
#include <hestonis/config.hpp>
#include <hestonis/selftest.hpp>

namespace {

using namespace hestonis;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitOptim = 2;
constexpr int kExitSelftest = 3;

struct Flags {
    std::string config_file;
    std::string preset;
    std::vector<std::string> strikes;
    std::vector<std::string> kinds;
    std::optional<std::size_t> paths, steps;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::vector<std::string> sets;
    std::size_t threads = 0;
};

void add_common(CLI::App* cmd, Flags& f) {
    cmd->add_option("--config", f.config_file, "key = value configuration file");
    cmd->add_option("--preset", f.preset, "table3, appendixC or varswap");
    cmd->add_option("--strike,--strikes", f.strikes, "strike list")->delimiter(',');
    cmd->add_option("--kind,--kinds", f.kinds, "estimator kinds")->delimiter(',');
    cmd->add_option("--paths", f.paths, "Monte Carlo paths");
    cmd->add_option("--steps", f.steps, "time steps");
    cmd->add_option("--seed", f.seed, "RNG seed");
    cmd->add_option("--out", f.out, "output file (default stdout)");
    cmd->add_option("--set", f.sets, "extra key=value override, repeatable");
    cmd->add_option("--threads", f.threads, "worker threads (0 = all cores)");
}

std::string join(const std::vector<std::string>& v) {
    std::string s;
    for (const auto& x : v) s += (s.empty() ? "" : ",") + x;
    return s;
}

// File, then preset, then flags.
RunConfig resolve(const Flags& f) {
    RunConfig c;
    if (!f.config_file.empty()) {
        std::ifstream in(f.config_file);
        if (!in) throw ConfigError("cannot open config file '" + f.config_file + "'");
        try {
            c = parse_config(in);
        } catch (const ConfigError& e) {
            throw ConfigError(f.config_file + ": " + e.what());
        }
    }
    if (!f.preset.empty()) {
        const auto p = preset_from_string(f.preset);
        if (!p) throw ConfigError("unknown preset '" + f.preset + "'");
        apply_preset(c, *p);
    }
    if (!f.strikes.empty()) apply_setting(c, "strikes", join(f.strikes));
    if (!f.kinds.empty()) apply_setting(c, "kinds", join(f.kinds));
    if (f.paths) c.n_paths = *f.paths;
    if (f.steps) c.n_steps = *f.steps;
    if (f.seed) c.seed = *f.seed;
    if (f.out) c.out = *f.out;
    for (const auto& s : f.sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
        apply_setting(c, detail::trim(std::string_view(s).substr(0, eq)), std::string_view(s).substr(eq + 1));
    }
    validate(c);
    return c;
}

template <class F>
void with_output(const std::string& path, F&& f) {
    if (path.empty()) {
        f(std::cout);
        std::cout.flush();
        return;
    }
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot write '" + path + "'");
    f(os);
}

std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

void write_drift(std::ostream& os, const DriftBuild& b, const std::optional<OracleComparison>& cmp,
                 const TimeGrid& g) {
    const double closed = cmp ? cmp->closed_form : b.closed_form_objective;
    const double orc = cmp ? cmp->oracle : b.oracle_objective;
    const double gap = cmp ? cmp->gap : b.gap;
    os << "t,h1,h2,psi,mode,source,closed_form_objective,oracle_objective,gap\n";
    for (std::size_t i = 0; i <= g.n_steps(); ++i)
        os << num(g.knot(i)) << ',' << num(b.schedule.h1[i]) << ',' << num(b.schedule.h2[i]) << ','
           << num(b.var.empty() ? std::nan("") : b.var[i]) << ',' << to_string(b.schedule.mode) << ',' << b.source
           << ',' << num(closed) << ',' << num(orc) << ',' << num(gap) << '\n';
}

std::pair<DriftBuild, std::optional<OracleComparison>> drift_with_gap(EstimatorKind kind, const PayoffSpec& spec,
                                                                      const RunConfig& c) {
    if (!has_drift(kind)) throw ConfigError("kind " + std::string(to_string(kind)) + " has no drift");
    if (kind == EstimatorKind::BS_A2) throw ConfigError("BS_A2 recomputes its drift per step; no static schedule");
    const auto s = c.setting();
    DriftBuild b;
    try {
        b = build_drift(kind, spec, s, c.mdp_reduction);
    } catch (const OptimError& e) {
        throw OptimError(std::string(to_string(kind)) + " at K=" + num(spec.strike) + ": " + e.what());
    }
    std::optional<OracleComparison> cmp;
    if (!s.constant_vol() && spec.call_type() && std::isnan(b.gap)) cmp = oracle_comparison(kind, spec, s, c.mdp_reduction);
    return {std::move(b), cmp};
}

int cmd_price(const RunConfig& c) {
    const auto rows = run_table(c.payoff, c.strikes, c.kinds, c.setting(), c.n_paths, c.seed, c.run_options());
    with_output(c.out, [&](std::ostream& os) { write_csv(os, rows); });
    int rc = kExitOk;
    for (const auto& r : rows)
        if (!r.ok) {
            std::cerr << "error: " << to_string(r.kind) << " K=" << num(r.strike) << ": " << r.error << '\n';
            rc = kExitOptim;
        }
    if (c.dump_drift) {
        for (double k : c.strikes)
            for (auto kind : c.kinds) {
                if (!has_drift(kind) || kind == EstimatorKind::BS_A2) continue;
                const auto spec = PayoffSpec::make(c.payoff, k, c.params);
                try {
                    const auto [b, cmp] = drift_with_gap(kind, spec, c);
                    const std::string path = "drift_" + std::string(to_string(kind)) + "_" + num(k) + ".csv";
                    std::ofstream os(path);
                    write_drift(os, b, cmp, c.setting().grid);
                } catch (const std::exception& e) {
                    std::cerr << "error: drift dump " << to_string(kind) << " K=" << num(k) << ": " << e.what() << '\n';
                    rc = kExitOptim;
                }
            }
    }
    return rc;
}

int cmd_drift(const RunConfig& c) {
    if (c.kinds.size() != 1 || c.strikes.size() != 1) throw ConfigError("drift needs exactly one kind and one strike");
    const auto spec = PayoffSpec::make(c.payoff, c.strikes[0], c.params);
    const auto [b, cmp] = drift_with_gap(c.kinds[0], spec, c);
    with_output(c.out, [&](std::ostream& os) { write_drift(os, b, cmp, c.setting().grid); });
    return kExitOk;
}

int cmd_selftest(std::size_t n_paths, std::uint64_t seed) {
    SelftestOptions o;
    o.n_paths = n_paths;
    o.seed = seed;
    if (const char* s = std::getenv("HESTONIS_NU_SCALE")) {
        char* end = nullptr;
        o.nu_scale = std::strtod(s, &end);
        if (end == s || *end != '\0') throw ConfigError("HESTONIS_NU_SCALE: not a number");
    }
    bool ok = true;
    for (const auto& r : run_selftest(o)) {
        std::cout << (r.pass ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
        ok = ok && r.pass;
    }
    std::cout << (ok ? "selftest passed" : "selftest FAILED") << std::endl;
    return ok ? kExitOk : kExitSelftest;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Importance-sampling Monte Carlo under Heston"};
    app.require_subcommand(1);
    Flags price_flags, drift_flags;
    auto* price = app.add_subcommand("price", "estimator table as CSV");
    add_common(price, price_flags);
    auto* drift = app.add_subcommand("drift", "drift schedule of one kind and strike as CSV");
    add_common(drift, drift_flags);
    auto* selftest = app.add_subcommand("selftest", "reduced-size consistency checks");
    std::size_t st_paths = 10000;
    std::uint64_t st_seed = 20240607;
    bool quick = false;
    selftest->add_option("--paths", st_paths, "paths per Monte Carlo check");
    selftest->add_option("--seed", st_seed, "RNG seed");
    selftest->add_flag("--quick", quick, "1000 paths");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*price) {
            thread_count_override() = price_flags.threads;
            return cmd_price(resolve(price_flags));
        }
        if (*drift) {
            thread_count_override() = drift_flags.threads;
            return cmd_drift(resolve(drift_flags));
        }
        return cmd_selftest(quick ? 1000 : st_paths, st_seed);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const DomainError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const OptimError& e) {
        std::cerr << "optimizer failure: " << e.what() << '\n';
        return kExitOptim;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitOptim;
    }
}
