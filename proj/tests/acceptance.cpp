// Acceptance run at N = 1e5. Prints one PASS/FAIL line per criterion.
//   acceptance [--paths N] [--seed S] [--only 1,2,...] [--strict]
// Exit status is nonzero when a criterion fails, except criteria listed in
// kKnownFailures, which are reported but only fail the run under --strict.

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <hestonis/bench.hpp>
#include <hestonis/selftest.hpp>

#ifndef HESTONIS_CLI_PATH
#define HESTONIS_CLI_PATH "hestonis"
#endif

using namespace hestonis;
using K = EstimatorKind;

namespace {

const std::set<int> kKnownFailures{4, 6};

std::string fmt(const char* f, auto... a) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, a...);
    return buf;
}

struct Verdict {
    bool pass = true;
    std::vector<std::string> notes;

    void check(bool ok, std::string note) {
        pass = pass && ok;
        notes.push_back((ok ? "ok   " : "MISS ") + note);
    }
};

// Reports cached per (table, kind, strike) so criteria share cells.
class Lab {
public:
    Lab(std::size_t n, std::uint64_t seed) : n_(n), seed_(seed) {}

    enum class Table { Heston, AppendixC, VarSwap };

    const EstimatorReport& get(Table t, K kind, double strike) {
        const auto key = std::make_tuple(t, kind, strike);
        if (auto it = cache_.find(key); it != cache_.end()) return it->second;
        const auto s = setting(t);
        const auto spec = PayoffSpec::make(family(t), strike, s.params);
        const RunOptions opt{false, MdpReduction::Printed};
        EstimatorReport r;
        if (kind == K::Classic) {
            r = run_estimator(kind, spec, s, n_, seed_, std::nullopt, opt);
        } else {
            const double cv = get(t, K::Classic, strike).variance;
            try {
                r = run_estimator(kind, spec, s, n_, seed_, cv, opt);
            } catch (const std::exception& e) {
                r.kind = kind;
                r.strike = strike;
                r.ok = false;
                r.error = e.what();
                r.price = r.std_err = r.var_reduction = r.prob_positive = std::numeric_limits<double>::quiet_NaN();
            }
        }
        return cache_.emplace(key, r).first->second;
    }

    double vr(Table t, K kind, double strike) { return get(t, kind, strike).var_reduction; }

    static BenchSetting setting(Table t) {
        BenchSetting s;
        if (t == Table::AppendixC) s.constant_sigma = 0.25;
        return s;
    }
    static PayoffKind family(Table t) {
        switch (t) {
            case Table::AppendixC: return PayoffKind::ArithmeticAsianCall;
            case Table::VarSwap: return PayoffKind::VolIndicatorSwap;
            default: return PayoffKind::GeometricAsianCall;
        }
    }

    std::size_t n() const { return n_; }
    std::uint64_t seed() const { return seed_; }

private:
    std::size_t n_;
    std::uint64_t seed_;
    std::map<std::tuple<Table, K, double>, EstimatorReport> cache_;
};

using Table = Lab::Table;

const std::vector<K> kMartingaleKinds{K::BS,         K::BS_A,  K::LDPsn,   K::LDPsn_A, K::LDPst,
                                      K::MDPsnLog_A, K::MDPsn, K::MDPsn_A, K::MDPst,   K::MDPlt};

Verdict martingale(Lab& lab) {
    Verdict v;
    const auto s = Lab::setting(Table::Heston);
    for (double k : {40.0, 50.0, 60.0}) {
        const auto spec = PayoffSpec::make(PayoffKind::GeometricAsianCall, k, s.params);
        for (auto kind : kMartingaleKinds) {
            const auto d = build_drift(kind, spec, s);
            const auto z = radon_nikodym_under_p(HestonStepper(s.params, s.grid), s.grid, spec, d.schedule, lab.n(),
                                                 {lab.seed(), 1});
            const auto st = sample_stats(z);
            const double t = (st.mean - 1.0) / st.std_err();
            v.check(std::abs(t) <= 4.0, fmt("K=%g %-10s mean Z %.5f (%+.2f se)", k, std::string(to_string(kind)).c_str(),
                                            st.mean, t));
        }
    }
    return v;
}

Verdict unbiasedness(Lab& lab) {
    Verdict v;
    auto kinds = kMartingaleKinds;
    kinds.insert(kinds.end(), {K::Antithetic, K::BS_A2, K::LDPst_A, K::MDPsnLog, K::MDPst_A});
    for (double k : {40.0, 50.0, 60.0}) {
        const auto& c = lab.get(Table::Heston, K::Classic, k);
        for (auto kind : kinds) {
            const auto& r = lab.get(Table::Heston, kind, k);
            if (!r.ok) {
                v.check(false, fmt("K=%g %s failed: %s", k, std::string(to_string(kind)).c_str(), r.error.c_str()));
                continue;
            }
            const double t = (r.price - c.price) / std::hypot(r.std_err, c.std_err);
            v.check(std::abs(t) <= 4.0, fmt("K=%g %-10s price %.5f vs classic %.5f (%+.2f se)", k,
                                            std::string(to_string(kind)).c_str(), r.price, c.price, t));
        }
    }
    return v;
}

void band(Verdict& v, Lab& lab, Table t, K kind, double k, double lo, double hi, double paper) {
    const double x = lab.vr(t, kind, k);
    const std::string range = std::isinf(hi) ? fmt(">= %g", lo) : fmt("in [%g, %g]", lo, hi);
    v.check(x >= lo && x <= hi, fmt("K=%g %-10s VR %.3g %s (reference %g)", k, std::string(to_string(kind)).c_str(),
                                    x, range.c_str(), paper));
}

constexpr double kInf = std::numeric_limits<double>::infinity();

Verdict table3_bands(Lab& lab) {
    Verdict v;
    band(v, lab, Table::Heston, K::BS, 50, 3.5, 14, 7.1);
    band(v, lab, Table::Heston, K::LDPsn, 50, 3.3, 13, 6.6);
    band(v, lab, Table::Heston, K::MDPsnLog_A, 50, 4, 17, 8.5);
    band(v, lab, Table::Heston, K::Antithetic, 50, 2, 8.5, 4.2);
    band(v, lab, Table::Heston, K::LDPsn, 60, 10, 40, 20);
    band(v, lab, Table::Heston, K::MDPsn_A, 60, 12, 50, 25);
    band(v, lab, Table::Heston, K::LDPsn, 70, 70, kInf, 220);
    band(v, lab, Table::Heston, K::BS, 70, 40, 250, 110);
    for (auto kind : {K::MDPsnLog_A, K::MDPsn_A})
        for (double k : {50.0, 60.0}) {
            const auto& r = lab.get(Table::Heston, kind, k);
            v.notes.push_back(fmt("     K=%g %s drift source %s, closed-form gap %.3g", k,
                                  std::string(to_string(kind)).c_str(), r.drift_source.c_str(), r.oracle_gap));
        }
    return v;
}

Verdict probability_column(Lab& lab) {
    Verdict v;
    for (auto [k, ref] : std::array<std::pair<double, double>, 3>{{{40, 0.9}, {50, 0.52}, {60, 0.096}}}) {
        const auto& r = lab.get(Table::Heston, K::Classic, k);
        v.check(std::abs(r.prob_positive - ref) <= 0.02,
                fmt("K=%g prob_positive %.4f (reference %g +- 0.02, %.4f se)", k, r.prob_positive, ref,
                    std::sqrt(r.prob_positive * (1 - r.prob_positive) / static_cast<double>(lab.n()))));
    }
    return v;
}

Verdict ordering(Lab& lab) {
    Verdict v;
    const double ldp = lab.vr(Table::Heston, K::LDPsn, 65), anti = lab.vr(Table::Heston, K::Antithetic, 65);
    v.check(ldp > 10.0 * anti, fmt("K=65 LDPsn VR %.3g > 10 x Antithetic VR %.3g", ldp, anti));
    for (double k : {30.0, 35.0}) {
        const double a2 = lab.vr(Table::Heston, K::BS_A2, k);
        double best = 0.0;
        std::string who = "none";
        for (auto kind : kAllKinds) {
            if (kind == K::BS_A2 || kind == K::ControlGeometric) continue;
            const double x = lab.vr(Table::Heston, kind, k);
            if (x > best) {
                best = x;
                who = std::string(to_string(kind));
            }
        }
        v.check(a2 > best, fmt("K=%g BS_A2 VR %.4g > best other %s %.4g", k, a2, who.c_str(), best));
    }
    return v;
}

Verdict appendix_c(Lab& lab) {
    Verdict v;
    band(v, lab, Table::AppendixC, K::LDPsn, 50, 4, 18, 8.6);
    band(v, lab, Table::AppendixC, K::Antithetic, 50, 1.9, 7.6, 3.8);
    band(v, lab, Table::AppendixC, K::ControlGeometric, 50, 150, 700, 336);
    band(v, lab, Table::AppendixC, K::LDPsn, 70, 40, kInf, 123);
    const auto& a = lab.get(Table::AppendixC, K::Antithetic, 50);
    v.notes.push_back(fmt("     K=50 Antithetic pair-average variance ratio (without the x2 per-sample factor) %.3g",
                          2.0 * a.var_reduction));
    return v;
}

Verdict varswap(Lab& lab) {
    Verdict v;
    const double sn = lab.vr(Table::VarSwap, K::LDPsn, 10), sna = lab.vr(Table::VarSwap, K::LDPsn_A, 10);
    v.check(sn >= 50, fmt("K=10 LDPsn VR %.3g >= 50 (reference 220)", sn));
    v.check(sn > sna, fmt("K=10 LDPsn VR %.3g > LDPsn_A VR %.3g", sn, sna));
    const double anti = lab.vr(Table::VarSwap, K::Antithetic, 50), ldp = lab.vr(Table::VarSwap, K::LDPsn, 50);
    v.check(anti > ldp, fmt("K=50 Antithetic VR %.3g > LDPsn VR %.3g", anti, ldp));
    return v;
}

Verdict numeric_oracles() {
    Verdict v;
    const HestonParams p;
    const TimeGrid g(252, p.t_end);

    double err = 0.0;
    for (auto mode : {LdpMode::SmallNoise, LdpMode::SmallTime})
        for (double beta : {0.5, 2.0, 10.0})
            for (double a0 : {-1.0, 0.1, 5.0}) {
                const auto r = riccati_solve(beta, a0, WeightPath::european(p.t_end), p, g, mode);
                for (std::size_t i = 0; i <= g.n_steps(); ++i)
                    err = std::max(err, std::abs(r.A[i] - oracle::riccati_constant_alpha(beta, a0, p, mode, g.knot(i))));
            }
    v.check(err <= 1e-6, fmt("riccati RK4 vs separable solution sup error %.2e <= 1e-6", err));

    const auto a = psi_deterministic(p, g), b = oracle::psi_rk4(p, g);
    err = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) err = std::max(err, std::abs(a[i] - b[i]));
    v.check(err <= 1e-10, fmt("psi closed form vs RK4 sup error %.2e <= 1e-10", err));

    const auto m = gamma_moments(p);
    const double shape = 2.0 * p.kappa * p.theta / (p.xi * p.xi), rate = 2.0 * p.kappa / (p.xi * p.xi);
    boost::math::quadrature::tanh_sinh<double> integrator;
    auto density = [&](double y) {
        return std::exp(shape * std::log(rate) + (shape - 1.0) * std::log(y) - rate * y - std::lgamma(shape));
    };
    const double inf = std::numeric_limits<double>::infinity();
    const double esqrt = integrator.integrate([&](double y) { return std::sqrt(y) * density(y); }, 0.0, inf);
    const double ey = integrator.integrate([&](double y) { return y * density(y); }, 0.0, inf);
    err = std::max(std::abs(m.esqrt - esqrt), std::abs(m.ey - ey));
    v.check(err <= 1e-8, fmt("gamma moments vs quadrature error %.2e <= 1e-8", err));

    const auto k = large_time_constants(p);
    const auto mc = large_time_nu_monte_carlo(p, 10000000);
    const double t = (k.nu - mc.value) / mc.std_err;
    v.check(std::abs(t) <= 4.0, fmt("nu %.6f vs 1e7-sample monte carlo %.6f (%+.2f se)", k.nu, mc.value, t));

    double res = 0.0;
    for (double vq : {1e-3, 0.02, 0.3, 1.0, 5.0})
        for (double c : {-10.0, -1.0, 0.0, 0.1, 1.0, 4.0}) res = std::max(res, std::abs(bs_root_residual(vq, c, bs_root(vq, c))));
    const auto spec_grid = TimeGrid(252, p.t_end);
    const auto psi = psi_deterministic(p, spec_grid);
    std::vector<double> sigma(psi.size());
    for (std::size_t i = 0; i < psi.size(); ++i) sigma[i] = std::sqrt(psi[i]);
    for (int strike = 30; strike <= 85; strike += 5) {
        const auto spec = PayoffSpec::make(PayoffKind::GeometricAsianCall, strike, p);
        const auto red = bs_beta(spec, sigma, spec.require_weight(), spec_grid);
        res = std::max(res, std::abs(bs_root_residual(red.v_quad, red.threshold, red.beta_star)));
    }
    v.check(res <= 1e-10, fmt("bs root residual %.2e <= 1e-10 (c in [-10, 4] and every table strike)", res));

    err = 0.0;
    for (double vq : {0.01, 0.1, 1.0, 3.0}) err = std::max(err, std::abs(bs_root(vq, 2.0 * vq - std::log(2.0)) - 2.0));
    v.check(err <= 1e-10, fmt("beta* = 2 substitution error %.2e <= 1e-10", err));
    return v;
}

Verdict oracle_agreement() {
    Verdict v;
    const BenchSetting s;
    for (double k : {50.0, 60.0}) {
        const auto spec = PayoffSpec::make(PayoffKind::GeometricAsianCall, k, s.params);
        for (auto fam : {K::BS, K::LDPsn, K::LDPst, K::MDPsnLog, K::MDPsn, K::MDPst, K::MDPlt}) {
            const auto c = oracle_comparison(fam, spec, s);
            const bool dominance = c.oracle >= c.closed_form - 1e-6;
            const bool gap_ok = !c.authoritative || c.gap <= kOracleTolerance;
            v.check(dominance && gap_ok,
                    fmt("K=%g %-9s closed %.7f oracle %.7f gap %.2e %s", k, std::string(to_string(fam)).c_str(),
                        c.closed_form, c.oracle, c.gap, c.authoritative ? "(gated <= 2e-3)" : "(recorded)"));
        }
    }
    return v;
}

std::string run_cli(const std::string& args) {
    const std::string cmd = std::string("\"") + HESTONIS_CLI_PATH + "\" " + args;
    std::unique_ptr<FILE, int (*)(FILE*)> pipe(popen(cmd.c_str(), "r"), pclose);
    if (!pipe) throw std::runtime_error("cannot start " + cmd);
    std::string out;
    char buf[4096];
    while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe.get())) out.append(buf, n);
    return out;
}

Verdict determinism(Lab& lab) {
    Verdict v;
    const std::string args = fmt("price --kinds Classic,Antithetic,BS,LDPsn_A,MDPsn,MDPlt --strikes 45,60 --paths %zu --seed %llu",
                                 lab.n(), static_cast<unsigned long long>(lab.seed()));
    const auto a = run_cli(args + " --threads 1"), b = run_cli(args + " --threads 1"), c = run_cli(args + " --threads 8");
    const auto rows = static_cast<int>(std::count(a.begin(), a.end(), '\n'));
    v.check(rows == 13, fmt("price emitted %d lines (header + 12 rows)", rows));
    v.check(a == b, "repeated runs byte-identical");
    v.check(a == c, "1 thread vs 8 threads byte-identical");
    return v;
}

}  // namespace

int main(int argc, char** argv) {
    std::size_t n = 100000;
    std::uint64_t seed = 20240607;
    bool strict = false;
    std::set<int> only;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--strict") strict = true;
        else if (a == "--paths" && i + 1 < argc) n = std::stoul(argv[++i]);
        else if (a == "--seed" && i + 1 < argc) seed = std::stoull(argv[++i]);
        else if (a == "--only" && i + 1 < argc) {
            std::stringstream ss(argv[++i]);
            for (std::string t; std::getline(ss, t, ',');) only.insert(std::stoi(t));
        } else {
            std::cerr << "usage: acceptance [--paths N] [--seed S] [--only 1,2,...] [--strict]\n";
            return 2;
        }
    }

    Lab lab(n, seed);
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
        {"martingale suite", [&] { return martingale(lab); }},
        {"unbiasedness suite", [&] { return unbiasedness(lab); }},
        {"variance reduction bands (geometric Asian)", [&] { return table3_bands(lab); }},
        {"classic probability of positive payoff", [&] { return probability_column(lab); }},
        {"rare-event and fully adaptive ordering", [&] { return ordering(lab); }},
        {"constant volatility arithmetic Asian bands", [&] { return appendix_c(lab); }},
        {"volatility indicator swap checks", [&] { return varswap(lab); }},
        {"deterministic numeric oracles", [&] { return numeric_oracles(); }},
        {"oracle agreement", [&] { return oracle_agreement(); }},
        {"byte-identical price CSV", [&] { return determinism(lab); }},
    };

    int hard_failures = 0, known = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i + 1);
        if (!only.empty() && !only.count(id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v.check(false, std::string("error: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        for (const auto& note : v.notes) std::cout << "    " << note << '\n';
        const bool expected = !v.pass && kKnownFailures.count(id);
        std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << id << ": " << criteria[i].first
                  << fmt(" (%.1f s)", secs) << (expected ? " [known failure, see README]" : "") << std::endl;
        if (!v.pass) (expected ? known : hard_failures)++;
    }
    if (strict) hard_failures += known;
    return hard_failures == 0 ? 0 : 1;
}
