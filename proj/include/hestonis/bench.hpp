#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "drift_bs.hpp"
#include "drift_ldp.hpp"
#include "drift_mdp.hpp"
#include "drift_schedule.hpp"
#include "errors.hpp"
#include "model.hpp"
#include "payoff.hpp"
#include "sim.hpp"
#include "stats.hpp"
#include "varopt.hpp"

namespace hestonis {

enum class EstimatorKind {
    Classic, Antithetic, ControlGeometric, BS, BS_A, BS_A2, LDPsn, LDPsn_A, LDPst, LDPst_A,
    MDPsnLog, MDPsnLog_A, MDPsn, MDPsn_A, MDPst, MDPst_A, MDPlt
};

inline constexpr std::array<EstimatorKind, 17> kAllKinds{
    EstimatorKind::Classic, EstimatorKind::Antithetic, EstimatorKind::ControlGeometric, EstimatorKind::BS,
    EstimatorKind::BS_A, EstimatorKind::BS_A2, EstimatorKind::LDPsn, EstimatorKind::LDPsn_A, EstimatorKind::LDPst,
    EstimatorKind::LDPst_A, EstimatorKind::MDPsnLog, EstimatorKind::MDPsnLog_A, EstimatorKind::MDPsn,
    EstimatorKind::MDPsn_A, EstimatorKind::MDPst, EstimatorKind::MDPst_A, EstimatorKind::MDPlt};

inline std::string_view to_string(EstimatorKind k) {
    switch (k) {
        case EstimatorKind::Classic: return "Classic";
        case EstimatorKind::Antithetic: return "Antithetic";
        case EstimatorKind::ControlGeometric: return "ControlGeometric";
        case EstimatorKind::BS: return "BS";
        case EstimatorKind::BS_A: return "BS_A";
        case EstimatorKind::BS_A2: return "BS_A2";
        case EstimatorKind::LDPsn: return "LDPsn";
        case EstimatorKind::LDPsn_A: return "LDPsn_A";
        case EstimatorKind::LDPst: return "LDPst";
        case EstimatorKind::LDPst_A: return "LDPst_A";
        case EstimatorKind::MDPsnLog: return "MDPsnLog";
        case EstimatorKind::MDPsnLog_A: return "MDPsnLog_A";
        case EstimatorKind::MDPsn: return "MDPsn";
        case EstimatorKind::MDPsn_A: return "MDPsn_A";
        case EstimatorKind::MDPst: return "MDPst";
        case EstimatorKind::MDPst_A: return "MDPst_A";
        case EstimatorKind::MDPlt: return "MDPlt";
    }
    return "?";
}

inline std::optional<EstimatorKind> estimator_kind_from_string(std::string_view s) {
    for (auto k : kAllKinds)
        if (to_string(k) == s) return k;
    return std::nullopt;
}

inline bool has_drift(EstimatorKind k) {
    return k != EstimatorKind::Classic && k != EstimatorKind::Antithetic && k != EstimatorKind::ControlGeometric;
}

// Model and grid shared by every cell of a table. A constant sigma switches to
// deterministic volatility (X driven by the orthogonal channel only).
struct BenchSetting {
    HestonParams params;
    TimeGrid grid{252, 1.0};
    std::optional<double> constant_sigma;

    bool constant_vol() const { return constant_sigma.has_value(); }

    std::vector<double> variance_path() const {
        if (constant_sigma) return std::vector<double>(grid.n_steps() + 1, *constant_sigma * *constant_sigma);
        return psi_deterministic(params, grid);
    }

    double rho() const { return constant_sigma ? 0.0 : params.rho; }
};

inline constexpr double kOracleTolerance = 2e-3;

// (J_oracle - J_closed) / max(1, |J_oracle|); +inf when the closed form has a zero payoff.
inline double relative_gap(double oracle, double closed) {
    if (!std::isfinite(closed)) return std::numeric_limits<double>::infinity();
    return (oracle - closed) / std::max(1.0, std::abs(oracle));
}

struct DriftBuild {
    DriftSchedule schedule;
    std::string source;  // provenance of the schedule actually used
    double closed_form_objective = std::numeric_limits<double>::quiet_NaN();
    double oracle_objective = std::numeric_limits<double>::quiet_NaN();
    double gap = std::numeric_limits<double>::quiet_NaN();
    bool used_oracle = false;
    std::vector<double> var;  // variance profile for diagnostics
};

namespace detail {

inline std::vector<double> steps_of(std::span<const double> knots) {
    return {knots.begin(), knots.end() - 1};
}

inline DriftMode mode_of(EstimatorKind k) {
    switch (k) {
        case EstimatorKind::BS_A:
        case EstimatorKind::LDPsn_A:
        case EstimatorKind::LDPst_A:
        case EstimatorKind::MDPsnLog_A:
        case EstimatorKind::MDPsn_A:
        case EstimatorKind::MDPst_A: return DriftMode::Adaptive;
        case EstimatorKind::BS_A2: return DriftMode::PerStepAdaptive;
        default: return DriftMode::Deterministic;
    }
}

// Varopt solution turned into a schedule; Adaptive divides by the skeleton's variance.
inline DriftBuild oracle_drift(const VariationalProblem& prob, DriftMode mode, const std::string& tag) {
    const auto r = solve(prob);
    const auto path = prob.skeleton(r.x1, r.x2);
    DriftBuild b;
    b.schedule = controls_to_drift(r.x1, r.x2, path.var, mode, tag);
    b.source = b.schedule.provenance;
    b.oracle_objective = r.value;
    b.used_oracle = true;
    b.var = path.var;
    return b;
}

// Closed form checked against the oracle in the common evaluator; the oracle
// drift replaces it when the gap exceeds the tolerance.
inline DriftBuild arbitrate(const MdpSolution& closed, const VariationalProblem& prob, DriftMode mode,
                            const std::string& oracle_tag) {
    const double jc = prob.objective_controls(steps_of(closed.h1), steps_of(closed.h2));
    DriftBuild b = oracle_drift(prob, mode, oracle_tag);
    b.closed_form_objective = jc;
    b.gap = relative_gap(b.oracle_objective, jc);
    if (std::isfinite(jc) && b.gap <= kOracleTolerance) {
        b.schedule = mdp_schedule(closed, mode);
        b.source = b.schedule.provenance;
        b.used_oracle = false;
        b.var = closed.psi;
    }
    return b;
}

}  // namespace detail

// Drift schedule for one estimator kind. Call-type payoffs under Heston use the
// closed forms; other payoffs and the constant-vol setting go through varopt.
inline DriftBuild build_drift(EstimatorKind kind, const PayoffSpec& spec, const BenchSetting& s,
                              MdpReduction mdp_reduction = MdpReduction::Printed) {
    using K = EstimatorKind;
    if (!has_drift(kind)) throw DomainError(std::string(to_string(kind)) + " has no drift");
    const auto& p = s.params;
    const auto& g = s.grid;
    const DriftMode mode = detail::mode_of(kind);
    const std::string tag = std::string("varopt_") + std::string(to_string(kind));

    if (s.constant_vol()) {
        const auto var = s.variance_path();
        if (kind == K::LDPsn || kind == K::LDPsn_A || kind == K::MDPsn || kind == K::MDPsn_A) {
            if (spec.call_type()) {
                std::vector<double> sigma(var.size(), *s.constant_sigma);
                const auto red = bs_beta(spec, sigma, spec.require_weight(), g);
                DriftBuild b;
                b.schedule = bs_drift(red.beta_star, sigma, red.alpha, 0.0, g, mode);
                b.source = b.schedule.provenance;
                b.var = var;
                return b;
            }
            return detail::oracle_drift(vol_problem(spec, var, 0.0, g), mode, tag);
        }
        if (kind == K::BS || kind == K::BS_A) {
            // geometric surrogate: closed form of the geometric-Asian problem at the same strike
            const auto geo = PayoffSpec{PayoffKind::GeometricAsianCall, spec.strike, spec.s0, spec.r, spec.t_end};
            std::vector<double> sigma(var.size(), *s.constant_sigma);
            const auto red = bs_beta(geo, sigma, geo.require_weight(), g);
            DriftBuild b;
            b.schedule = bs_drift(red.beta_star, sigma, red.alpha, 0.0, g, mode);
            b.source = "bs_geometric_surrogate";
            b.var = var;
            return b;
        }
        throw DomainError(std::string(to_string(kind)) + " is not available with constant volatility");
    }

    if (!spec.call_type()) {
        switch (kind) {
            case K::LDPsn:
            case K::LDPsn_A: return detail::oracle_drift(ldp_problem(spec, p, g, false), mode, tag);
            case K::LDPst:
            case K::LDPst_A: return detail::oracle_drift(ldp_problem(spec, p, g, true), mode, tag);
            case K::MDPsn:
            case K::MDPsn_A:
            case K::MDPsnLog:
            case K::MDPsnLog_A: return detail::oracle_drift(mdp_problem(spec, p, g), mode, tag);
            case K::BS:
            case K::BS_A: return detail::oracle_drift(vol_problem(spec, psi_deterministic(p, g), p.rho, g), mode, tag);
            default:
                throw DomainError(std::string(to_string(kind)) + " needs a call-type payoff");
        }
    }

    DriftBuild b;
    switch (kind) {
        case K::BS:
        case K::BS_A: {
            const auto psi = psi_deterministic(p, g);
            std::vector<double> sigma(psi.size());
            for (std::size_t i = 0; i < psi.size(); ++i) sigma[i] = std::sqrt(psi[i]);
            const auto red = bs_beta(spec, sigma, spec.require_weight(), g);
            b.schedule = bs_drift(red.beta_star, sigma, red.alpha, p.rho, g, mode);
            b.var = psi;
            break;
        }
        case K::BS_A2: b.schedule = bs_fully_adaptive(spec, p.rho, g); break;
        case K::LDPsn:
        case K::LDPsn_A:
        case K::LDPst:
        case K::LDPst_A: {
            const auto sol = ldp_optimize(spec, p, g,
                                          (kind == K::LDPsn || kind == K::LDPsn_A) ? LdpMode::SmallNoise
                                                                                   : LdpMode::SmallTime);
            b.schedule = ldp_schedule(sol, mode);
            b.var = sol.best.psi;
            break;
        }
        case K::MDPsnLog:
        case K::MDPsnLog_A:
            return detail::arbitrate(mdp_log_solve(spec, p, g, mdp_reduction), mdp_problem(spec, p, g), mode, tag);
        case K::MDPsn:
        case K::MDPsn_A:
            return detail::arbitrate(mdp_price_solve(spec, p, g, mdp_reduction),
                                     vol_problem(spec, psi_deterministic(p, g), p.rho, g), mode, tag);
        case K::MDPst:
        case K::MDPst_A:
            return detail::arbitrate(mdp_small_time_solve(spec, p, g, mdp_reduction),
                                     vol_problem(spec, std::vector<double>(g.n_steps() + 1, p.v0), p.rho, g), mode,
                                     tag);
        case K::MDPlt: {
            const auto sol = mdp_large_time_solve(spec, p, g, large_time_constants(p));
            b.schedule = large_time_schedule(sol);
            b.var = psi_deterministic(p, g);
            break;
        }
        default: throw DomainError("unreachable estimator kind");
    }
    b.source = b.schedule.provenance;
    return b;
}

// Closed-form drift of one pipeline scored in the common evaluator against the varopt optimum.
struct OracleComparison {
    EstimatorKind family = EstimatorKind::BS;
    double closed_form = 0.0;
    double oracle = 0.0;
    double gap = 0.0;
    bool authoritative = false;  // closed form expected to match the oracle
};

inline EstimatorKind drift_family(EstimatorKind k) {
    using K = EstimatorKind;
    switch (k) {
        case K::BS_A: return K::BS;
        case K::LDPsn_A: return K::LDPsn;
        case K::LDPst_A: return K::LDPst;
        case K::MDPsnLog_A: return K::MDPsnLog;
        case K::MDPsn_A: return K::MDPsn;
        case K::MDPst_A: return K::MDPst;
        default: return k;
    }
}

inline OracleComparison oracle_comparison(EstimatorKind kind, const PayoffSpec& spec, const BenchSetting& s,
                                          MdpReduction mdp_reduction = MdpReduction::Printed) {
    using K = EstimatorKind;
    if (s.constant_vol() || !spec.call_type())
        throw DomainError("oracle comparison needs a call-type payoff under stochastic volatility");
    const auto& p = s.params;
    const auto& g = s.grid;
    OracleComparison c;
    c.family = drift_family(kind);
    std::optional<VariationalProblem> prob;
    std::vector<double> x1, x2;
    auto take = [&](const DriftSchedule& d) {
        x1 = detail::steps_of(d.h1);
        x2 = detail::steps_of(d.h2);
    };
    switch (c.family) {
        case K::BS: {
            const auto psi = psi_deterministic(p, g);
            std::vector<double> sigma(psi.size());
            for (std::size_t i = 0; i < psi.size(); ++i) sigma[i] = std::sqrt(psi[i]);
            const auto red = bs_beta(spec, sigma, spec.require_weight(), g);
            take(bs_drift(red.beta_star, sigma, red.alpha, p.rho, g, DriftMode::Deterministic));
            prob = vol_problem(spec, psi, p.rho, g);
            c.authoritative = true;
            break;
        }
        case K::LDPsn:
        case K::LDPst: {
            const bool st = c.family == K::LDPst;
            take(ldp_schedule(ldp_optimize(spec, p, g, st ? LdpMode::SmallTime : LdpMode::SmallNoise),
                              DriftMode::Deterministic));
            prob = ldp_problem(spec, p, g, st);
            c.authoritative = true;
            break;
        }
        case K::MDPsnLog: {
            const auto sol = mdp_log_solve(spec, p, g, mdp_reduction);
            x1 = detail::steps_of(sol.h1);
            x2 = detail::steps_of(sol.h2);
            prob = mdp_problem(spec, p, g);
            break;
        }
        case K::MDPsn:
        case K::MDPst: {
            const bool st = c.family == K::MDPst;
            const auto sol = st ? mdp_small_time_solve(spec, p, g, mdp_reduction)
                                : mdp_price_solve(spec, p, g, mdp_reduction);
            x1 = detail::steps_of(sol.h1);
            x2 = detail::steps_of(sol.h2);
            prob = vol_problem(spec, st ? std::vector<double>(g.n_steps() + 1, p.v0) : psi_deterministic(p, g),
                               p.rho, g);
            break;
        }
        case K::MDPlt: {
            const auto k = large_time_constants(p);
            const auto sol = mdp_large_time_solve(spec, p, g, k);
            x1 = detail::steps_of(sol.x1);
            x2.assign(x1.size(), 0.0);
            prob = large_time_problem(spec, p, g, k.nu);
            c.authoritative = true;
            break;
        }
        default: throw DomainError(std::string(to_string(kind)) + " has no closed-form pipeline");
    }
    c.closed_form = prob->objective_controls(x1, x2);
    c.oracle = solve(*prob).value;
    c.gap = relative_gap(c.oracle, c.closed_form);
    return c;
}

struct EstimatorReport {
    EstimatorKind kind = EstimatorKind::Classic;
    double strike = 0.0;
    std::size_t n_paths = 0;
    std::size_t n_steps = 0;
    std::uint64_t seed = 0;
    double price = 0.0;
    double std_err = 0.0;
    double variance = 0.0;
    double var_reduction = 1.0;
    double prob_positive = 0.0;
    double wall_time_s = 0.0;
    double drift_time_s = 0.0;
    std::string drift_source;
    double oracle_gap = std::numeric_limits<double>::quiet_NaN();
    bool ok = true;
    std::string error;
};

// Closed-form price of the discrete geometric average (mean of log-prices at t_1..t_n)
// under constant volatility.
inline double discrete_geometric_price(double s0, double r, double sigma, double t_end, std::size_t n, double strike) {
    const double nn = static_cast<double>(n);
    const double mu = std::log(s0) + (r - 0.5 * sigma * sigma) * t_end * (nn + 1.0) / (2.0 * nn);
    const double s2 = sigma * sigma * t_end * (nn + 1.0) * (2.0 * nn + 1.0) / (6.0 * nn * nn);
    const double s = std::sqrt(s2);
    if (strike <= 0.0) return std::exp(mu + 0.5 * s2) - strike;
    const double d1 = (mu - std::log(strike) + s2) / s, d2 = d1 - s;
    auto Phi = [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); };
    return std::exp(mu + 0.5 * s2) * Phi(d1) - strike * Phi(d2);
}

namespace detail {

template <class F>
double seconds(F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

template <class Stepper>
void simulate_cell(const Stepper& model, EstimatorKind kind, const PayoffSpec& spec, const BenchSetting& s,
                   std::size_t n_paths, const RngSpec& rng, const DriftSchedule* drift, EstimatorReport& rep) {
    const auto& g = s.grid;
    if (kind == EstimatorKind::ControlGeometric) {
        if (!s.constant_vol() || spec.kind != PayoffKind::ArithmeticAsianCall)
            throw DomainError("ControlGeometric needs the constant-volatility arithmetic-Asian setting");
        std::vector<double> a(n_paths), geo(n_paths);
        const NormalStream normals(rng.seed, rng.stream_offset);
        const double ls0 = std::log(spec.s0);
        std::vector<double> rate(g.n_steps() + 1);
        for (std::size_t i = 0; i <= g.n_steps(); ++i) rate[i] = spec.r * g.knot(i);
        parallel_chunks(n_paths, 2048, [&](std::size_t b, std::size_t e) {
            PayoffAccumulator acc(spec, g);
            for (std::size_t p = b; p < e; ++p) {
                double sum_log = 0.0;
                const auto out = run_path(model, g, normals, p, 1.0, nullptr, true, &acc,
                                          [&](std::size_t i, double x, double, double, double, double) {
                                              sum_log += ls0 + rate[i + 1] + x;
                                          });
                a[p] = out.payoff;
                geo[p] = std::max(std::exp(sum_log / static_cast<double>(g.n_steps())) - spec.strike, 0.0);
            }
        });
        const double eg = discrete_geometric_price(spec.s0, spec.r, *s.constant_sigma, g.t_end(), g.n_steps(),
                                                   spec.strike);
        std::vector<double> y(n_paths), pos(n_paths);
        for (std::size_t p = 0; p < n_paths; ++p) {
            y[p] = a[p] - (geo[p] - eg);
            pos[p] = a[p] > 0.0 ? 1.0 : 0.0;
        }
        const auto st = sample_stats(y);
        rep.price = st.mean;
        rep.variance = st.variance;
        rep.std_err = st.std_err();
        rep.prob_positive = sample_stats(pos).mean;
        return;
    }
    SimulationRequest req;
    req.n_paths = n_paths;
    req.rng = rng;
    req.drift = drift;
    req.shifted = true;
    req.antithetic = kind == EstimatorKind::Antithetic;
    const auto out = simulate_outcomes(model, g, spec, req);
    if (req.antithetic) {
        std::vector<double> pairs(n_paths / 2), pos(n_paths);
        for (std::size_t k = 0; k < n_paths / 2; ++k) pairs[k] = 0.5 * (out[2 * k].payoff + out[2 * k + 1].payoff);
        for (std::size_t p = 0; p < n_paths; ++p) pos[p] = out[p].payoff > 0.0 ? 1.0 : 0.0;
        const auto st = sample_stats(pairs);
        rep.price = st.mean;
        rep.variance = 2.0 * st.variance;  // per-path equivalent
        rep.std_err = st.std_err();
        rep.prob_positive = sample_stats(pos).mean;
        return;
    }
    std::vector<double> y(n_paths), pos(n_paths);
    for (std::size_t p = 0; p < n_paths; ++p) {
        const double w = std::exp(out[p].log_weight);
        y[p] = out[p].payoff == 0.0 ? 0.0 : out[p].payoff * w;
        pos[p] = out[p].payoff > 0.0 ? w : 0.0;
    }
    const auto st = sample_stats(y);
    rep.price = st.mean;
    rep.variance = st.variance;
    rep.std_err = st.std_err();
    rep.prob_positive = sample_stats(pos).mean;
}

}  // namespace detail

struct RunOptions {
    bool record_timing = true;
    MdpReduction mdp_reduction = MdpReduction::Printed;
};

// One cell. var_reduction is filled against `classic_variance` when given,
// otherwise a paired Classic run is made with the same seed.
inline EstimatorReport run_estimator(EstimatorKind kind, const PayoffSpec& spec, const BenchSetting& s,
                                     std::size_t n_paths, std::uint64_t seed,
                                     std::optional<double> classic_variance = std::nullopt,
                                     const RunOptions& opt = {}) {
    if (n_paths < 2) throw DomainError("need at least two paths");
    if (kind == EstimatorKind::Antithetic && n_paths % 2 != 0) throw DomainError("antithetic needs an even path count");
    EstimatorReport rep;
    rep.kind = kind;
    rep.strike = spec.strike;
    rep.n_paths = n_paths;
    rep.n_steps = s.grid.n_steps();
    rep.seed = seed;
    const RngSpec rng{seed, 0};
    DriftBuild build;
    if (has_drift(kind)) {
        try {
            rep.drift_time_s = detail::seconds([&] { build = build_drift(kind, spec, s, opt.mdp_reduction); });
        } catch (const OptimError& e) {
            throw OptimError(std::string(to_string(kind)) + " at K=" + std::to_string(spec.strike) + ": " + e.what());
        }
        rep.drift_source = build.source;
        rep.oracle_gap = build.gap;
    }
    const DriftSchedule* drift = has_drift(kind) ? &build.schedule : nullptr;
    rep.wall_time_s = detail::seconds([&] {
        if (s.constant_vol())
            detail::simulate_cell(ConstantVolStepper(*s.constant_sigma, s.grid, 0.0), kind, spec, s, n_paths, rng,
                                  drift, rep);
        else
            detail::simulate_cell(HestonStepper(s.params, s.grid), kind, spec, s, n_paths, rng, drift, rep);
    });
    if (kind == EstimatorKind::Classic) {
        rep.var_reduction = 1.0;
    } else {
        double cv = 0.0;
        if (classic_variance) cv = *classic_variance;
        else cv = run_estimator(EstimatorKind::Classic, spec, s, n_paths, seed, std::nullopt, opt).variance;
        rep.var_reduction = rep.variance > 0.0 ? cv / rep.variance : std::numeric_limits<double>::infinity();
    }
    if (!opt.record_timing) rep.wall_time_s = rep.drift_time_s = 0.0;
    return rep;
}

// Rows sorted by strike, kinds in the requested order; per-cell failures are kept inline.
inline std::vector<EstimatorReport> run_table(PayoffKind family, std::vector<double> strikes,
                                              const std::vector<EstimatorKind>& kinds, const BenchSetting& s,
                                              std::size_t n_paths, std::uint64_t seed, const RunOptions& opt = {}) {
    std::vector<EstimatorReport> rows;
    if (kinds.empty()) return rows;
    std::stable_sort(strikes.begin(), strikes.end());
    for (double k : strikes) {
        const auto spec = PayoffSpec::make(family, k, s.params);
        std::optional<double> cv;
        EstimatorReport classic;
        try {
            classic = run_estimator(EstimatorKind::Classic, spec, s, n_paths, seed, std::nullopt, opt);
            cv = classic.variance;
        } catch (const std::exception&) {
        }
        for (auto kind : kinds) {
            if (kind == EstimatorKind::Classic && cv) {
                rows.push_back(classic);
                continue;
            }
            try {
                rows.push_back(run_estimator(kind, spec, s, n_paths, seed, cv, opt));
            } catch (const std::exception& e) {
                EstimatorReport bad;
                bad.kind = kind;
                bad.strike = k;
                bad.n_paths = n_paths;
                bad.n_steps = s.grid.n_steps();
                bad.seed = seed;
                bad.ok = false;
                bad.error = e.what();
                bad.price = bad.std_err = bad.variance = bad.var_reduction = bad.prob_positive =
                    std::numeric_limits<double>::quiet_NaN();
                rows.push_back(bad);
            }
        }
    }
    return rows;
}

inline constexpr std::string_view kCsvHeader =
    "kind,strike,n_paths,n_steps,seed,price,std_err,variance,var_reduction,prob_positive,wall_time_s,drift_time_s";

inline std::string csv_row(const EstimatorReport& r) {
    char buf[512];
    std::snprintf(buf, sizeof buf, "%s,%.10g,%zu,%zu,%llu,%.10g,%.10g,%.10g,%.10g,%.10g,%.6f,%.6f",
                  std::string(to_string(r.kind)).c_str(), r.strike, r.n_paths, r.n_steps,
                  static_cast<unsigned long long>(r.seed), r.price, r.std_err, r.variance, r.var_reduction,
                  r.prob_positive, r.wall_time_s, r.drift_time_s);
    return buf;
}

inline void write_csv(std::ostream& os, const std::vector<EstimatorReport>& rows) {
    os << kCsvHeader << '\n';
    for (const auto& r : rows) os << csv_row(r) << '\n';
}

// Named experiment families.
struct Preset {
    PayoffKind family;
    std::vector<double> strikes;
    std::vector<EstimatorKind> kinds;
    std::optional<double> constant_sigma;
};

inline Preset preset_table3() {
    std::vector<double> strikes;
    for (int k = 30; k <= 85; k += 5) strikes.push_back(k);
    std::vector<EstimatorKind> kinds;
    for (auto k : kAllKinds)
        if (k != EstimatorKind::ControlGeometric) kinds.push_back(k);
    return {PayoffKind::GeometricAsianCall, strikes, kinds, std::nullopt};
}

inline Preset preset_appendix_c() {
    return {PayoffKind::ArithmeticAsianCall,
            {30, 35, 40, 45, 50, 60, 70, 80},
            {EstimatorKind::Classic, EstimatorKind::Antithetic, EstimatorKind::ControlGeometric, EstimatorKind::LDPsn},
            0.25};
}

inline Preset preset_varswap() {
    return {PayoffKind::VolIndicatorSwap,
            {10, 20, 30, 40, 45, 50, 55, 60, 70, 80, 90, 100},
            {EstimatorKind::Classic, EstimatorKind::LDPsn, EstimatorKind::LDPsn_A, EstimatorKind::MDPsn,
             EstimatorKind::MDPsn_A, EstimatorKind::BS, EstimatorKind::BS_A, EstimatorKind::Antithetic},
            std::nullopt};
}

inline std::optional<Preset> preset_from_string(std::string_view s) {
    if (s == "table3") return preset_table3();
    if (s == "appendixC") return preset_appendix_c();
    if (s == "varswap") return preset_varswap();
    return std::nullopt;
}

}  // namespace hestonis
