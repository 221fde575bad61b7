#pragma once

#include <cmath>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "drift_schedule.hpp"
#include "errors.hpp"
#include "model.hpp"
#include "optim.hpp"
#include "payoff.hpp"

namespace hestonis {

enum class LdpMode { SmallNoise, SmallTime };

inline std::string_view to_string(LdpMode m) { return m == LdpMode::SmallNoise ? "small_noise" : "small_time"; }

namespace detail {
inline double ldp_kappa(const HestonParams& p, LdpMode m) { return m == LdpMode::SmallNoise ? p.kappa : 0.0; }
}  // namespace detail

struct RiccatiPath {
    std::vector<double> A;  // on knots
    bool blew_up = false;
};

// A' = -xi A^2/2 + kappa A + xi beta alpha (1/2 - rho_bar^2 beta alpha / 4 - rho kappa / xi)/2 + rho beta alpha'/2,
// kappa = 0 in small-time mode. RK4 with step dt/4.
inline RiccatiPath riccati_solve(double beta, double a0, const WeightPath& alpha, const HestonParams& p,
                                 const TimeGrid& g, LdpMode mode) {
    if (!(beta > 0.0)) throw DomainError("beta must be positive");
    const double k = detail::ldp_kappa(p, mode), xi = p.xi, rho = p.rho;
    const double rb2 = 1.0 - rho * rho;
    auto rhs = [&](double t, double a) {
        const double al = alpha(t);
        return -0.5 * xi * a * a + k * a + 0.5 * xi * beta * al * (0.5 - 0.25 * rb2 * beta * al - rho * k / xi) +
               0.5 * rho * beta * alpha.derivative(t);
    };
    RiccatiPath out;
    out.A.assign(g.n_steps() + 1, 0.0);
    out.A[0] = a0;
    double a = a0;
    const double h = g.dt() / 4.0;
    for (std::size_t i = 0; i < g.n_steps(); ++i) {
        double t = g.knot(i);
        for (int s = 0; s < 4; ++s) {
            const double k1 = rhs(t, a), k2 = rhs(t + 0.5 * h, a + 0.5 * h * k1);
            const double k3 = rhs(t + 0.5 * h, a + 0.5 * h * k2), k4 = rhs(t + h, a + h * k3);
            a += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            t += h;
            if (!(std::abs(a) <= 1e6)) {
                out.blew_up = true;
                for (std::size_t j = i + 1; j <= g.n_steps(); ++j) out.A[j] = std::numeric_limits<double>::infinity();
                return out;
            }
        }
        out.A[i + 1] = a;
    }
    return out;
}

// psi' + (kappa - xi A) psi = kappa theta, psi_0 = v0, by the exponential integrator with
// I piecewise linear between knots (exact for constant A).
inline std::vector<double> psi_from_A(std::span<const double> A, const HestonParams& p, const TimeGrid& g,
                                      LdpMode mode = LdpMode::SmallNoise) {
    if (A.size() != g.n_steps() + 1) throw DomainError("A length does not match the grid");
    const double k = detail::ldp_kappa(p, mode), dt = g.dt();
    std::vector<double> psi(A.size());
    double I = 0.0, J = 0.0;  // I_t = int (k - xi A), J_t = int e^{I_s} ds
    psi[0] = p.v0;
    for (std::size_t i = 0; i < g.n_steps(); ++i) {
        const double dI = 0.5 * dt * ((k - p.xi * A[i]) + (k - p.xi * A[i + 1]));
        const double I_next = I + dI;
        J += dt * std::exp(I) * (std::abs(dI) < 1e-12 ? 1.0 + 0.5 * dI : std::expm1(dI) / dI);
        I = I_next;
        psi[i + 1] = std::exp(-I) * (p.v0 + k * p.theta * J);
        if (!(psi[i + 1] > 0.0) || !std::isfinite(psi[i + 1])) throw NumericalError("psi left (0, inf)");
    }
    return psi;
}

// All paths of one (beta, A0) candidate.
struct LdpCandidate {
    double beta = 0.0, a0 = 0.0;
    std::vector<double> A, psi, U, Z, h1, h2;
    double aggregate = 0.0;  // sum alpha phi' dt
    double penalty = 0.0;
    double objective = -std::numeric_limits<double>::infinity();
    bool valid = false;
};

// U = A sqrt(psi), (Z - rho U)/rho_bar^2 = beta alpha sqrt(psi)/2, phi' = Z sqrt(psi) - psi/2.
inline LdpCandidate ldp_candidate(double beta, double a0, const PayoffSpec& spec, const HestonParams& p,
                                  const TimeGrid& g, LdpMode mode) {
    LdpCandidate c;
    c.beta = beta;
    c.a0 = a0;
    if (!(beta > 0.0)) return c;
    const auto alpha = spec.require_weight();
    auto r = riccati_solve(beta, a0, alpha, p, g, mode);
    if (r.blew_up) return c;
    c.A = std::move(r.A);
    try {
        c.psi = psi_from_A(c.A, p, g, mode);
    } catch (const NumericalError&) {
        return c;
    }
    const std::size_t n = g.n_steps();
    const double rho = p.rho, rb = p.rho_bar(), dt = g.dt();
    c.U.resize(n + 1);
    c.Z.resize(n + 1);
    c.h1.resize(n + 1);
    c.h2.resize(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        const double sp = std::sqrt(c.psi[i]);
        const double al = alpha(g.knot(i));
        c.U[i] = c.A[i] * sp;
        c.h2[i] = 0.5 * rb * beta * al * sp;
        c.Z[i] = rho * c.U[i] + rb * c.h2[i];
        c.h1[i] = c.U[i];
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double sp = std::sqrt(c.psi[i]);
        c.aggregate += alpha(g.knot(i)) * (c.Z[i] * sp - 0.5 * c.psi[i]) * dt;
        c.penalty += 0.5 * (c.h1[i] * c.h1[i] + c.h2[i] * c.h2[i]) * dt;
    }
    const double f = log_payoff(spec, c.aggregate);
    c.valid = std::isfinite(f);
    c.objective = c.valid ? f - c.penalty : -std::numeric_limits<double>::infinity();
    return c;
}

inline double ldp_objective(double beta, double a0, const PayoffSpec& spec, const HestonParams& p,
                            const TimeGrid& g, LdpMode mode) {
    return ldp_candidate(beta, a0, spec, p, g, mode).objective;
}

struct LdpSolution {
    LdpCandidate best;
    LdpMode mode = LdpMode::SmallNoise;
    double first_integral_residual = 0.0;  // sup |(Z - rho U)/rho_bar^2 - beta alpha sqrt(psi)/2|
    double beta_boundary_residual = 0.0;   // beta - 2 F'(y)
    double a_terminal_residual = 0.0;      // A_T + rho F'(y) alpha_T / xi
};

// Nelder-Mead over (A0, log beta) from the 5 x 4 start grid.
inline LdpSolution ldp_optimize(const PayoffSpec& spec, const HestonParams& p, const TimeGrid& g, LdpMode mode) {
    if (!spec.call_type()) throw DomainError("closed-form LDP drift needs a call-type payoff");
    // Finite surrogate: infeasible candidates rank below feasible ones, ordered by payoff shortfall.
    const double c = spec.threshold();
    const Objective f = [&](const std::vector<double>& x) {
        const auto cand = ldp_candidate(std::exp(x[1]), x[0], spec, p, g, mode);
        if (cand.valid) return cand.objective;
        if (cand.A.empty() || cand.psi.empty()) return -1e12;
        return -1e9 - 1e3 * (c - cand.aggregate) - cand.penalty;
    };
    OptimumPoint best;
    for (double a0 : {-2.0, -0.5, 0.0, 0.5, 2.0})
        for (double beta : {0.1, 1.0, 5.0, 20.0}) {
            auto r = nelder_mead_max(f, {a0, std::log(beta)}, {0.25, 0.25}, 600, 1e-15, 1e-11);
            if (r.value > best.value) best = r;
        }
    if (!(best.value > -1e8)) throw OptimError("LDP objective is -inf from every start");
    auto polished = nelder_mead_max(f, best.x, {0.01, 0.01}, 800, 1e-16, 1e-12);
    if (polished.value > best.value) best = polished;
    LdpSolution s;
    s.mode = mode;
    s.best = ldp_candidate(std::exp(best.x[1]), best.x[0], spec, p, g, mode);
    const auto alpha = spec.require_weight();
    const double rb2 = 1.0 - p.rho * p.rho;
    for (std::size_t i = 0; i <= g.n_steps(); ++i) {
        const double fi = (s.best.Z[i] - p.rho * s.best.U[i]) / rb2 -
                          0.5 * s.best.beta * alpha(g.knot(i)) * std::sqrt(s.best.psi[i]);
        s.first_integral_residual = std::max(s.first_integral_residual, std::abs(fi));
    }
    const double fp = f_log_and_deriv(spec, s.best.aggregate).second;
    s.beta_boundary_residual = s.best.beta - 2.0 * fp;
    s.a_terminal_residual = s.best.A.back() + p.rho * fp * alpha(g.t_end()) / p.xi;
    return s;
}

// Deterministic: (U, (Z - rho U)/rho_bar); Adaptive: divided by sqrt(psi).
inline DriftSchedule ldp_schedule(const LdpSolution& s, DriftMode output) {
    if (output == DriftMode::PerStepAdaptive) throw DomainError("LDP drifts are deterministic or adaptive");
    DriftSchedule d;
    d.mode = output;
    d.provenance = std::string("ldp_") + std::string(to_string(s.mode)) +
                   (output == DriftMode::Adaptive ? "_adaptive" : "");
    d.h1 = s.best.h1;
    d.h2 = s.best.h2;
    if (output == DriftMode::Adaptive)
        for (std::size_t i = 0; i < d.h1.size(); ++i) {
            const double sp = std::sqrt(s.best.psi[i]);
            d.h1[i] /= sp;
            d.h2[i] /= sp;
        }
    return d;
}

inline DriftSchedule ldp_drift(const PayoffSpec& spec, const HestonParams& p, const TimeGrid& g, LdpMode mode,
                               DriftMode output) {
    return ldp_schedule(ldp_optimize(spec, p, g, mode), output);
}

inline void write_ldp_csv(std::ostream& os, const LdpSolution& s, const TimeGrid& g) {
    os << "t,A,psi,U,Z,h1,h2\n";
    os.precision(12);
    for (std::size_t i = 0; i <= g.n_steps(); ++i)
        os << g.knot(i) << ',' << s.best.A[i] << ',' << s.best.psi[i] << ',' << s.best.U[i] << ',' << s.best.Z[i]
           << ',' << s.best.h1[i] << ',' << s.best.h2[i] << '\n';
}

}  // namespace hestonis
