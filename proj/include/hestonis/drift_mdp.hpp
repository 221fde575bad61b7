#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "drift_bs.hpp"
#include "drift_schedule.hpp"
#include "errors.hpp"
#include "model.hpp"
#include "optim.hpp"
#include "payoff.hpp"
#include "varopt.hpp"

namespace hestonis {

// Deterministic ingredients of the small-noise moderate-deviation reductions.
struct MdpAuxiliary {
    std::vector<double> psi, B, gamma, u, alpha;  // on knots
    double gamma_T = 0.0;
    double log_shift = 0.0;  // sum alpha psi dt / 2, the deterministic drift of the aggregate
};

// B_t = int f'(psi) = -kappa t, gamma_t = int_0^t e^{B_s} alpha_s ds (Simpson, 16 panels per step),
// u = g(psi) e^{-B} (gamma - gamma_T) / 4.
inline MdpAuxiliary mdp_auxiliary(const HestonParams& p, const TimeGrid& g, const WeightPath& alpha,
                                  std::vector<double> psi = {}) {
    const std::size_t n = g.n_steps();
    MdpAuxiliary a;
    a.psi = psi.empty() ? psi_deterministic(p, g) : std::move(psi);
    if (a.psi.size() != n + 1) throw DomainError("psi length does not match the grid");
    a.alpha = alpha.on_grid(g);
    a.B.resize(n + 1);
    a.gamma.assign(n + 1, 0.0);
    for (std::size_t i = 0; i <= n; ++i) a.B[i] = -p.kappa * g.knot(i);
    const int m = 16;
    auto integrand = [&](double t) { return std::exp(-p.kappa * t) * alpha(t); };
    for (std::size_t i = 0; i < n; ++i) {
        const double t0 = g.knot(i), h = (g.knot(i + 1) - t0) / m;
        double s = integrand(t0) + integrand(t0 + m * h);
        for (int k = 1; k < m; ++k) s += (k % 2 ? 4.0 : 2.0) * integrand(t0 + k * h);
        a.gamma[i + 1] = a.gamma[i] + s * h / 3.0;
    }
    a.gamma_T = a.gamma[n];
    a.u.resize(n + 1);
    for (std::size_t i = 0; i <= n; ++i)
        a.u[i] = 0.25 * p.xi * std::sqrt(a.psi[i]) * std::exp(-a.B[i]) * (a.gamma[i] - a.gamma_T);
    a.u[n] = 0.0;
    for (std::size_t i = 0; i < n; ++i) a.log_shift += 0.5 * a.alpha[i] * a.psi[i] * g.dt();
    return a;
}

namespace detail {
inline double trapezoid(std::span<const double> f, double dt) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < f.size(); ++i) s += 0.5 * (f[i] + f[i + 1]) * dt;
    return s;
}
}  // namespace detail

// Aggregate and penalty of the printed log-price objective at (beta, eta0).
struct MdpLogTerms {
    double aggregate = 0.0;  // argument of Fbar
    double penalty = 0.0;
};

inline MdpLogTerms mdp_log_terms(double beta, double eta0, const HestonParams& p, const TimeGrid& g,
                                 const MdpAuxiliary& aux) {
    const std::size_t n = g.n_steps();
    const double dt = g.dt(), rb2 = 1.0 - p.rho * p.rho;
    std::vector<double> agg(n + 1), pen(n + 1), phi2(n + 1, 0.0);
    auto src = [&](std::size_t i) {
        const double sp = std::sqrt(aux.psi[i]);
        return (aux.u[i] + 0.5 * aux.alpha[i] * sp) * p.xi * sp;
    };
    for (std::size_t i = 0; i < n; ++i) {
        // phi2' = B' phi2 + src, trapezoid in the integrating-factor form
        const double e = std::exp(aux.B[i + 1] - aux.B[i]);
        phi2[i + 1] = e * phi2[i] + 0.5 * dt * (e * src(i) + src(i + 1));
    }
    for (std::size_t i = 0; i <= n; ++i) {
        const double sp = std::sqrt(aux.psi[i]);
        const double phi1 = (aux.u[i] + 0.5 * aux.alpha[i] * sp) * sp;
        agg[i] = aux.alpha[i] * (phi1 - 0.5 * phi2[i]);
        pen[i] = phi2[i] * phi2[i] + 0.25 * rb2 * aux.alpha[i] * aux.alpha[i] * aux.psi[i];
    }
    return {beta * detail::trapezoid(agg, dt) + eta0 * g.t_end() * std::exp(aux.B[n]),
            0.5 * beta * beta * detail::trapezoid(pen, dt)};
}

// Log-price objective in its printed form:
// Fbar(beta int alpha (phi1' - phi2'/2) + eta0 T e^{B_T}) - beta^2/2 int (|phi2'|^2 + rho_bar^2 alpha^2 psi / 4).
inline double mdp_log_objective(double beta, double eta0, const PayoffSpec& spec, const HestonParams& p,
                                const TimeGrid& g, const MdpAuxiliary& aux) {
    const auto t = mdp_log_terms(beta, eta0, p, g, aux);
    return log_payoff(spec, t.aggregate - aux.log_shift) - t.penalty;
}

// Which scalar reduction selects beta. Printed uses the displayed objectives;
// Rederived maximizes the exact objective of the displayed control family.
enum class MdpReduction { Printed, Rederived };

inline std::string_view to_string(MdpReduction r) { return r == MdpReduction::Printed ? "printed" : "rederived"; }

struct MdpSolution {
    double beta = 0.0;
    double eta0 = 0.0;
    std::vector<double> h1, h2, psi;  // deterministic controls on knots and the modulating variance
    std::string tag;
};

inline DriftSchedule mdp_schedule(const MdpSolution& s, DriftMode output) {
    if (output == DriftMode::PerStepAdaptive) throw DomainError("MDP drifts are deterministic or adaptive");
    DriftSchedule d;
    d.mode = output;
    d.provenance = s.tag + (output == DriftMode::Adaptive ? "_adaptive" : "");
    d.h1 = s.h1;
    d.h2 = s.h2;
    if (output == DriftMode::Adaptive)
        for (std::size_t i = 0; i < d.h1.size(); ++i) {
            const double sp = std::sqrt(s.psi[i]);
            d.h1[i] /= sp;
            d.h2[i] /= sp;
        }
    return d;
}

// U = beta (u + rho alpha sqrt(psi) / 2), Z = beta (rho u + alpha sqrt(psi) / 2).
inline MdpSolution mdp_log_solve(const PayoffSpec& spec, const HestonParams& p, const TimeGrid& g,
                                 MdpReduction reduction = MdpReduction::Rederived) {
    if (!spec.call_type()) throw DomainError("closed-form MDP drift needs a call-type payoff");
    const auto aux = mdp_auxiliary(p, g, spec.require_weight());
    const std::size_t n = g.n_steps();
    const double rho = p.rho, rb = p.rho_bar();
    MdpSolution s;
    s.psi = aux.psi;
    s.tag = std::string("mdp_log_") + std::string(to_string(reduction));
    if (reduction == MdpReduction::Printed) {
        // eta0 enters the aggregate without a penalty, so it is held at its start value 0
        const double c = spec.threshold();
        const Objective f = [&](const std::vector<double>& x) {
            const auto t = mdp_log_terms(x[0], 0.0, p, g, aux);
            const double y = t.aggregate - aux.log_shift;
            if (spec.strike > 0.0 && !(y > c)) return -1e9 - 1e3 * (c - y) - t.penalty;
            return log_payoff(spec, y) - t.penalty;
        };
        OptimumPoint best;
        for (double b0 : {0.5, -0.5, 4.0, -4.0}) {
            auto r = nelder_mead_max(f, {b0}, {0.5}, 400, 1e-15, 1e-12);
            if (r.value > best.value) best = r;
        }
        if (!(best.value > -1e8)) throw OptimError("printed MDP log objective is -inf from every start");
        s.beta = best.x[0];
    } else {
        double R = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double sp = std::sqrt(aux.psi[i]);
            const double a1 = rho * aux.alpha[i] * sp + 2.0 * aux.u[i], a2 = rb * aux.alpha[i] * sp;
            R += (a1 * a1 + a2 * a2) * g.dt();
        }
        const double b = spec.strike == 0.0 ? 1.0 : bs_root(R, spec.threshold() + aux.log_shift);
        s.beta = 2.0 * b;
    }
    s.h1.resize(n + 1);
    s.h2.resize(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        const double sp = std::sqrt(aux.psi[i]);
        const double U = s.beta * (aux.u[i] + 0.5 * rho * aux.alpha[i] * sp);
        const double Z = s.beta * (rho * aux.u[i] + 0.5 * aux.alpha[i] * sp);
        s.h1[i] = U;
        s.h2[i] = (Z - rho * U) / rb;
    }
    return s;
}

inline DriftSchedule mdp_log_drift(const PayoffSpec& spec, const HestonParams& p, const TimeGrid& g,
                                   DriftMode output, MdpReduction reduction = MdpReduction::Rederived) {
    return mdp_schedule(mdp_log_solve(spec, p, g, reduction), output);
}

// Price formulation. Printed: U = (1 + rho_bar) beta alpha sqrt(psi) / 2, Z = (rho_bar + rho (rho_bar + 1)) beta alpha sqrt(psi) / 2,
// beta = argmax Fbar(varrho beta int alpha psi / 2) - beta^2 ((rho_bar + 1)^2 + rho_bar^2) int alpha^2 psi^2 / 8.
// Rederived: the exact optimum of the price skeleton, beta alpha sqrt(psi) (rho, rho_bar).
inline MdpSolution mdp_price_solve(const PayoffSpec& spec, const HestonParams& p, const TimeGrid& g,
                                   MdpReduction reduction = MdpReduction::Rederived, std::vector<double> psi = {},
                                   std::string tag = "mdp_price") {
    if (!spec.call_type()) throw DomainError("closed-form MDP drift needs a call-type payoff");
    const std::size_t n = g.n_steps();
    if (psi.empty()) psi = psi_deterministic(p, g);
    if (psi.size() != n + 1) throw DomainError("psi length does not match the grid");
    const auto alpha = spec.require_weight().on_grid(g);
    const double rho = p.rho, rb = p.rho_bar(), dt = g.dt();
    double shift = 0.0;
    for (std::size_t i = 0; i < n; ++i) shift += 0.5 * alpha[i] * psi[i] * dt;
    MdpSolution s;
    s.psi = psi;
    s.tag = tag + "_" + std::string(to_string(reduction));
    s.h1.resize(n + 1);
    s.h2.resize(n + 1);
    if (reduction == MdpReduction::Printed) {
        const double varrho = rb + (rb + 1.0) * (rho + rb);
        double i_ap = 0.0, i_a2p2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            i_ap += alpha[i] * psi[i] * dt;
            i_a2p2 += alpha[i] * alpha[i] * psi[i] * psi[i] * dt;
        }
        const double a = 0.5 * varrho * i_ap;
        const double q = 0.25 * ((rb + 1.0) * (rb + 1.0) + rb * rb) * i_a2p2;
        if (!(q > 0.0) || a == 0.0) throw OptimError("degenerate printed price reduction");
        // stationarity a Fbar'(a beta) = q beta, i.e. the root equation with v = a^2 / q
        const double v = a * a / q;
        const double b = spec.strike == 0.0 ? 1.0 : bs_root(v, spec.threshold() + shift);
        s.beta = v * b / a;
        for (std::size_t i = 0; i <= n; ++i) {
            const double m = 0.5 * s.beta * alpha[i] * std::sqrt(psi[i]);
            const double U = (1.0 + rb) * m, Z = (rb + rho * (rb + 1.0)) * m;
            s.h1[i] = U;
            s.h2[i] = (Z - rho * U) / rb;
        }
    } else {
        std::vector<double> sigma(n + 1);
        for (std::size_t i = 0; i <= n; ++i) sigma[i] = std::sqrt(psi[i]);
        const auto red = bs_beta(spec, sigma, spec.require_weight(), g);
        s.beta = red.beta_star;
        for (std::size_t i = 0; i <= n; ++i) {
            const double m = s.beta * alpha[i] * sigma[i];
            s.h1[i] = rho * m;
            s.h2[i] = rb * m;
        }
    }
    return s;
}

inline DriftSchedule mdp_price_drift(const PayoffSpec& spec, const HestonParams& p, const TimeGrid& g,
                                     DriftMode output, MdpReduction reduction = MdpReduction::Rederived) {
    return mdp_schedule(mdp_price_solve(spec, p, g, reduction), output);
}

// Price formulation with f = 0 and psi = v0.
inline MdpSolution mdp_small_time_solve(const PayoffSpec& spec, const HestonParams& p, const TimeGrid& g,
                                        MdpReduction reduction = MdpReduction::Rederived) {
    return mdp_price_solve(spec, p, g, reduction, std::vector<double>(g.n_steps() + 1, p.v0), "mdp_small_time");
}

inline DriftSchedule mdp_small_time_drift(const PayoffSpec& spec, const HestonParams& p, const TimeGrid& g,
                                          DriftMode output, MdpReduction reduction = MdpReduction::Rederived) {
    return mdp_schedule(mdp_small_time_solve(spec, p, g, reduction), output);
}

// ---- large time ----

struct GammaMoments {
    double ey = 0.0;
    double esqrt = 0.0;
};

// Moments of the Gamma(2 kappa theta / xi^2, rate 2 kappa / xi^2) invariant law.
inline GammaMoments gamma_moments(const HestonParams& p) {
    const double shape = 2.0 * p.kappa * p.theta / (p.xi * p.xi);
    return {p.theta, std::exp(std::lgamma(shape + 0.5) - std::lgamma(shape)) * p.xi / std::sqrt(2.0 * p.kappa)};
}

struct LargeTimeConstants {
    double ey = 0.0, esqrt = 0.0;
    double nu = 0.0;
    std::array<double, 2> bvec{};
};

// nu = (c^2 + rho_bar^2)(E[Y] - E[sqrt Y]^2 / 2), bvec = -(c, rho_bar) E[sqrt Y] / 2, c = rho - xi / (2 kappa).
inline LargeTimeConstants large_time_constants(const HestonParams& p) {
    const auto m = gamma_moments(p);
    const double c = p.rho - p.xi / (2.0 * p.kappa), rb = p.rho_bar();
    LargeTimeConstants k;
    k.ey = m.ey;
    k.esqrt = m.esqrt;
    k.nu = (c * c + rb * rb) * (m.ey - 0.5 * m.esqrt * m.esqrt);
    k.bvec = {-0.5 * c * m.esqrt, -0.5 * rb * m.esqrt};
    if (!(k.nu > 0.0)) throw DomainError("large-time nu must be positive");
    return k;
}

struct MonteCarloEstimate {
    double value = 0.0;
    double std_err = 0.0;
};

// Monte Carlo of the four invariant-law expectations behind nu, combined by the delta method.
inline MonteCarloEstimate large_time_nu_monte_carlo(const HestonParams& p, std::size_t n_samples,
                                                    std::uint64_t seed = 11) {
    const double shape = 2.0 * p.kappa * p.theta / (p.xi * p.xi);
    const double scale = p.xi * p.xi / (2.0 * p.kappa);
    std::mt19937_64 rng(seed);
    std::gamma_distribution<double> gamma(shape, scale);
    const double c = p.rho - p.xi / (2.0 * p.kappa), rb = p.rho_bar();
    std::array<double, 4> mean{};
    std::array<std::array<double, 4>, 4> m2{};
    for (std::size_t k = 0; k < n_samples; ++k) {
        const double y = gamma(rng), sy = std::sqrt(y);
        const double m1 = c * sy;  // rho sqrt(y) + phi'(y) g(y)
        const std::array<double, 4> z{m1 * m1, rb * rb * y, m1, rb * sy};
        for (int a = 0; a < 4; ++a) {
            mean[a] += z[a];
            for (int b = 0; b < 4; ++b) m2[a][b] += z[a] * z[b];
        }
    }
    const double nn = static_cast<double>(n_samples);
    for (auto& v : mean) v /= nn;
    const std::array<double, 4> grad{1.0, 1.0, -mean[2], -mean[3]};
    double var = 0.0;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) var += grad[a] * grad[b] * (m2[a][b] / nn - mean[a] * mean[b]);
    MonteCarloEstimate e;
    e.value = mean[0] + mean[1] - 0.5 * mean[2] * mean[2] - 0.5 * mean[3] * mean[3];
    e.std_err = std::sqrt(std::max(var, 0.0) / nn);
    return e;
}

struct LargeTimeSolution {
    LargeTimeConstants constants;
    double c_star = 0.0;
    double quad_alpha = 0.0;  // sum alpha^2 dt
    std::vector<double> x1;   // c_star alpha on knots
    std::vector<double> h1, h2;
};

// x1 = c alpha with c = argmax Fbar(c int alpha^2) - c^2 int alpha^2 / (4 nu); h = -bvec / nu * x1.
inline LargeTimeSolution mdp_large_time_solve(const PayoffSpec& spec, const HestonParams& p, const TimeGrid& g,
                                              const LargeTimeConstants& k) {
    if (!spec.call_type()) throw DomainError("large-time drift needs a call-type payoff");
    if (!(k.nu > 0.0)) throw DomainError("large-time nu must be positive");
    const auto alpha = spec.require_weight().on_grid(g);
    const auto psi = psi_deterministic(p, g);
    const std::size_t n = g.n_steps();
    LargeTimeSolution s;
    s.constants = k;
    double shift = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        s.quad_alpha += alpha[i] * alpha[i] * g.dt();
        shift += 0.5 * alpha[i] * psi[i] * g.dt();
    }
    // stationarity Fbar'(c I) = c / (2 nu): the root equation with v = 2 nu I
    const double b = spec.strike == 0.0 ? 1.0 : bs_root(2.0 * k.nu * s.quad_alpha, spec.threshold() + shift);
    s.c_star = 2.0 * k.nu * b;
    s.x1.resize(n + 1);
    s.h1.resize(n + 1);
    s.h2.resize(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        s.x1[i] = s.c_star * alpha[i];
        s.h1[i] = -k.bvec[0] / k.nu * s.x1[i];
        s.h2[i] = -k.bvec[1] / k.nu * s.x1[i];
    }
    return s;
}

inline DriftSchedule large_time_schedule(const LargeTimeSolution& s) {
    DriftSchedule d;
    d.mode = DriftMode::Deterministic;
    d.provenance = "mdp_large_time";
    d.h1 = s.h1;
    d.h2 = s.h2;
    return d;
}

inline DriftSchedule mdp_large_time_drift(const PayoffSpec& spec, const HestonParams& p, const TimeGrid& g) {
    return large_time_schedule(mdp_large_time_solve(spec, p, g, large_time_constants(p)));
}

// One-channel oracle: sup Fbar(sum alpha x dt) - sum x^2 dt / (4 nu).
inline VariationalProblem large_time_problem(const PayoffSpec& spec, const HestonParams& p, const TimeGrid& g,
                                             double nu, const BasisOptions& o = {}) {
    VariationalProblem prob;
    prob.grid = g;
    const auto psi = psi_deterministic(p, g);
    prob.skeleton = [psi, g](std::span<const double> x1, std::span<const double>) {
        SkeletonPath s;
        s.phi.assign(g.n_steps() + 1, 0.0);
        s.var = psi;
        for (std::size_t i = 0; i < g.n_steps(); ++i) s.phi[i + 1] = s.phi[i] + (-0.5 * psi[i] + x1[i]) * g.dt();
        return s;
    };
    prob.payoff = path_payoff_for(spec, g);
    prob.penalty = 1.0 / (2.0 * nu);
    BasisOptions one = o;
    one.channel2 = false;
    prob.basis = make_basis(g, spec.require_weight().on_grid(g), one);
    return prob;
}

inline void write_mdp_csv(std::ostream& os, const MdpAuxiliary& aux, const DriftSchedule& d, const TimeGrid& g) {
    os << "t,psi,B,gamma,u,h1,h2\n";
    os.precision(12);
    for (std::size_t i = 0; i <= g.n_steps(); ++i)
        os << g.knot(i) << ',' << aux.psi[i] << ',' << aux.B[i] << ',' << aux.gamma[i] << ',' << aux.u[i] << ','
           << d.h1[i] << ',' << d.h2[i] << '\n';
}

}  // namespace hestonis
