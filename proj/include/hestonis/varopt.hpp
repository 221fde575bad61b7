#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "drift_schedule.hpp"
#include "errors.hpp"
#include "model.hpp"
#include "optim.hpp"
#include "payoff.hpp"
#include "skeleton.hpp"

namespace hestonis {

// Per-channel basis functions sampled on the n steps (left endpoints).
struct Basis {
    std::vector<std::vector<double>> ch1, ch2;

    std::size_t size() const { return ch1.size() + ch2.size(); }

    void expand(std::span<const double> coeffs, std::vector<double>& x1, std::vector<double>& x2,
                std::size_t n) const {
        x1.assign(n, 0.0);
        x2.assign(n, 0.0);
        for (std::size_t k = 0; k < ch1.size(); ++k)
            if (coeffs[k] != 0.0)
                for (std::size_t i = 0; i < n; ++i) x1[i] += coeffs[k] * ch1[k][i];
        for (std::size_t k = 0; k < ch2.size(); ++k) {
            const double c = coeffs[ch1.size() + k];
            if (c != 0.0)
                for (std::size_t i = 0; i < n; ++i) x2[i] += c * ch2[k][i];
        }
    }
};

// Unit-norm (sum f^2 dt = 1) copy of f; zero functions are returned unchanged.
inline std::vector<double> normalized(std::vector<double> f, double dt) {
    double s = 0.0;
    for (double v : f) s += v * v * dt;
    if (s > 0.0)
        for (double& v : f) v /= std::sqrt(s);
    return f;
}

// Piecewise-linear hats on m equally spaced nodes over [0, T], sampled at left endpoints.
inline std::vector<std::vector<double>> hat_functions(const TimeGrid& g, std::size_t m) {
    if (m < 2) throw DomainError("need at least two hat nodes");
    std::vector<std::vector<double>> out(m, std::vector<double>(g.n_steps(), 0.0));
    const double h = g.t_end() / static_cast<double>(m - 1);
    for (std::size_t k = 0; k < m; ++k) {
        const double c = static_cast<double>(k) * h;
        for (std::size_t i = 0; i < g.n_steps(); ++i) out[k][i] = std::max(0.0, 1.0 - std::abs(g.knot(i) - c) / h);
        out[k] = normalized(out[k], g.dt());
    }
    return out;
}

struct BasisOptions {
    std::size_t n_hats = 16;
    bool atoms = true;
    bool channel2 = true;
};

// Atoms {shape, constant, linear} followed by hats, per channel. `shape` is
// typically alpha * sigma on the grid.
inline Basis make_basis(const TimeGrid& g, std::span<const double> shape, const BasisOptions& o = {}) {
    const std::size_t n = g.n_steps();
    std::vector<std::vector<double>> fns;
    if (o.atoms) {
        fns.push_back(normalized(std::vector<double>(shape.begin(), shape.begin() + static_cast<long>(n)), g.dt()));
        fns.push_back(normalized(std::vector<double>(n, 1.0), g.dt()));
        std::vector<double> lin(n);
        for (std::size_t i = 0; i < n; ++i) lin[i] = g.knot(i) / g.t_end();
        fns.push_back(normalized(lin, g.dt()));
    }
    if (o.n_hats > 0) {
        auto hats = hat_functions(g, o.n_hats);
        fns.insert(fns.end(), hats.begin(), hats.end());
    }
    Basis b;
    b.ch1 = fns;
    if (o.channel2) b.ch2 = fns;
    if (b.size() > 64) throw DomainError("basis larger than 64 coefficients");
    return b;
}

// sup over controls of log G(skeleton(x)) - penalty/2 * sum |x|^2 dt.
struct VariationalProblem {
    TimeGrid grid{1, 1.0};
    SkeletonFn skeleton;
    PathPayoffFn payoff;
    double penalty = 1.0;
    Basis basis;

    double quadratic(std::span<const double> x1, std::span<const double> x2) const {
        double q = 0.0;
        for (std::size_t i = 0; i < x1.size(); ++i) q += x1[i] * x1[i] + x2[i] * x2[i];
        return 0.5 * penalty * q * grid.dt();
    }

    // Objective for explicit controls; -inf where the payoff vanishes.
    double objective_controls(std::span<const double> x1, std::span<const double> x2) const {
        const auto s = skeleton(x1, x2);
        if (!s.valid) return -std::numeric_limits<double>::infinity();
        const auto v = payoff(s);
        return v.log_value - quadratic(x1, x2);
    }

    double objective(std::span<const double> coeffs) const {
        std::vector<double> x1, x2;
        basis.expand(coeffs, x1, x2, grid.n_steps());
        return objective_controls(x1, x2);
    }

    // Finite everywhere: infeasible points rank below all feasible ones, ordered by shortfall.
    double search_value(std::span<const double> coeffs) const {
        std::vector<double> x1, x2;
        basis.expand(coeffs, x1, x2, grid.n_steps());
        const auto s = skeleton(x1, x2);
        const double q = quadratic(x1, x2);
        if (!s.valid) return -1e12 - q;
        const auto v = payoff(s);
        if (std::isfinite(v.log_value)) return v.log_value - q;
        return -1e9 - 1e3 * v.shortfall - q;
    }
};

struct VaroptResult {
    std::vector<double> coeffs;
    double value = -std::numeric_limits<double>::infinity();
    std::vector<double> x1, x2;
    std::size_t evaluations = 0;
};

// Nelder-Mead from five deterministic starts (zero, +-shape atom per channel), BFGS polish of the best.
inline VaroptResult solve(const VariationalProblem& prob, std::vector<double> init = {},
                          std::size_t budget = 20000) {
    const std::size_t d = prob.basis.size();
    if (d == 0 || d > 64) throw DomainError("basis size must lie in [1, 64]");
    if (init.empty()) init.assign(d, 0.0);
    if (init.size() != d) throw DomainError("init size does not match the basis");
    const Objective f = [&](const std::vector<double>& c) { return prob.search_value(c); };
    std::vector<std::vector<double>> starts{init};
    const std::size_t a2 = prob.basis.ch1.size();
    for (double sgn : {1.0, -1.0}) {
        auto s = init;
        s[0] += sgn;
        starts.push_back(s);
        if (!prob.basis.ch2.empty()) {
            auto t = init;
            t[a2] += sgn;
            starts.push_back(t);
        } else {
            auto t = init;
            t[0] += 2.0 * sgn;
            starts.push_back(t);
        }
    }
    const std::size_t per_start = std::max<std::size_t>(budget / starts.size(), 10 * d);
    OptimumPoint best;
    std::size_t evals = 0;
    for (const auto& s : starts) {
        auto r = nelder_mead_max(f, s, std::vector<double>(d, 0.5), per_start);
        evals += r.evaluations;
        if (r.value > best.value) best = r;
    }
    if (best.value > -1e8) {
        auto r = bfgs_polish_max(f, best.x);
        evals += r.evaluations;
        if (r.value >= best.value) best.x = r.x, best.value = r.value;
        // second round: a short simplex restart and polish guards against early BFGS stalls
        auto r2 = nelder_mead_max(f, best.x, std::vector<double>(d, 0.05), per_start / 2);
        evals += r2.evaluations;
        auto r3 = bfgs_polish_max(f, r2.value > best.value ? r2.x : best.x);
        evals += r3.evaluations;
        if (r2.value > best.value) best.x = r2.x, best.value = r2.value;
        if (r3.value > best.value) best.x = r3.x, best.value = r3.value;
    }
    VaroptResult out;
    out.coeffs = best.x;
    out.value = prob.objective(best.x);
    out.evaluations = evals;
    if (!std::isfinite(out.value)) throw OptimError("payoff unreachable from every start");
    prob.basis.expand(out.coeffs, out.x1, out.x2, prob.grid.n_steps());
    return out;
}

// True iff no random coordinate perturbation of size `scale` raises the objective by more than 1e-9.
inline bool local_optimality_check(const VariationalProblem& prob, std::span<const double> coeffs,
                                   std::size_t n_probes, double scale, std::uint64_t seed = 7) {
    const double base = prob.objective(coeffs);
    if (!std::isfinite(base)) return false;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, coeffs.size() - 1);
    std::vector<double> c(coeffs.begin(), coeffs.end());
    for (std::size_t k = 0; k < n_probes; ++k) {
        const std::size_t j = pick(rng);
        const double sgn = (rng() & 1u) ? 1.0 : -1.0;
        c[j] += sgn * scale;
        const double v = prob.objective(c);
        c[j] = coeffs[j];
        if (v > base + 1e-9) return false;
    }
    return true;
}

// Least-squares coefficients of (x1, x2) in the basis (normal equations, Cholesky with jitter).
inline std::vector<double> project_onto_basis(const Basis& b, std::span<const double> x1, std::span<const double> x2) {
    std::vector<std::vector<double>> fns;
    std::vector<int> chan;
    for (const auto& f : b.ch1) fns.push_back(f), chan.push_back(1);
    for (const auto& f : b.ch2) fns.push_back(f), chan.push_back(2);
    const std::size_t d = fns.size(), n = x1.size();
    std::vector<double> G(d * d, 0.0), rhs(d, 0.0);
    for (std::size_t a = 0; a < d; ++a) {
        const auto& t = chan[a] == 1 ? x1 : x2;
        for (std::size_t i = 0; i < n; ++i) rhs[a] += fns[a][i] * t[i];
        for (std::size_t c = 0; c < d; ++c)
            if (chan[a] == chan[c])
                for (std::size_t i = 0; i < n; ++i) G[a * d + c] += fns[a][i] * fns[c][i];
    }
    for (std::size_t a = 0; a < d; ++a) G[a * d + a] += 1e-12;
    // Cholesky
    std::vector<double> L(d * d, 0.0);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            double s = G[i * d + j];
            for (std::size_t k = 0; k < j; ++k) s -= L[i * d + k] * L[j * d + k];
            L[i * d + j] = (i == j) ? std::sqrt(std::max(s, 1e-300)) : s / L[j * d + j];
        }
    std::vector<double> y(d), x(d);
    for (std::size_t i = 0; i < d; ++i) {
        double s = rhs[i];
        for (std::size_t k = 0; k < i; ++k) s -= L[i * d + k] * y[k];
        y[i] = s / L[i * d + i];
    }
    for (std::size_t i = d; i-- > 0;) {
        double s = y[i];
        for (std::size_t k = i + 1; k < d; ++k) s -= L[k * d + i] * x[k];
        x[i] = s / L[i * d + i];
    }
    return x;
}

// ---- problem builders ----

inline std::vector<double> alpha_sigma_shape(const PayoffSpec& spec, const TimeGrid& g, std::span<const double> var) {
    const auto w = spec.weight();
    std::vector<double> s(g.n_steps() + 1);
    for (std::size_t i = 0; i <= g.n_steps(); ++i) s[i] = (w ? (*w)(g.knot(i)) : 1.0) * std::sqrt(var[i]);
    return s;
}

// Small-noise (kappa_on) or small-time LDP problem for any payoff kind.
inline VariationalProblem ldp_problem(const PayoffSpec& spec, const HestonParams& p, const TimeGrid& g,
                                      bool small_time = false, const BasisOptions& o = {}) {
    VariationalProblem prob;
    prob.grid = g;
    prob.skeleton = ldp_skeleton(p, g, !small_time);
    prob.payoff = path_payoff_for(spec, g);
    const auto psi = small_time ? std::vector<double>(g.n_steps() + 1, p.v0) : psi_deterministic(p, g);
    prob.basis = make_basis(g, alpha_sigma_shape(spec, g, psi), o);
    return prob;
}

// Small-noise MDP around psi (log-price formulation, linearized fluctuations).
inline VariationalProblem mdp_problem(const PayoffSpec& spec, const HestonParams& p, const TimeGrid& g,
                                      const BasisOptions& o = {}) {
    VariationalProblem prob;
    prob.grid = g;
    const auto psi = psi_deterministic(p, g);
    prob.skeleton = mdp_skeleton(p, g, psi);
    prob.payoff = path_payoff_for(spec, g);
    prob.basis = make_basis(g, alpha_sigma_shape(spec, g, psi), o);
    return prob;
}

// Deterministic volatility sigma^2 on the grid with correlation split rho.
inline VariationalProblem vol_problem(const PayoffSpec& spec, std::vector<double> sigma2, double rho,
                                      const TimeGrid& g, const BasisOptions& o = {}) {
    VariationalProblem prob;
    prob.grid = g;
    prob.basis = make_basis(g, alpha_sigma_shape(spec, g, sigma2), o);
    prob.skeleton = vol_skeleton(std::move(sigma2), rho, g);
    prob.payoff = path_payoff_for(spec, g);
    return prob;
}

// Controls to a drift schedule: Deterministic keeps x, Adaptive divides by sqrt(var) of `var`.
inline DriftSchedule controls_to_drift(std::span<const double> x1, std::span<const double> x2,
                                       std::span<const double> var, DriftMode mode, std::string tag) {
    if (mode == DriftMode::PerStepAdaptive) throw DomainError("controls map to static schedules only");
    const std::size_t n = x1.size();
    DriftSchedule d;
    d.mode = mode;
    d.provenance = std::move(tag);
    d.h1.assign(n + 1, 0.0);
    d.h2.assign(n + 1, 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
        const std::size_t j = std::min(i, n - 1);
        double s = 1.0;
        if (mode == DriftMode::Adaptive) {
            if (!(var[j] > 0.0)) throw NumericalError("adaptive drift needs a positive variance path");
            s = 1.0 / std::sqrt(var[j]);
        }
        d.h1[i] = x1[j] * s;
        d.h2[i] = x2[j] * s;
    }
    return d;
}

}  // namespace hestonis
