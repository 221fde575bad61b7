#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "drift_schedule.hpp"
#include "errors.hpp"
#include "model.hpp"
#include "optim.hpp"
#include "payoff.hpp"

namespace hestonis {

inline constexpr double kBetaLow = 1.0 + 1e-12;
inline constexpr double kBetaHigh = 1e6;

// Unique root on (1, inf) of v b + log(b - 1) - log b - c = 0, solved in s = log(b - 1).
// Throws OptimError if the root exceeds the bracket upper end.
inline double bs_root(double v, double c) {
    if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("v must be positive and finite");
    if (c == -std::numeric_limits<double>::infinity()) return 1.0;
    if (std::isnan(c)) throw DomainError("threshold is NaN");
    auto g = [&](double s) { return v * (1.0 + std::exp(s)) + s - std::log1p(std::exp(s)) - c; };
    auto dg = [&](double s) {
        const double e = std::exp(s);
        return v * e + 1.0 - e / (1.0 + e);
    };
    const double s_hi = std::log(kBetaHigh - 1.0);
    if (g(s_hi) < 0.0) throw OptimError("payoff unreachable within the beta bracket");
    double s_lo = -60.0;
    while (g(s_lo) > 0.0) s_lo *= 2.0;
    // beta ~ c / v when the quadratic term dominates, beta - 1 ~ e^{c - v} deep in the money
    const double guess = c > v + 1.0 ? std::log(c / v - 1.0 + 1e-300) : c - v;
    const double s = newton_bisect(g, dg, s_lo, s_hi, 1e-14, 200, std::clamp(guess, s_lo, s_hi), 1e-13);
    return 1.0 + std::exp(s);
}

inline double bs_root_residual(double v, double c, double beta) {
    return v * beta + std::log(beta - 1.0) - std::log(beta) - c;
}

// Scalar reduction of the deterministic-volatility problem:
// maximize F(beta v_quad - shift) - beta^2 v_quad / 2.
struct BsReduction {
    std::vector<double> sigma;  // on knots
    std::vector<double> alpha;  // on knots
    double v_quad = 0.0;        // sum (alpha sigma)^2 dt
    double drift_shift = 0.0;   // sum alpha sigma^2 dt / 2
    double threshold = 0.0;     // root-equation constant c
    double beta_star = 0.0;
};

// Left-endpoint sums throughout, matching the discrete skeleton.
inline BsReduction bs_beta(const PayoffSpec& spec, std::span<const double> sigma, const WeightPath& alpha,
                           const TimeGrid& grid) {
    if (!spec.call_type()) throw DomainError("bs_beta needs a call-type payoff");
    if (sigma.size() != grid.n_steps() + 1) throw DomainError("sigma length does not match the grid");
    BsReduction r;
    r.sigma.assign(sigma.begin(), sigma.end());
    r.alpha = alpha.on_grid(grid);
    for (std::size_t i = 0; i < grid.n_steps(); ++i) {
        const double as = r.alpha[i] * sigma[i];
        r.v_quad += as * as * grid.dt();
        r.drift_shift += 0.5 * r.alpha[i] * sigma[i] * sigma[i] * grid.dt();
    }
    if (!(r.v_quad > 0.0)) throw DomainError("v_quad must be positive");
    r.threshold = spec.threshold() + r.drift_shift;
    r.beta_star = spec.strike == 0.0 ? 1.0 : bs_root(r.v_quad, r.threshold);
    return r;
}

// Two-channel lift beta alpha sigma (rho, rho_bar); Adaptive divides by sigma.
inline DriftSchedule bs_drift(double beta_star, std::span<const double> sigma, std::span<const double> alpha,
                              double rho, const TimeGrid& grid, DriftMode mode) {
    if (!std::isfinite(beta_star)) throw DomainError("beta_star must be finite");
    if (mode == DriftMode::PerStepAdaptive) throw DomainError("use bs_fully_adaptive for per-step drifts");
    const double rb = std::sqrt(1.0 - rho * rho);
    DriftSchedule d;
    d.mode = mode;
    d.provenance = mode == DriftMode::Adaptive ? "bs_adaptive" : "bs";
    d.h1.resize(grid.n_steps() + 1);
    d.h2.resize(grid.n_steps() + 1);
    for (std::size_t i = 0; i <= grid.n_steps(); ++i) {
        const double m = beta_star * alpha[i] * (mode == DriftMode::Adaptive ? 1.0 : sigma[i]);
        d.h1[i] = rho * m;
        d.h2[i] = rb * m;
    }
    return d;
}

// Re-solve on [t_i, T] with variance frozen at V_i and the payoff argument
// shifted by the running sum of alpha dX. Returns zero drift when unreachable.
class BsFullyAdaptive {
public:
    BsFullyAdaptive(const PayoffSpec& spec, double rho, const TimeGrid& grid)
        : rho_(rho), rho_bar_(std::sqrt(1.0 - rho * rho)), c_(spec.threshold()), strike_zero_(spec.strike == 0.0) {
        if (!spec.call_type()) throw DomainError("fully adaptive BS needs a call-type payoff");
        alpha_ = spec.require_weight().on_grid(grid);
        const std::size_t n = grid.n_steps();
        tail_a2_.assign(n + 1, 0.0);
        tail_a_.assign(n + 1, 0.0);
        for (std::size_t i = n; i-- > 0;) {
            tail_a2_[i] = tail_a2_[i + 1] + alpha_[i] * alpha_[i] * grid.dt();
            tail_a_[i] = tail_a_[i + 1] + alpha_[i] * grid.dt();
        }
    }

    std::array<double, 2> operator()(std::size_t i, double aggregate, double v) const {
        if (!(v > 0.0) || alpha_[i] == 0.0) return {0.0, 0.0};
        const double vq = v * tail_a2_[i];
        if (!(vq > 0.0)) return {0.0, 0.0};
        double beta = 1.0;
        if (!strike_zero_) {
            const double c = c_ - aggregate + 0.5 * v * tail_a_[i];
            try {
                beta = bs_root(vq, c);
            } catch (const OptimError&) {
                return {0.0, 0.0};
            }
        }
        if (!(beta <= kBetaHigh)) return {0.0, 0.0};
        const double m = beta * alpha_[i] * std::sqrt(v);
        return {rho_ * m, rho_bar_ * m};
    }

    double beta_at(std::size_t i, double aggregate, double v) const {
        const double c = c_ - aggregate + 0.5 * v * tail_a_[i];
        return bs_root(v * tail_a2_[i], c);
    }

private:
    double rho_, rho_bar_, c_;
    bool strike_zero_;
    std::vector<double> alpha_, tail_a2_, tail_a_;
};

inline DriftSchedule bs_fully_adaptive(const PayoffSpec& spec, double rho, const TimeGrid& grid) {
    auto gen = std::make_shared<BsFullyAdaptive>(spec, rho, grid);
    return DriftSchedule::per_step([gen](std::size_t i, double agg, double v) { return (*gen)(i, agg, v); },
                                   "bs_fully_adaptive");
}

}  // namespace hestonis
