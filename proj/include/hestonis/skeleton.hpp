#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "errors.hpp"
#include "model.hpp"
#include "payoff.hpp"

namespace hestonis {

// Deterministic controlled paths on the grid. Controls are per step (left endpoint).
struct SkeletonPath {
    std::vector<double> phi;  // log-price, n+1 knots, phi[0] = 0
    std::vector<double> var;  // variance seen by the log-price, n+1 knots
    bool valid = true;
};

// Log of a payoff on a skeleton path, with a distance-to-positivity for zero payoffs.
struct PathValue {
    double log_value = -std::numeric_limits<double>::infinity();
    double shortfall = 0.0;
};

using SkeletonFn = std::function<SkeletonPath(std::span<const double>, std::span<const double>)>;
using PathPayoffFn = std::function<PathValue(const SkeletonPath&)>;

// psi' = kappa (theta - psi) + xi sqrt(psi) x1, phi' = -psi/2 + sqrt(psi) (rho x1 + rho_bar x2).
// RK4 per step for psi; phi accumulates left-endpoint increments. kappa_on = false is the small-time skeleton.
inline SkeletonFn ldp_skeleton(const HestonParams& p, const TimeGrid& g, bool kappa_on = true) {
    return [p, g, kappa_on](std::span<const double> x1, std::span<const double> x2) {
        const std::size_t n = g.n_steps();
        const double dt = g.dt(), rb = p.rho_bar();
        const double kappa = kappa_on ? p.kappa : 0.0;
        SkeletonPath s;
        s.phi.assign(n + 1, 0.0);
        s.var.assign(n + 1, 0.0);
        s.var[0] = p.v0;
        for (std::size_t i = 0; i < n; ++i) {
            const double psi = s.var[i];
            const double sp = std::sqrt(psi);
            s.phi[i + 1] = s.phi[i] + (-0.5 * psi + sp * (p.rho * x1[i] + rb * x2[i])) * dt;
            auto f = [&](double y) { return kappa * (p.theta - y) + p.xi * std::sqrt(std::max(y, 0.0)) * x1[i]; };
            const double k1 = f(psi), k2 = f(psi + 0.5 * dt * k1), k3 = f(psi + 0.5 * dt * k2), k4 = f(psi + dt * k3);
            const double next = psi + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            if (!(next > 0.0) || !std::isfinite(next)) {
                s.valid = false;
                return s;
            }
            s.var[i + 1] = next;
        }
        return s;
    };
}

// Linearized fluctuations around psi: eta' = -kappa eta + xi sqrt(psi) x1,
// phi' = -psi/2 - eta/2 + sqrt(psi) (rho x1 + rho_bar x2).
inline SkeletonFn mdp_skeleton(const HestonParams& p, const TimeGrid& g, std::vector<double> psi) {
    if (psi.size() != g.n_steps() + 1) throw DomainError("psi length does not match the grid");
    return [p, g, psi = std::move(psi)](std::span<const double> x1, std::span<const double> x2) {
        const std::size_t n = g.n_steps();
        const double dt = g.dt(), rb = p.rho_bar();
        const double decay = std::exp(-p.kappa * dt);
        SkeletonPath s;
        s.phi.assign(n + 1, 0.0);
        s.var.assign(n + 1, 0.0);
        s.var[0] = psi[0];
        double eta = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double sp = std::sqrt(psi[i]);
            s.phi[i + 1] = s.phi[i] + (-0.5 * psi[i] - 0.5 * eta + sp * (p.rho * x1[i] + rb * x2[i])) * dt;
            eta = eta * decay + p.xi * sp * x1[i] * (1.0 - decay) / p.kappa;
            s.var[i + 1] = psi[i + 1] + eta;
        }
        return s;
    };
}

// Deterministic volatility: phi' = -sigma^2/2 + sigma (rho x1 + rho_bar x2).
inline SkeletonFn vol_skeleton(std::vector<double> sigma2, double rho, const TimeGrid& g) {
    if (sigma2.size() != g.n_steps() + 1) throw DomainError("sigma path length does not match the grid");
    return [sigma2 = std::move(sigma2), rho, g](std::span<const double> x1, std::span<const double> x2) {
        const std::size_t n = g.n_steps();
        const double dt = g.dt(), rb = std::sqrt(1.0 - rho * rho);
        SkeletonPath s;
        s.phi.assign(n + 1, 0.0);
        s.var = sigma2;
        for (std::size_t i = 0; i < n; ++i) {
            const double sg = std::sqrt(sigma2[i]);
            s.phi[i + 1] = s.phi[i] + (-0.5 * sigma2[i] + sg * (rho * x1[i] + rb * x2[i])) * dt;
        }
        return s;
    };
}

// Call-type payoffs through y = sum alpha_i dphi_i.
inline PathPayoffFn call_path_payoff(const PayoffSpec& spec, const TimeGrid& g) {
    const auto alpha = spec.require_weight().on_grid(g);
    const double c = spec.threshold();
    return [spec, alpha, c, n = g.n_steps()](const SkeletonPath& s) {
        double y = 0.0;
        for (std::size_t i = 0; i < n; ++i) y += alpha[i] * (s.phi[i + 1] - s.phi[i]);
        PathValue v;
        if (spec.strike > 0.0 && !(y > c)) {
            v.shortfall = c - y;
            return v;
        }
        v.log_value = f_log_and_deriv(spec, y).first;
        return v;
    };
}

inline PathPayoffFn arithmetic_path_payoff(const PayoffSpec& spec, const TimeGrid& g) {
    return [spec, g](const SkeletonPath& s) {
        const std::size_t n = g.n_steps();
        double m = 0.0;
        for (std::size_t i = 1; i <= n; ++i) m += spec.s0 * std::exp(spec.r * g.knot(i) + s.phi[i]);
        m /= static_cast<double>(n);
        PathValue v;
        if (!(m > spec.strike)) {
            v.shortfall = std::log(spec.strike) - std::log(m);
            return v;
        }
        v.log_value = std::log(m - spec.strike);
        return v;
    };
}

inline PathPayoffFn vol_indicator_path_payoff(const PayoffSpec& spec, const TimeGrid& g) {
    return [spec, g](const SkeletonPath& s) {
        const std::size_t n = g.n_steps();
        const double lk = std::log(spec.strike), ls0 = std::log(spec.s0);
        double acc = 0.0, best_gap = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            const double gap = lk - (ls0 + spec.r * g.knot(i) + s.phi[i]);
            if (gap <= 0.0) acc += std::max(s.var[i], 0.0);
            best_gap = std::min(best_gap, std::max(gap, 0.0));
        }
        PathValue v;
        if (!(acc > 0.0)) {
            v.shortfall = best_gap + 1e-12;
            return v;
        }
        v.log_value = std::log(acc * g.dt());
        return v;
    };
}

inline PathPayoffFn path_payoff_for(const PayoffSpec& spec, const TimeGrid& g) {
    switch (spec.kind) {
        case PayoffKind::EuropeanCall:
        case PayoffKind::GeometricAsianCall: return call_path_payoff(spec, g);
        case PayoffKind::ArithmeticAsianCall: return arithmetic_path_payoff(spec, g);
        case PayoffKind::VolIndicatorSwap: return vol_indicator_path_payoff(spec, g);
    }
    throw DomainError("unknown payoff kind");
}

}  // namespace hestonis
