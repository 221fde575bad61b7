#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "errors.hpp"

namespace hestonis {

struct HestonParams {
    double kappa = 2.0;   // mean reversion (1/time)
    double theta = 0.09;  // long-run variance
    double xi = 0.2;      // vol-of-vol
    double rho = -0.5;
    double v0 = 0.04;
    double s0 = 50.0;
    double r = 0.05;
    double t_end = 1.0;

    double rho_bar() const { return std::sqrt(1.0 - rho * rho); }
    bool feller() const { return 2.0 * kappa * theta >= xi * xi; }

    friend bool operator==(const HestonParams&, const HestonParams&) = default;
};

struct Validated {
    HestonParams params;
    bool feller = false;  // informational only
};

inline Validated validate(const HestonParams& p) {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw DomainError(std::string(name) + " must be strictly positive");
    };
    positive(p.kappa, "kappa");
    positive(p.theta, "theta");
    positive(p.xi, "xi");
    positive(p.v0, "v0");
    positive(p.s0, "s0");
    positive(p.t_end, "t_end");
    if (!(std::abs(p.rho) < 1.0)) throw DomainError("rho must lie in (-1, 1)");
    if (!std::isfinite(p.r)) throw DomainError("r must be finite");
    return {p, p.feller()};
}

// Uniform grid on [0, t_end].
class TimeGrid {
public:
    TimeGrid(std::size_t n_steps, double t_end) : n_(n_steps), t_end_(t_end) {
        if (n_steps == 0) throw DomainError("n_steps must be positive");
        if (!(t_end > 0.0)) throw DomainError("t_end must be positive");
        dt_ = t_end / static_cast<double>(n_steps);
    }

    std::size_t n_steps() const { return n_; }
    double t_end() const { return t_end_; }
    double dt() const { return dt_; }
    // knot(n) is exactly t_end
    double knot(std::size_t i) const {
        return i == n_ ? t_end_ : static_cast<double>(i) * dt_;
    }
    std::vector<double> knots() const {
        std::vector<double> k(n_ + 1);
        for (std::size_t i = 0; i <= n_; ++i) k[i] = knot(i);
        return k;
    }

    friend bool operator==(const TimeGrid& a, const TimeGrid& b) {
        return a.n_ == b.n_ && a.t_end_ == b.t_end_;
    }

private:
    std::size_t n_;
    double t_end_;
    double dt_;
};

// Generic stochastic-volatility coefficients dV = f(V)dt + g(V)dW.
struct SVCoefficients {
    std::function<double(double)> drift_f;
    std::function<double(double)> diffusion_g;
    std::function<double(double)> drift_f_prime;

    static SVCoefficients heston(const HestonParams& p) {
        return {[k = p.kappa, th = p.theta](double v) { return k * (th - v); },
                [xi = p.xi](double v) { return xi * std::sqrt(std::max(v, 0.0)); },
                [k = p.kappa](double) { return -k; }};
    }

    // g > 0 and nondecreasing on the probe grid.
    bool check_diffusion(double v_max = 1.0, std::size_t probes = 256) const {
        double prev = 0.0;
        for (std::size_t i = 1; i <= probes; ++i) {
            const double v = v_max * static_cast<double>(i) / static_cast<double>(probes);
            const double g = diffusion_g(v);
            if (!(g > 0.0) || g < prev) return false;
            prev = g;
        }
        return true;
    }
};

// Deterministic variance path psi' = f(psi), psi_0 = v0 (closed form for Heston).
inline std::vector<double> psi_deterministic(const HestonParams& p, const TimeGrid& grid) {
    std::vector<double> psi(grid.n_steps() + 1);
    for (std::size_t i = 0; i <= grid.n_steps(); ++i)
        psi[i] = p.theta + (p.v0 - p.theta) * std::exp(-p.kappa * grid.knot(i));
    return psi;
}

// Same ODE for a generic drift, classical RK4 with `substeps` per grid step.
inline std::vector<double> psi_deterministic(const SVCoefficients& c, double v0,
                                             const TimeGrid& grid, std::size_t substeps = 8) {
    std::vector<double> psi(grid.n_steps() + 1);
    psi[0] = v0;
    const double h = grid.dt() / static_cast<double>(substeps);
    double y = v0;
    for (std::size_t i = 0; i < grid.n_steps(); ++i) {
        for (std::size_t s = 0; s < substeps; ++s) {
            const double k1 = c.drift_f(y);
            const double k2 = c.drift_f(y + 0.5 * h * k1);
            const double k3 = c.drift_f(y + 0.5 * h * k2);
            const double k4 = c.drift_f(y + h * k3);
            y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        if (!(y > 0.0)) throw NumericalError("deterministic variance path left (0, inf)");
        psi[i + 1] = y;
    }
    return psi;
}

}  // namespace hestonis
