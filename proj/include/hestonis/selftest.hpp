#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "bench.hpp"
#include "drift_ldp.hpp"
#include "drift_mdp.hpp"
#include "measure.hpp"
#include "model.hpp"
#include "stats.hpp"

namespace hestonis {

namespace oracle {

// Riccati solution for constant alpha = 1 from the separable form: with roots r1, r2 of
// -xi a^2/2 + kappa a + C, (A - r1)/(A - r2) = (A0 - r1)/(A0 - r2) exp(-xi (r1 - r2) t / 2).
// Complex roots are handled by complex arithmetic.
inline double riccati_constant_alpha(double beta, double a0, const HestonParams& p, LdpMode mode, double t) {
    const double k = mode == LdpMode::SmallNoise ? p.kappa : 0.0;
    const double xi = p.xi, rho = p.rho, rb2 = 1.0 - rho * rho;
    const double c = 0.5 * xi * beta * (0.5 - 0.25 * rb2 * beta - rho * k / xi);
    using C = std::complex<double>;
    const C disc = std::sqrt(C(k * k + 2.0 * xi * c, 0.0));
    const C r1 = (k + disc) / xi, r2 = (k - disc) / xi;
    const C ratio = (C(a0) - r1) / (C(a0) - r2) * std::exp(-0.5 * xi * (r1 - r2) * t);
    return ((r1 - ratio * r2) / (C(1.0) - ratio)).real();
}

// Classical RK4 of psi' = kappa (theta - psi) at `substeps` per grid step.
inline std::vector<double> psi_rk4(const HestonParams& p, const TimeGrid& g, int substeps = 8) {
    std::vector<double> out(g.n_steps() + 1);
    double y = p.v0;
    out[0] = y;
    const double h = g.dt() / substeps;
    auto f = [&](double v) { return p.kappa * (p.theta - v); };
    for (std::size_t i = 0; i < g.n_steps(); ++i) {
        for (int s = 0; s < substeps; ++s) {
            const double k1 = f(y), k2 = f(y + 0.5 * h * k1), k3 = f(y + 0.5 * h * k2), k4 = f(y + h * k3);
            y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        out[i + 1] = y;
    }
    return out;
}

}  // namespace oracle

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct SelftestOptions {
    std::size_t n_paths = 10000;
    std::uint64_t seed = 20240607;
    double strike = 50.0;
    double nu_scale = 1.0;  // multiplies the closed-form nu; anything but 1 must fail the nu check
};

namespace detail {

inline std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
    char buf[160];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

}  // namespace detail

// Reduced-size martingale, unbiasedness, oracle-agreement and ODE checks.
inline std::vector<CheckResult> run_selftest(const SelftestOptions& o) {
    using detail::fmt;
    std::vector<CheckResult> out;
    auto run = [&](const std::string& name, const std::function<CheckResult()>& f) {
        try {
            auto r = f();
            r.name = name;
            out.push_back(std::move(r));
        } catch (const std::exception& e) {
            out.push_back({name, false, std::string("error: ") + e.what()});
        }
    };
    const HestonParams p;
    const TimeGrid g(252, p.t_end);
    const BenchSetting setting{p, g, std::nullopt};
    const auto spec = PayoffSpec::make(PayoffKind::GeometricAsianCall, o.strike, p);
    const std::vector<EstimatorKind> kinds{EstimatorKind::BS, EstimatorKind::LDPsn, EstimatorKind::MDPlt};

    for (auto k : kinds)
        run("martingale " + std::string(to_string(k)), [&] {
            const auto d = build_drift(k, spec, setting);
            const auto z = radon_nikodym_under_p(HestonStepper(p, g), g, spec, d.schedule, o.n_paths, {o.seed, 1});
            const auto st = sample_stats(z);
            const double t = (st.mean - 1.0) / st.std_err();
            return CheckResult{{}, std::abs(t) <= 4.0, fmt("mean Z = %.6f, %.2f std errs", st.mean, t)};
        });

    run("unbiasedness", [&] {
        const auto c = run_estimator(EstimatorKind::Classic, spec, setting, o.n_paths, o.seed);
        bool ok = true;
        std::string d;
        for (auto k : kinds) {
            const auto r = run_estimator(k, spec, setting, o.n_paths, o.seed, c.variance);
            const double t = (r.price - c.price) / std::hypot(r.std_err, c.std_err);
            ok = ok && std::abs(t) <= 4.0;
            d += std::string(to_string(k)) + fmt(" %.2f ", t);
        }
        return CheckResult{{}, ok, d + "combined std errs"};
    });

    for (auto k : kinds)
        run("oracle agreement " + std::string(to_string(k)), [&] {
            const auto c = oracle_comparison(k, spec, setting);
            return CheckResult{{}, c.oracle >= c.closed_form - 1e-6 && c.gap <= kOracleTolerance,
                               fmt("closed %.8f oracle %.8f gap %.2e", c.closed_form, c.oracle, c.gap)};
        });

    run("riccati separable", [&] {
        double err = 0.0;
        const auto w = WeightPath::european(p.t_end);
        for (auto mode : {LdpMode::SmallNoise, LdpMode::SmallTime}) {
            const auto r = riccati_solve(2.0, 0.1, w, p, g, mode);
            for (std::size_t i = 0; i <= g.n_steps(); ++i)
                err = std::max(err, std::abs(r.A[i] - oracle::riccati_constant_alpha(2.0, 0.1, p, mode, g.knot(i))));
        }
        return CheckResult{{}, err <= 1e-6, fmt("sup error %.2e", err)};
    });

    run("psi closed form", [&] {
        const auto a = psi_deterministic(p, g), b = oracle::psi_rk4(p, g);
        double err = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) err = std::max(err, std::abs(a[i] - b[i]));
        return CheckResult{{}, err <= 1e-10, fmt("sup error %.2e", err)};
    });

    run("large-time nu", [&] {
        const double nu = large_time_constants(p).nu * o.nu_scale;
        const auto mc = large_time_nu_monte_carlo(p, std::max<std::size_t>(100 * o.n_paths, 1000000));
        const double t = (nu - mc.value) / mc.std_err;
        return CheckResult{{}, std::abs(t) <= 4.0, fmt("nu %.6f, monte carlo %.6f, %.2f std errs", nu, mc.value, t)};
    });
    return out;
}

}  // namespace hestonis
