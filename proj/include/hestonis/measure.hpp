#pragma once

#include <cmath>
#include <vector>

#include "drift_schedule.hpp"
#include "errors.hpp"
#include "model.hpp"
#include "payoff.hpp"
#include "sim.hpp"

namespace hestonis {

struct WeightedSample {
    double payoff = 0.0;
    double log_weight = 0.0;  // log Z^{-1}
    double product = 0.0;
};

// Running aggregate needed by per-step drifts, recomputed from a stored path.
namespace detail {
inline PayoffSpec aggregate_spec(const PathBatch& b) {
    return {PayoffKind::GeometricAsianCall, 0.0, 1.0, 0.0, b.grid.t_end()};
}
}  // namespace detail

// log Z^{-1} per path from the retained Q-increments.
inline std::vector<double> log_inverse_weight(const PathBatch& batch, const DriftSchedule& drift,
                                              const PayoffSpec* aggregate_payoff = nullptr) {
    const TimeGrid& g = batch.grid;
    drift.check(g);
    const std::size_t n = g.n_steps();
    const double dt = g.dt();
    std::vector<double> out(batch.n_paths, 0.0);
    const PayoffSpec agg_spec = aggregate_payoff ? *aggregate_payoff : detail::aggregate_spec(batch);
    PayoffAccumulator acc(agg_spec, g);
    for (std::size_t p = 0; p < batch.n_paths; ++p) {
        acc.reset();
        double lw = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double v = batch.v_at(p, i);
            const auto m = drift.rates(i, acc.aggregate(), v);
            lw += -(m[0] * batch.dw_at(p, i) + m[1] * batch.dw_perp_at(p, i)) -
                  0.5 * (m[0] * m[0] + m[1] * m[1]) * dt;
            acc.step(i, batch.x_at(p, i), v, batch.x_at(p, i + 1));
        }
        out[p] = lw;
    }
    return out;
}

// Payoff of one stored path under `spec`.
inline double path_payoff(const PathBatch& batch, std::size_t p, const PayoffSpec& spec) {
    PayoffAccumulator acc(spec, batch.grid);
    for (std::size_t i = 0; i < batch.grid.n_steps(); ++i)
        acc.step(i, batch.x_at(p, i), batch.v_at(p, i), batch.x_at(p, i + 1));
    return acc.value();
}

inline std::vector<WeightedSample> reweighted_payoffs(const PathBatch& batch, const DriftSchedule& drift,
                                                      const PayoffSpec& spec) {
    if (!(batch.grid == TimeGrid(batch.grid.n_steps(), spec.t_end)))
        throw DomainError("payoff horizon does not match the batch grid");
    const auto lw = log_inverse_weight(batch, drift, &spec);
    std::vector<WeightedSample> out(batch.n_paths);
    for (std::size_t p = 0; p < batch.n_paths; ++p) {
        const double g = path_payoff(batch, p, spec);
        out[p] = {g, lw[p], g == 0.0 ? 0.0 : g * std::exp(lw[p])};
    }
    return out;
}

// Z = dQ/dP along P-paths: the martingale check samples mean(Z) under P.
template <class Stepper>
std::vector<double> radon_nikodym_under_p(const Stepper& model, const TimeGrid& grid, const PayoffSpec& spec,
                                          const DriftSchedule& drift, std::size_t n_paths, const RngSpec& rng) {
    SimulationRequest req;
    req.n_paths = n_paths;
    req.rng = rng;
    req.drift = &drift;
    req.shifted = false;
    const auto outcomes = simulate_outcomes(model, grid, spec, req);
    std::vector<double> z(n_paths);
    for (std::size_t p = 0; p < n_paths; ++p) z[p] = std::exp(outcomes[p].log_weight);
    return z;
}

}  // namespace hestonis
