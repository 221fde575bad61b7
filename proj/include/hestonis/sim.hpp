#pragma once

#include <algorithm>
#include <atomic>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <thread>
#include <vector>

#include "drift_schedule.hpp"
#include "errors.hpp"
#include "model.hpp"
#include "payoff.hpp"
#include "rng.hpp"

namespace hestonis {

struct RngSpec {
    std::uint64_t seed = 20240607;
    std::uint32_t stream_offset = 0;
};

// Euler for X, full truncation for V: drift and diffusion read V+ while the
// raw state may go negative.
struct HestonStepper {
    HestonParams p;
    double rho_bar;
    double dt;

    HestonStepper(const HestonParams& params, const TimeGrid& g)
        : p(params), rho_bar(params.rho_bar()), dt(g.dt()) {}

    double v_init() const { return p.v0; }

    // Advances (x, v_raw) given the Brownian increments actually driving the step.
    void step(double& x, double& v_raw, double dw, double dw_perp) const {
        const double v = std::max(v_raw, 0.0);
        const double sv = std::sqrt(v);
        const double next_v = v_raw + p.kappa * (p.theta - v) * dt + p.xi * sv * dw;
        x += -0.5 * v * dt + sv * (p.rho * dw + rho_bar * dw_perp);
        v_raw = next_v;
    }
};

// Deterministic constant volatility (the Black-Scholes setting); X is driven
// through rho W + rho_bar W_perp so the same two-channel drift machinery applies.
struct ConstantVolStepper {
    double sigma;
    double rho;
    double rho_bar;
    double dt;

    ConstantVolStepper(double vol, const TimeGrid& g, double correlation = 0.0)
        : sigma(vol), rho(correlation), rho_bar(std::sqrt(1.0 - correlation * correlation)), dt(g.dt()) {
        if (!(vol > 0.0)) throw DomainError("sigma must be positive");
    }

    double v_init() const { return sigma * sigma; }

    void step(double& x, double& v_raw, double dw, double dw_perp) const {
        x += -0.5 * sigma * sigma * dt + sigma * (rho * dw + rho_bar * dw_perp);
        v_raw = sigma * sigma;
    }
};

struct PathOutcome {
    double payoff = 0.0;
    // log Z^{-1} when the path was simulated under the shifted measure,
    // log Z when simulated under P with a drift attached, 0 otherwise.
    double log_weight = 0.0;
};

struct NoRecord {
    void operator()(std::size_t, double, double, double, double, double) const {}
};

// One path of n steps. `sign` = -1 gives the antithetic mirror of draw `draw_index`.
template <class Stepper, class Recorder = NoRecord>
PathOutcome run_path(const Stepper& model, const TimeGrid& grid, const NormalStream& normals,
                     std::uint64_t draw_index, double sign, const DriftSchedule* drift, bool shifted,
                     PayoffAccumulator* payoff, Recorder&& record = {}) {
    const std::size_t n = grid.n_steps();
    const double dt = grid.dt();
    const double sqdt = std::sqrt(dt);
    double x = 0.0;
    double v_raw = model.v_init();
    double log_w = 0.0;
    if (payoff) payoff->reset();
    for (std::size_t i = 0; i < n; ++i) {
        const auto z = normals.pair(draw_index, static_cast<std::uint32_t>(i));
        const double dwq = sign * z[0] * sqdt;
        const double dwq_perp = sign * z[1] * sqdt;
        double dw = dwq, dw_perp = dwq_perp;
        const double v = std::max(v_raw, 0.0);
        if (drift) {
            const double agg = payoff ? payoff->aggregate() : 0.0;
            const auto m = drift->rates(i, agg, v);
            if (shifted) {
                dw = dwq + m[0] * dt;
                dw_perp = dwq_perp + m[1] * dt;
                log_w += -(m[0] * dwq + m[1] * dwq_perp) - 0.5 * (m[0] * m[0] + m[1] * m[1]) * dt;
            } else {
                log_w += (m[0] * dwq + m[1] * dwq_perp) - 0.5 * (m[0] * m[0] + m[1] * m[1]) * dt;
            }
        }
        const double x_prev = x;
        model.step(x, v_raw, dw, dw_perp);
        if (payoff) payoff->step(i, x_prev, v, x);
        record(i, x, v_raw, dwq, dwq_perp, v);
    }
    return {payoff ? payoff->value() : 0.0, log_w};
}

// Worker count for parallel_chunks; 0 means one per hardware thread.
inline std::atomic<std::size_t>& thread_count_override() {
    static std::atomic<std::size_t> n{0};
    return n;
}

inline std::size_t worker_threads() {
    const std::size_t o = thread_count_override().load();
    return o ? o : std::max(1u, std::thread::hardware_concurrency());
}

// Runs f(begin, end) over fixed-size chunks of [0, n) on worker_threads() threads.
// Chunk boundaries do not depend on the thread count.
template <class F>
void parallel_chunks(std::size_t n, std::size_t chunk, F&& f) {
    const std::size_t n_chunks = (n + chunk - 1) / chunk;
    const std::size_t n_threads = std::max<std::size_t>(1, std::min(worker_threads(), n_chunks));
    if (n_threads <= 1) {
        for (std::size_t c = 0; c < n_chunks; ++c) f(c * chunk, std::min(n, (c + 1) * chunk));
        return;
    }
    std::vector<std::jthread> pool;
    pool.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t)
        pool.emplace_back([&, t] {
            for (std::size_t c = t; c < n_chunks; c += n_threads) f(c * chunk, std::min(n, (c + 1) * chunk));
        });
}

struct SimulationRequest {
    std::size_t n_paths = 0;
    RngSpec rng;
    const DriftSchedule* drift = nullptr;
    bool shifted = true;     // simulate under the drift-shifted measure
    bool antithetic = false; // path 2k+1 mirrors path 2k
};

// Per-path payoff and log-weight for a whole batch, without storing paths.
template <class Stepper>
std::vector<PathOutcome> simulate_outcomes(const Stepper& model, const TimeGrid& grid,
                                           const PayoffSpec& spec, const SimulationRequest& req) {
    if (req.antithetic && req.n_paths % 2 != 0) throw DomainError("antithetic batches need an even path count");
    if (req.drift) req.drift->check(grid);
    std::vector<PathOutcome> out(req.n_paths);
    const NormalStream normals(req.rng.seed, req.rng.stream_offset);
    parallel_chunks(req.n_paths, 2048, [&](std::size_t b, std::size_t e) {
        PayoffAccumulator acc(spec, grid);
        for (std::size_t p = b; p < e; ++p) {
            const std::uint64_t draw = req.antithetic ? p / 2 : p;
            const double sign = (req.antithetic && (p % 2 == 1)) ? -1.0 : 1.0;
            out[p] = run_path(model, grid, normals, draw, sign, req.drift, req.shifted, &acc);
        }
    });
    return out;
}

// Materialized paths, row-major [path][knot] (increments [path][step]).
struct PathBatch {
    std::size_t n_paths = 0;
    TimeGrid grid{1, 1.0};
    RngSpec rng;
    std::vector<double> x, v, v_raw, dw, dw_perp;

    std::size_t cols() const { return grid.n_steps() + 1; }
    double x_at(std::size_t p, std::size_t i) const { return x[p * cols() + i]; }
    double v_at(std::size_t p, std::size_t i) const { return v[p * cols() + i]; }
    double v_raw_at(std::size_t p, std::size_t i) const { return v_raw[p * cols() + i]; }
    double dw_at(std::size_t p, std::size_t i) const { return dw[p * grid.n_steps() + i]; }
    double dw_perp_at(std::size_t p, std::size_t i) const { return dw_perp[p * grid.n_steps() + i]; }
    std::span<const double> x_row(std::size_t p) const { return {x.data() + p * cols(), cols()}; }
    std::span<const double> v_row(std::size_t p) const { return {v.data() + p * cols(), cols()}; }
};

namespace detail {

template <class Stepper>
PathBatch materialize(const Stepper& model, const TimeGrid& grid, std::size_t n_paths, const RngSpec& rng,
                      const DriftSchedule* drift, bool antithetic) {
    if (antithetic && n_paths % 2 != 0) throw DomainError("antithetic batches need an even path count");
    if (drift) drift->check(grid);
    PathBatch b;
    b.n_paths = n_paths;
    b.grid = grid;
    b.rng = rng;
    const std::size_t n = grid.n_steps(), c = n + 1;
    b.x.assign(n_paths * c, 0.0);
    b.v.assign(n_paths * c, 0.0);
    b.v_raw.assign(n_paths * c, 0.0);
    b.dw.assign(n_paths * n, 0.0);
    b.dw_perp.assign(n_paths * n, 0.0);
    const NormalStream normals(rng.seed, rng.stream_offset);
    // Per-step drifts need a running aggregate; a European accumulator (alpha = 1) is the neutral default.
    const PayoffSpec neutral{PayoffKind::GeometricAsianCall, 0.0, 1.0, 0.0, grid.t_end()};
    parallel_chunks(n_paths, 256, [&](std::size_t beg, std::size_t end) {
        PayoffAccumulator acc(neutral, grid);
        for (std::size_t p = beg; p < end; ++p) {
            b.v_raw[p * c] = model.v_init();
            b.v[p * c] = model.v_init();
            const std::uint64_t draw = antithetic ? p / 2 : p;
            const double sign = (antithetic && p % 2 == 1) ? -1.0 : 1.0;
            run_path(model, grid, normals, draw, sign, drift, true, &acc,
                     [&](std::size_t i, double x, double vr, double dwq, double dwp, double) {
                         b.x[p * c + i + 1] = x;
                         b.v_raw[p * c + i + 1] = vr;
                         b.v[p * c + i + 1] = std::max(vr, 0.0);
                         b.dw[p * n + i] = dwq;
                         b.dw_perp[p * n + i] = dwp;
                     });
        }
    });
    return b;
}

}  // namespace detail

inline PathBatch simulate_p(const HestonParams& params, const TimeGrid& grid, std::size_t n_paths,
                            const RngSpec& rng) {
    return detail::materialize(HestonStepper(params, grid), grid, n_paths, rng, nullptr, false);
}

// Paths under the measure shifted by `drift`; the batch keeps the Q-increments.
inline PathBatch simulate_q(const HestonParams& params, const TimeGrid& grid, std::size_t n_paths,
                            const RngSpec& rng, const DriftSchedule& drift) {
    return detail::materialize(HestonStepper(params, grid), grid, n_paths, rng, &drift, false);
}

inline PathBatch antithetic_pairs(const HestonParams& params, const TimeGrid& grid, std::size_t n_paths,
                                  const RngSpec& rng) {
    if (n_paths % 2 != 0) throw DomainError("antithetic_pairs needs an even number of paths");
    return detail::materialize(HestonStepper(params, grid), grid, n_paths, rng, nullptr, true);
}

}  // namespace hestonis
