#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "errors.hpp"
#include "model.hpp"

namespace hestonis {

enum class DriftMode { Deterministic, Adaptive, PerStepAdaptive };

// Per-step generator state for PerStepAdaptive schedules: maps
// (step, running payoff aggregate, current truncated variance) to the step drift.
using StepDriftFn = std::function<std::array<double, 2>(std::size_t step, double aggregate, double v)>;

// Two-channel drift on the grid knots. In Deterministic mode the Brownian
// shift over step i is (h1[i], h2[i]) dt; in Adaptive mode it is scaled by sqrt(V_i).
struct DriftSchedule {
    DriftMode mode = DriftMode::Deterministic;
    std::vector<double> h1;
    std::vector<double> h2;
    std::string provenance;
    std::shared_ptr<const StepDriftFn> generator;

    static DriftSchedule zero(const TimeGrid& g, std::string tag = "zero") {
        return {DriftMode::Deterministic, std::vector<double>(g.n_steps() + 1, 0.0),
                std::vector<double>(g.n_steps() + 1, 0.0), std::move(tag), nullptr};
    }

    static DriftSchedule per_step(StepDriftFn fn, std::string tag) {
        return {DriftMode::PerStepAdaptive, {}, {}, std::move(tag),
                std::make_shared<const StepDriftFn>(std::move(fn))};
    }

    bool is_zero() const {
        if (mode == DriftMode::PerStepAdaptive) return false;
        for (std::size_t i = 0; i < h1.size(); ++i)
            if (h1[i] != 0.0 || h2[i] != 0.0) return false;
        return true;
    }

    void check(const TimeGrid& g) const {
        if (mode == DriftMode::PerStepAdaptive) {
            if (!generator) throw DomainError("per-step schedule without a generator");
            return;
        }
        if (h1.size() != g.n_steps() + 1 || h2.size() != g.n_steps() + 1)
            throw DomainError("drift schedule length does not match the grid");
        for (std::size_t i = 0; i < h1.size(); ++i)
            if (!std::isfinite(h1[i]) || !std::isfinite(h2[i]))
                throw DomainError("drift schedule has non-finite entries");
    }

    // Brownian shift rates (m1, m2) for step i.
    std::array<double, 2> rates(std::size_t i, double aggregate, double v) const {
        switch (mode) {
            case DriftMode::Deterministic: return {h1[i], h2[i]};
            case DriftMode::Adaptive: {
                const double s = std::sqrt(v);
                return {h1[i] * s, h2[i] * s};
            }
            case DriftMode::PerStepAdaptive: return (*generator)(i, aggregate, v);
        }
        return {0.0, 0.0};
    }
};

inline std::string_view to_string(DriftMode m) {
    switch (m) {
        case DriftMode::Deterministic: return "deterministic";
        case DriftMode::Adaptive: return "adaptive";
        case DriftMode::PerStepAdaptive: return "per_step";
    }
    return "?";
}

}  // namespace hestonis
