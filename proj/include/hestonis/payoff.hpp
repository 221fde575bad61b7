#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "model.hpp"

namespace hestonis {

enum class PayoffKind { EuropeanCall, GeometricAsianCall, ArithmeticAsianCall, VolIndicatorSwap };

inline std::string_view to_string(PayoffKind k) {
    switch (k) {
        case PayoffKind::EuropeanCall: return "european";
        case PayoffKind::GeometricAsianCall: return "geometric_asian";
        case PayoffKind::ArithmeticAsianCall: return "arithmetic_asian";
        case PayoffKind::VolIndicatorSwap: return "vol_indicator";
    }
    return "?";
}

inline std::optional<PayoffKind> payoff_kind_from_string(std::string_view s) {
    for (auto k : {PayoffKind::EuropeanCall, PayoffKind::GeometricAsianCall,
                   PayoffKind::ArithmeticAsianCall, PayoffKind::VolIndicatorSwap})
        if (to_string(k) == s) return k;
    return std::nullopt;
}

// Deterministic weight alpha on [0, T]: either constant 1 (European) or (T - t)/T.
class WeightPath {
public:
    enum class Shape { Constant, Decreasing };

    static WeightPath european(double t_end) { return {Shape::Constant, t_end}; }
    static WeightPath geometric_asian(double t_end) { return {Shape::Decreasing, t_end}; }

    double operator()(double t) const {
        return shape_ == Shape::Constant ? 1.0 : (t_end_ - t) / t_end_;
    }
    double derivative(double) const { return shape_ == Shape::Constant ? 0.0 : -1.0 / t_end_; }
    Shape shape() const { return shape_; }
    double t_end() const { return t_end_; }

    // int_a^b alpha^p dt, exact
    double integral(double a, double b, int power = 1) const {
        if (shape_ == Shape::Constant) return b - a;
        const double p1 = power + 1.0;
        return t_end_ / p1 * (std::pow((t_end_ - a) / t_end_, p1) - std::pow((t_end_ - b) / t_end_, p1));
    }

    std::vector<double> on_grid(const TimeGrid& g) const {
        std::vector<double> a(g.n_steps() + 1);
        for (std::size_t i = 0; i <= g.n_steps(); ++i) a[i] = (*this)(g.knot(i));
        return a;
    }

private:
    WeightPath(Shape s, double t_end) : shape_(s), t_end_(t_end) {}
    Shape shape_;
    double t_end_;
};

struct PayoffSpec {
    PayoffKind kind = PayoffKind::GeometricAsianCall;
    double strike = 50.0;
    double s0 = 50.0;
    double r = 0.05;
    double t_end = 1.0;

    static PayoffSpec make(PayoffKind kind, double strike, const HestonParams& p) {
        if (!(strike >= 0.0)) throw DomainError("strike must be nonnegative");
        return {kind, strike, p.s0, p.r, p.t_end};
    }

    bool call_type() const {
        return kind == PayoffKind::EuropeanCall || kind == PayoffKind::GeometricAsianCall;
    }

    std::optional<WeightPath> weight() const {
        if (kind == PayoffKind::EuropeanCall) return WeightPath::european(t_end);
        if (kind == PayoffKind::GeometricAsianCall) return WeightPath::geometric_asian(t_end);
        return std::nullopt;
    }

    // log(s0) + r int alpha: the payoff is (exp(log_forward + y) - K)^+ with y = int alpha dX.
    double log_forward() const {
        const auto w = require_weight();
        return std::log(s0) + r * w.integral(0.0, t_end);
    }

    // log-moneyness threshold c: payoff positive iff y > c.
    double threshold() const {
        if (strike == 0.0) return -std::numeric_limits<double>::infinity();
        return std::log(strike) - log_forward();
    }

    WeightPath require_weight() const {
        auto w = weight();
        if (!w) throw DomainError("payoff has no alpha-weight representation");
        return *w;
    }
};

// (F(y), F'(y)) with F = log G for call-type payoffs aggregated through y = int alpha dX.
inline std::pair<double, double> f_log_and_deriv(const PayoffSpec& spec, double y) {
    if (!spec.call_type()) throw DomainError("log-payoff requires a call-type payoff");
    const double lf = spec.log_forward();
    if (spec.strike == 0.0) return {lf + y, 1.0};
    const double c = spec.threshold();
    if (!(y > c)) throw DomainError("payoff is zero at this aggregate (F = -inf)");
    const double e = std::exp(c - y);
    return {lf + y + std::log1p(-e), -1.0 / std::expm1(c - y)};
}

// F(y) with -inf where the payoff vanishes; never throws for call-type specs.
inline double log_payoff(const PayoffSpec& spec, double y) {
    const double c = spec.threshold();
    if (spec.strike > 0.0 && !(y > c)) return -std::numeric_limits<double>::infinity();
    return f_log_and_deriv(spec, y).first;
}

// Left-endpoint Riemann-Stieltjes sum of alpha against a log-price path.
inline double alpha_sum(const WeightPath& w, const TimeGrid& g, std::span<const double> x) {
    double s = 0.0;
    for (std::size_t i = 0; i < g.n_steps(); ++i) s += w(g.knot(i)) * (x[i + 1] - x[i]);
    return s;
}

// (s0 e^{rT/2} exp(sum alpha dX) - K)^+, x excludes the rate and starts at 0.
inline double eval_geometric_asian(std::span<const double> x_path, const HestonParams& p,
                                   double strike) {
    const TimeGrid g(x_path.size() - 1, p.t_end);
    const auto w = WeightPath::geometric_asian(p.t_end);
    const double y = alpha_sum(w, g, x_path);
    return std::max(p.s0 * std::exp(0.5 * p.r * p.t_end + y) - strike, 0.0);
}

// Same payoff through the average of log-prices at t_1..t_n.
inline double eval_geometric_asian_by_average(std::span<const double> x_path,
                                              const HestonParams& p, double strike) {
    const std::size_t n = x_path.size() - 1;
    double m = 0.0;
    for (std::size_t i = 1; i <= n; ++i) m += x_path[i];
    m /= static_cast<double>(n);
    return std::max(p.s0 * std::exp(0.5 * p.r * p.t_end + m) - strike, 0.0);
}

// (mean_{i=1..n} s0 e^{r t_i + X_i} - K)^+
inline double eval_arithmetic_asian(std::span<const double> x_path, const HestonParams& p,
                                    double strike) {
    const TimeGrid g(x_path.size() - 1, p.t_end);
    double m = 0.0;
    for (std::size_t i = 1; i <= g.n_steps(); ++i)
        m += p.s0 * std::exp(p.r * g.knot(i) + x_path[i]);
    m /= static_cast<double>(g.n_steps());
    return std::max(m - strike, 0.0);
}

inline double eval_european(std::span<const double> x_path, const HestonParams& p, double strike) {
    return std::max(p.s0 * std::exp(p.r * p.t_end + x_path.back()) - strike, 0.0);
}

// sum_i V_{t_i} 1{S_{t_i} >= K} dt over left endpoints.
inline double eval_vol_indicator(std::span<const double> v_path, std::span<const double> s_path,
                                 double strike, const TimeGrid& grid) {
    if (v_path.size() != grid.n_steps() + 1 || s_path.size() != v_path.size())
        throw DomainError("path lengths do not match the grid");
    double acc = 0.0;
    for (std::size_t i = 0; i < grid.n_steps(); ++i)
        if (s_path[i] >= strike) acc += v_path[i];
    return acc * grid.dt();
}

// Streaming evaluator used by the simulation kernel: fed one step at a time.
class PayoffAccumulator {
public:
    PayoffAccumulator(const PayoffSpec& spec, const TimeGrid& grid)
        : spec_(spec), dt_(grid.dt()), n_(grid.n_steps()) {
        if (auto w = spec.weight()) alpha_ = w->on_grid(grid);
        rate_t_.resize(n_ + 1);
        for (std::size_t i = 0; i <= n_; ++i) rate_t_[i] = spec.r * grid.knot(i);
        log_s0_ = std::log(spec.s0);
        log_k_ = spec.strike > 0.0 ? std::log(spec.strike) : -std::numeric_limits<double>::infinity();
    }

    void reset() { acc_ = 0.0; }

    // Step i -> i+1 with left-endpoint state (x_i, v_i) and next log-price x_{i+1}.
    void step(std::size_t i, double x_i, double v_i, double x_next) {
        switch (spec_.kind) {
            case PayoffKind::EuropeanCall:
            case PayoffKind::GeometricAsianCall: acc_ += alpha_[i] * (x_next - x_i); break;
            case PayoffKind::ArithmeticAsianCall: acc_ += std::exp(rate_t_[i + 1] + x_next); break;
            case PayoffKind::VolIndicatorSwap:
                if (log_s0_ + rate_t_[i] + x_i >= log_k_) acc_ += v_i;
                break;
        }
    }

    double aggregate() const { return acc_; }

    double value() const {
        switch (spec_.kind) {
            case PayoffKind::EuropeanCall:
            case PayoffKind::GeometricAsianCall:
                return std::max(std::exp(spec_.log_forward() + acc_) - spec_.strike, 0.0);
            case PayoffKind::ArithmeticAsianCall:
                return std::max(spec_.s0 * acc_ / static_cast<double>(n_) - spec_.strike, 0.0);
            case PayoffKind::VolIndicatorSwap: return acc_ * dt_;
        }
        return 0.0;
    }

    // Faster variant for the hot loop (log_forward cached by the caller).
    double value(double log_forward) const {
        if (spec_.call_type()) return std::max(std::exp(log_forward + acc_) - spec_.strike, 0.0);
        return value();
    }

    double alpha(std::size_t i) const { return alpha_.empty() ? 0.0 : alpha_[i]; }

private:
    PayoffSpec spec_;
    double dt_;
    std::size_t n_;
    std::vector<double> alpha_;
    std::vector<double> rate_t_;
    double log_s0_ = 0.0;
    double log_k_ = 0.0;
    double acc_ = 0.0;
};

}  // namespace hestonis
