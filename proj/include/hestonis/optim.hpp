#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

namespace hestonis {

using Objective = std::function<double(const std::vector<double>&)>;

struct OptimumPoint {
    std::vector<double> x;
    double value = -std::numeric_limits<double>::infinity();
    std::size_t evaluations = 0;
};

// Nelder-Mead maximization with dimension-adaptive coefficients.
// -inf values are ranked below every finite value.
inline OptimumPoint nelder_mead_max(const Objective& f, std::vector<double> x0, std::vector<double> step,
                                    std::size_t max_evals, double ftol = 1e-13, double xtol = 1e-10) {
    const std::size_t d = x0.size();
    OptimumPoint out;
    if (d == 0) {
        out.x = x0;
        out.value = f(x0);
        out.evaluations = 1;
        return out;
    }
    const double dd = static_cast<double>(d);
    const double a_r = 1.0, a_e = 1.0 + 2.0 / dd, a_c = 0.75 - 0.5 / dd, a_s = 1.0 - 1.0 / dd;
    std::vector<std::vector<double>> pts(d + 1, x0);
    std::vector<double> val(d + 1);
    std::size_t evals = 0;
    auto eval = [&](const std::vector<double>& x) {
        ++evals;
        const double v = f(x);
        return std::isnan(v) ? -std::numeric_limits<double>::infinity() : v;
    };
    for (std::size_t k = 0; k < d; ++k) pts[k + 1][k] += step[k];
    for (std::size_t k = 0; k <= d; ++k) val[k] = eval(pts[k]);
    std::vector<std::size_t> idx(d + 1);
    std::vector<double> centroid(d), trial(d), trial2(d);
    while (evals < max_evals) {
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return val[a] > val[b]; });
        const std::size_t best = idx[0], worst = idx[d], second = idx[d - 1];
        double size = 0.0;
        for (std::size_t k = 1; k <= d; ++k)
            for (std::size_t j = 0; j < d; ++j) size = std::max(size, std::abs(pts[idx[k]][j] - pts[best][j]));
        if (std::isfinite(val[best]) && std::isfinite(val[worst]) && val[best] - val[worst] <= ftol && size <= xtol)
            break;
        if (size <= 1e-14) break;
        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t k = 0; k < d; ++k)
            for (std::size_t j = 0; j < d; ++j) centroid[j] += pts[idx[k]][j] / dd;
        for (std::size_t j = 0; j < d; ++j) trial[j] = centroid[j] + a_r * (centroid[j] - pts[worst][j]);
        const double fr = eval(trial);
        if (fr > val[best]) {
            for (std::size_t j = 0; j < d; ++j) trial2[j] = centroid[j] + a_e * (trial[j] - centroid[j]);
            const double fe = eval(trial2);
            if (fe > fr) {
                pts[worst] = trial2;
                val[worst] = fe;
            } else {
                pts[worst] = trial;
                val[worst] = fr;
            }
            continue;
        }
        if (fr > val[second]) {
            pts[worst] = trial;
            val[worst] = fr;
            continue;
        }
        const bool outside = fr > val[worst];
        for (std::size_t j = 0; j < d; ++j)
            trial2[j] = outside ? centroid[j] + a_c * (trial[j] - centroid[j])
                                : centroid[j] - a_c * (centroid[j] - pts[worst][j]);
        const double fc = eval(trial2);
        if (fc > (outside ? fr : val[worst])) {
            pts[worst] = trial2;
            val[worst] = fc;
            continue;
        }
        for (std::size_t k = 1; k <= d; ++k) {
            auto& p = pts[idx[k]];
            for (std::size_t j = 0; j < d; ++j) p[j] = pts[best][j] + a_s * (p[j] - pts[best][j]);
            val[idx[k]] = eval(p);
        }
    }
    const std::size_t best = static_cast<std::size_t>(std::max_element(val.begin(), val.end()) - val.begin());
    out.x = pts[best];
    out.value = val[best];
    out.evaluations = evals;
    return out;
}

// BFGS maximization with central finite-difference gradients and backtracking line search.
// Intended as a polish step from a finite starting value.
inline OptimumPoint bfgs_polish_max(const Objective& f, std::vector<double> x, std::size_t max_iter = 200,
                                    double fd_step = 1e-5, double gtol = 1e-9) {
    const std::size_t d = x.size();
    OptimumPoint out;
    std::size_t evals = 0;
    auto eval = [&](const std::vector<double>& y) {
        ++evals;
        return f(y);
    };
    double fx = eval(x);
    out.x = x;
    out.value = fx;
    if (!std::isfinite(fx) || d == 0) {
        out.evaluations = evals;
        return out;
    }
    auto gradient = [&](const std::vector<double>& y, std::vector<double>& g) {
        std::vector<double> t = y;
        for (std::size_t j = 0; j < d; ++j) {
            const double h = fd_step * std::max(1.0, std::abs(y[j]));
            t[j] = y[j] + h;
            const double fp = eval(t);
            t[j] = y[j] - h;
            const double fm = eval(t);
            t[j] = y[j];
            if (!std::isfinite(fp) || !std::isfinite(fm)) return false;
            g[j] = (fp - fm) / (2.0 * h);
        }
        return true;
    };
    std::vector<double> g(d), g_new(d), dir(d), s(d), yv(d), x_new(d);
    std::vector<double> H(d * d, 0.0);  // inverse Hessian of -f
    for (std::size_t j = 0; j < d; ++j) H[j * d + j] = 1.0;
    if (!gradient(x, g)) {
        out.evaluations = evals;
        return out;
    }
    for (std::size_t it = 0; it < max_iter; ++it) {
        double gnorm = 0.0;
        for (double v : g) gnorm = std::max(gnorm, std::abs(v));
        if (gnorm < gtol) break;
        // ascent direction H g
        double slope = 0.0;
        for (std::size_t a = 0; a < d; ++a) {
            double acc = 0.0;
            for (std::size_t b = 0; b < d; ++b) acc += H[a * d + b] * g[b];
            dir[a] = acc;
            slope += acc * g[a];
        }
        if (!(slope > 0.0)) {
            std::fill(H.begin(), H.end(), 0.0);
            for (std::size_t j = 0; j < d; ++j) H[j * d + j] = 1.0;
            dir = g;
            slope = 0.0;
            for (double v : g) slope += v * v;
        }
        double t = 1.0, f_new = -std::numeric_limits<double>::infinity();
        bool accepted = false;
        for (int ls = 0; ls < 40; ++ls) {
            for (std::size_t j = 0; j < d; ++j) x_new[j] = x[j] + t * dir[j];
            f_new = eval(x_new);
            if (std::isfinite(f_new) && f_new >= fx + 1e-4 * t * slope) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) break;
        if (!gradient(x_new, g_new)) break;
        double sy = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            s[j] = x_new[j] - x[j];
            yv[j] = -(g_new[j] - g[j]);  // gradient of -f
            sy += s[j] * yv[j];
        }
        const double gain = f_new - fx;
        x = x_new;
        fx = f_new;
        g = g_new;
        if (sy > 1e-300) {
            std::vector<double> Hy(d, 0.0);
            double yHy = 0.0;
            for (std::size_t a = 0; a < d; ++a) {
                for (std::size_t b = 0; b < d; ++b) Hy[a] += H[a * d + b] * yv[b];
                yHy += yv[a] * Hy[a];
            }
            const double rho = 1.0 / sy;
            for (std::size_t a = 0; a < d; ++a)
                for (std::size_t b = 0; b < d; ++b)
                    H[a * d + b] += (1.0 + yHy * rho) * rho * s[a] * s[b] - rho * (Hy[a] * s[b] + s[a] * Hy[b]);
        }
        if (gain < 1e-15) break;
    }
    out.x = x;
    out.value = fx;
    out.evaluations = evals;
    return out;
}

// Safeguarded Newton/bisection for an increasing function on [lo, hi] with g(lo) < 0 < g(hi).
template <class G, class DG>
double newton_bisect(G&& g, DG&& dg, double lo, double hi, double tol = 1e-14, int max_iter = 200,
                     double x0 = std::numeric_limits<double>::quiet_NaN(), double ftol = 0.0) {
    double x = (x0 > lo && x0 < hi) ? x0 : 0.5 * (lo + hi);
    for (int it = 0; it < max_iter; ++it) {
        const double v = g(x);
        if (std::abs(v) <= ftol) return x;
        if (v < 0.0) lo = x;
        else hi = x;
        const double d = dg(x);
        double nx = x - v / d;
        if (!(d > 0.0) || !(nx > lo && nx < hi)) nx = 0.5 * (lo + hi);
        if (std::abs(nx - x) <= tol * std::max(1.0, std::abs(x))) return nx;
        x = nx;
    }
    return x;
}

}  // namespace hestonis
