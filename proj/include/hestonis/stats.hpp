#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace hestonis {

// Pairwise summation; order depends only on the input length.
inline double pairwise_sum(std::span<const double> x) {
    if (x.size() <= 32) {
        double s = 0.0;
        for (double v : x) s += v;
        return s;
    }
    const std::size_t h = x.size() / 2;
    return pairwise_sum(x.first(h)) + pairwise_sum(x.subspan(h));
}

struct SampleStats {
    std::size_t n = 0;
    double mean = 0.0;
    double variance = 0.0;  // unbiased
    double std_err() const { return n ? std::sqrt(variance / static_cast<double>(n)) : 0.0; }
};

inline SampleStats sample_stats(std::span<const double> x) {
    SampleStats s;
    s.n = x.size();
    if (s.n == 0) return s;
    s.mean = pairwise_sum(x) / static_cast<double>(s.n);
    if (s.n < 2) return s;
    std::vector<double> d(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) d[i] = (x[i] - s.mean) * (x[i] - s.mean);
    s.variance = pairwise_sum(d) / static_cast<double>(s.n - 1);
    return s;
}

}  // namespace hestonis
