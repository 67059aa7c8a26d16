#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "jsde/errors.hpp"

namespace jsde {

/// Welford accumulator. Results depend on insertion order, so callers that
/// need reproducibility feed it in a fixed order.
class RunningStats {
  public:
    void add(double x) {
        ++n_;
        const double d = x - mean_;
        mean_ += d / static_cast<double>(n_);
        m2_ += d * (x - mean_);
    }

    std::size_t count() const noexcept { return n_; }
    double mean() const noexcept { return mean_; }

    /// Unbiased sample variance; 0 with fewer than two samples.
    double variance() const noexcept { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
    double stddev() const { return std::sqrt(variance()); }
    double stderr_mean() const { return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0; }

  private:
    std::size_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

/// Linear-interpolation quantile (Hyndman-Fan type 7). Reorders `v`.
inline double quantile(std::vector<double>& v, double p) {
    if (v.empty()) {
        throw InvalidInput("quantile: empty sample");
    }
    std::sort(v.begin(), v.end());
    const double h = (static_cast<double>(v.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace jsde
