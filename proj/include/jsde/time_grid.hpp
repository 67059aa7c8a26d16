#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "jsde/errors.hpp"

namespace jsde {

/// Strictly increasing time points 0 = t_0 < ... < t_n = T.
///
/// Storage is shared and immutable, so copying a grid is cheap; every path of
/// an ensemble refers to the same points.
class TimeGrid {
  public:
    TimeGrid() = default;

    explicit TimeGrid(std::vector<double> points) {
        if (points.size() < 2) {
            throw InvalidInput("TimeGrid: need at least two points");
        }
        if (points.front() != 0.0) {
            throw InvalidInput("TimeGrid: first point must be 0");
        }
        for (std::size_t k = 1; k < points.size(); ++k) {
            if (!(points[k] > points[k - 1]) || !std::isfinite(points[k])) {
                throw InvalidInput("TimeGrid: points must be finite and strictly increasing");
            }
        }
        points_ = std::make_shared<const std::vector<double>>(std::move(points));
    }

    static TimeGrid uniform(double horizon, std::size_t steps) {
        if (!(horizon > 0.0) || !std::isfinite(horizon)) {
            throw InvalidInput("TimeGrid: horizon must be positive and finite");
        }
        if (steps == 0) {
            throw InvalidInput("TimeGrid: steps must be >= 1");
        }
        std::vector<double> pts(steps + 1);
        for (std::size_t k = 0; k <= steps; ++k) {
            pts[k] = horizon * static_cast<double>(k) / static_cast<double>(steps);
        }
        pts.back() = horizon;
        return TimeGrid(std::move(pts));
    }

    bool empty() const noexcept { return !points_ || points_->empty(); }
    std::size_t size() const noexcept { return points_ ? points_->size() : 0; }
    std::size_t steps() const noexcept { return size() == 0 ? 0 : size() - 1; }
    double horizon() const { return points_->back(); }

    std::span<const double> points() const noexcept {
        return points_ ? std::span<const double>(*points_) : std::span<const double>();
    }

    double operator[](std::size_t k) const { return (*points_)[k]; }

    double dt(std::size_t step) const { return (*points_)[step + 1] - (*points_)[step]; }

    double mesh() const {
        double m = 0.0;
        for (std::size_t k = 0; k + 1 < size(); ++k) {
            m = std::max(m, dt(k));
        }
        return m;
    }

    bool contains(double t) const { return !empty() && t >= 0.0 && t <= horizon(); }

    /// Largest k with t_k <= t. Requires t in [0, T].
    std::size_t index_at_or_before(double t) const {
        if (!contains(t)) {
            throw InvalidInput("TimeGrid: time " + std::to_string(t) + " outside [0, T]");
        }
        auto it = std::upper_bound(points_->begin(), points_->end(), t);
        return static_cast<std::size_t>(it - points_->begin()) - 1;
    }

    /// Index of an exact grid point, if t is one.
    std::optional<std::size_t> find(double t) const {
        if (empty()) {
            return std::nullopt;
        }
        auto it = std::lower_bound(points_->begin(), points_->end(), t);
        if (it != points_->end() && *it == t) {
            return static_cast<std::size_t>(it - points_->begin());
        }
        return std::nullopt;
    }

    /// True when every point of `coarse` is a point of this grid.
    bool refines(const TimeGrid& coarse) const {
        if (coarse.empty() || empty() || coarse.horizon() != horizon()) {
            return false;
        }
        return std::all_of(coarse.points().begin(), coarse.points().end(),
                           [this](double t) { return find(t).has_value(); });
    }

    /// Keeps every `factor`-th point.
    TimeGrid coarsen(std::size_t factor) const {
        if (factor == 0 || steps() % factor != 0) {
            throw InvalidInput("TimeGrid: coarsening factor must divide the step count");
        }
        std::vector<double> pts;
        pts.reserve(steps() / factor + 1);
        for (std::size_t k = 0; k < size(); k += factor) {
            pts.push_back((*points_)[k]);
        }
        return TimeGrid(std::move(pts));
    }

    friend bool operator==(const TimeGrid& a, const TimeGrid& b) {
        if (a.points_ == b.points_) {
            return true;
        }
        auto pa = a.points();
        auto pb = b.points();
        return std::equal(pa.begin(), pa.end(), pb.begin(), pb.end());
    }

  private:
    std::shared_ptr<const std::vector<double>> points_;
};

}  // namespace jsde
