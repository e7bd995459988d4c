#pragma once

#include <cstddef>
#include <vector>

#include "evilab/point.hpp"

namespace evilab {

/// Floor of t / tau with the integer-boundary guard used for dyadic checkpoints:
/// values within 1e-9 below an integer round up to it.
std::size_t step_index(double t, double tau);

/// Iterates of a scheme at step tau (the actual step of level p is already folded into tau).
class Trajectory {
public:
    Trajectory(double tau, std::vector<Point> points, unsigned level = 0);

    double tau() const noexcept { return tau_; }
    unsigned level() const noexcept { return level_; }
    const std::vector<Point>& points() const noexcept { return points_; }
    std::size_t size() const noexcept { return points_.size(); }
    /// Largest time that interpolate() accepts.
    double horizon() const noexcept { return tau_ * static_cast<double>(points_.size() - 1); }

    /// Piecewise-constant interpolant x(t) = points[floor(t / tau)].
    const Point& interpolate(double t) const;

private:
    double tau_;
    std::vector<Point> points_;
    unsigned level_;
};

/// count uniformly spaced times 0 = t_0 < ... < t_{count-1} = horizon.
std::vector<double> checkpoint_grid(double horizon, std::size_t count);

}  // namespace evilab
