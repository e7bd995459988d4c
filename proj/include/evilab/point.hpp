#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace evilab {

enum class PointKind { euclidean, density, finite_index };

std::string to_string(PointKind kind);

/// Restricted density space: weights w with a * ref_i <= w_i <= b * ref_i.
struct DensityBounds {
    std::vector<double> reference;
    double a = 0.0;
    double b = 0.0;

    bool contains(std::span<const double> weights, double rel_tol = 1e-12) const;
};

/// Element of the state space. Immutable after construction.
class Point {
public:
    static Point euclidean(std::vector<double> coords);
    /// Probability vector (entries >= 0, sum 1 within 1e-12).
    static Point density(std::vector<double> weights);
    /// Probability vector that must also satisfy the [a,b] ratio bound.
    static Point density(std::vector<double> weights, const DensityBounds& bounds);
    static Point finite(std::size_t index, std::size_t cardinality);

    PointKind kind() const noexcept { return kind_; }
    /// Coordinates (euclidean) or weights (density). Empty for finite-index points.
    std::span<const double> values() const noexcept { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }
    std::size_t dim() const noexcept { return values_.size(); }
    std::size_t index() const noexcept { return index_; }

    friend bool operator==(const Point& a, const Point& b) noexcept;

private:
    Point(PointKind kind, std::vector<double> values, std::size_t index)
        : kind_(kind), values_(std::move(values)), index_(index) {}

    PointKind kind_;
    std::vector<double> values_;
    std::size_t index_ = 0;
};

/// Throws ShapeError unless both points have the same variant and dimension.
void require_same_shape(const Point& a, const Point& b);

/// Ordered, pairwise-distinct list of points of one variant.
class FiniteSpace {
public:
    FiniteSpace() = default;
    explicit FiniteSpace(std::vector<Point> points);

    std::size_t size() const noexcept { return points_.size(); }
    bool empty() const noexcept { return points_.empty(); }
    const Point& operator[](std::size_t i) const { return points_[i]; }
    const std::vector<Point>& points() const noexcept { return points_; }
    PointKind kind() const;

    /// Index of an exactly equal point, if present.
    std::optional<std::size_t> find(const Point& p) const;

    auto begin() const { return points_.begin(); }
    auto end() const { return points_.end(); }

private:
    std::vector<Point> points_;
};

/// Uniform 1-D euclidean grid lo, ..., hi with `count` points.
FiniteSpace uniform_grid_1d(double lo, double hi, std::size_t count);

/// Tensor grid on a box in R^d, `per_axis` points along each axis.
FiniteSpace uniform_grid_box(std::span<const double> lo, std::span<const double> hi,
                             std::size_t per_axis);

/// All densities on `atoms` atoms whose weights are k_i / resolution (k_i >= 0, sum = resolution).
/// With bounds, points violating the ratio bound are dropped.
FiniteSpace simplex_grid(std::size_t atoms, std::size_t resolution,
                         const std::optional<DensityBounds>& bounds = std::nullopt);

/// Two-atom densities (p, 1-p) with p evenly spaced on [lo, 1-lo], `count` points.
FiniteSpace simplex_line(std::size_t count, double lo);

}  // namespace evilab
