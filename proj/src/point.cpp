#include "evilab/point.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "evilab/error.hpp"

namespace evilab {

std::string to_string(PointKind kind) {
    switch (kind) {
    case PointKind::euclidean: return "euclidean";
    case PointKind::density: return "density";
    case PointKind::finite_index: return "finite-index";
    }
    return "unknown";
}

bool DensityBounds::contains(std::span<const double> weights, double rel_tol) const {
    if (weights.size() != reference.size()) return false;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const double lo = a * reference[i];
        const double hi = b * reference[i];
        if (weights[i] < lo * (1.0 - rel_tol) || weights[i] > hi * (1.0 + rel_tol)) return false;
    }
    return true;
}

Point Point::euclidean(std::vector<double> coords) {
    if (coords.empty()) throw ShapeError("euclidean point needs at least one coordinate");
    for (double v : coords)
        if (!std::isfinite(v)) throw DomainError("euclidean point has a non-finite coordinate");
    return Point(PointKind::euclidean, std::move(coords), 0);
}

Point Point::density(std::vector<double> weights) {
    if (weights.empty()) throw ShapeError("density needs a non-empty support");
    double sum = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw DomainError("density weight must be finite and >= 0");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
        std::ostringstream os;
        os.precision(17);
        os << "density weights sum to " << sum << ", expected 1 within 1e-12";
        throw DomainError(os.str());
    }
    return Point(PointKind::density, std::move(weights), 0);
}

Point Point::density(std::vector<double> weights, const DensityBounds& bounds) {
    if (bounds.reference.size() != weights.size())
        throw ShapeError("density support size does not match the reference weights");
    if (!(bounds.a > 0.0) || !(bounds.b > bounds.a))
        throw DomainError("density bounds need 0 < a < b");
    Point p = density(std::move(weights));
    if (!bounds.contains(p.values())) throw DomainError("density ratio outside [a, b]");
    return p;
}

Point Point::finite(std::size_t index, std::size_t cardinality) {
    if (index >= cardinality) throw DomainError("finite index out of range");
    return Point(PointKind::finite_index, {}, index);
}

bool operator==(const Point& a, const Point& b) noexcept {
    if (a.kind_ != b.kind_) return false;
    if (a.kind_ == PointKind::finite_index) return a.index_ == b.index_;
    return a.values_ == b.values_;
}

void require_same_shape(const Point& a, const Point& b) {
    if (a.kind() != b.kind())
        throw ShapeError("points of different variants: " + to_string(a.kind()) + " vs " +
                         to_string(b.kind()));
    if (a.dim() != b.dim()) throw ShapeError("points of different dimension");
}

FiniteSpace::FiniteSpace(std::vector<Point> points) : points_(std::move(points)) {
    if (points_.empty()) return;
    const PointKind kind = points_.front().kind();
    const std::size_t dim = points_.front().dim();
    for (const Point& p : points_) {
        if (p.kind() != kind) throw ShapeError("finite space mixes point variants");
        if (p.dim() != dim) throw ShapeError("finite space mixes dimensions");
    }
    // Sorted copy of indices by lexicographic value; equal neighbours are duplicates.
    std::vector<std::size_t> order(points_.size());
    std::iota(order.begin(), order.end(), 0);
    auto key_less = [&](std::size_t i, std::size_t j) {
        const Point& a = points_[i];
        const Point& b = points_[j];
        if (kind == PointKind::finite_index) return a.index() < b.index();
        return std::lexicographical_compare(a.values().begin(), a.values().end(),
                                            b.values().begin(), b.values().end());
    };
    std::sort(order.begin(), order.end(), key_less);
    for (std::size_t k = 1; k < order.size(); ++k)
        if (points_[order[k - 1]] == points_[order[k]])
            throw DomainError("finite space contains duplicate points");
}

PointKind FiniteSpace::kind() const {
    if (points_.empty()) throw ContractError("empty finite space has no variant");
    return points_.front().kind();
}

std::optional<std::size_t> FiniteSpace::find(const Point& p) const {
    for (std::size_t i = 0; i < points_.size(); ++i)
        if (points_[i] == p) return i;
    return std::nullopt;
}

FiniteSpace uniform_grid_1d(double lo, double hi, std::size_t count) {
    if (count < 2 || !(hi > lo)) throw DomainError("1-D grid needs count >= 2 and hi > lo");
    std::vector<Point> pts;
    pts.reserve(count);
    const double h = (hi - lo) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) {
        const double x = (i + 1 == count) ? hi : lo + h * static_cast<double>(i);
        pts.push_back(Point::euclidean({x}));
    }
    return FiniteSpace(std::move(pts));
}

FiniteSpace uniform_grid_box(std::span<const double> lo, std::span<const double> hi,
                             std::size_t per_axis) {
    if (lo.size() != hi.size() || lo.empty()) throw ShapeError("box bounds mismatch");
    if (per_axis < 2) throw DomainError("box grid needs at least 2 points per axis");
    const std::size_t d = lo.size();
    std::vector<std::size_t> idx(d, 0);
    std::vector<Point> pts;
    while (true) {
        std::vector<double> x(d);
        for (std::size_t k = 0; k < d; ++k) {
            const double h = (hi[k] - lo[k]) / static_cast<double>(per_axis - 1);
            x[k] = (idx[k] + 1 == per_axis) ? hi[k] : lo[k] + h * static_cast<double>(idx[k]);
        }
        pts.push_back(Point::euclidean(std::move(x)));
        std::size_t k = 0;
        while (k < d && ++idx[k] == per_axis) idx[k++] = 0;
        if (k == d) break;
    }
    return FiniteSpace(std::move(pts));
}

namespace {

void enumerate_compositions(std::size_t atoms, std::size_t remaining, std::vector<std::size_t>& cur,
                            std::vector<std::vector<std::size_t>>& out) {
    if (cur.size() + 1 == atoms) {
        cur.push_back(remaining);
        out.push_back(cur);
        cur.pop_back();
        return;
    }
    for (std::size_t k = 0; k <= remaining; ++k) {
        cur.push_back(k);
        enumerate_compositions(atoms, remaining - k, cur, out);
        cur.pop_back();
    }
}

}  // namespace

FiniteSpace simplex_grid(std::size_t atoms, std::size_t resolution,
                         const std::optional<DensityBounds>& bounds) {
    if (atoms == 0 || resolution == 0) throw DomainError("simplex grid needs atoms, resolution >= 1");
    std::vector<std::vector<std::size_t>> comps;
    std::vector<std::size_t> cur;
    enumerate_compositions(atoms, resolution, cur, comps);
    std::vector<Point> pts;
    const double n = static_cast<double>(resolution);
    for (const auto& c : comps) {
        std::vector<double> w(atoms);
        // Last weight absorbs rounding so that the sum is 1 to machine precision.
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < atoms; ++i) {
            w[i] = static_cast<double>(c[i]) / n;
            acc += w[i];
        }
        w[atoms - 1] = 1.0 - acc;
        if (w[atoms - 1] < 0.0) w[atoms - 1] = 0.0;
        if (bounds && !bounds->contains(w)) continue;
        pts.push_back(Point::density(std::move(w)));
    }
    return FiniteSpace(std::move(pts));
}

FiniteSpace simplex_line(std::size_t count, double lo) {
    if (count < 2 || !(lo >= 0.0) || !(lo < 0.5)) throw DomainError("simplex line needs count >= 2, 0 <= lo < 0.5");
    std::vector<Point> pts;
    const double span = 1.0 - 2.0 * lo;
    for (std::size_t i = 0; i < count; ++i) {
        const double p = lo + span * static_cast<double>(i) / static_cast<double>(count - 1);
        pts.push_back(Point::density({p, 1.0 - p}));
    }
    return FiniteSpace(std::move(pts));
}

}  // namespace evilab
