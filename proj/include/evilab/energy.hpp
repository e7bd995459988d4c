#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "evilab/extended_real.hpp"
#include "evilab/point.hpp"

namespace evilab {

enum class EnergyKind { zero, quadratic, linear, entropy, quartic, smooth_abs, abs, custom };

std::string to_string(EnergyKind kind);

/// Parameters of a named energy. Closed-form solvers and reference curves key on this.
struct EnergyDescriptor {
    EnergyKind kind = EnergyKind::custom;
    /// Curvature k (quadratic k|x|^2/2, quartic k sum x^4) or smoothing width (smooth_abs).
    double k = 1.0;
    /// V for linear, the reference density for entropy.
    std::vector<double> vec;
    /// Euclidean box restriction lo <= x_i <= hi.
    std::optional<std::pair<double, double>> box;
    /// Density ratio bounds a <= x_i / ref_i <= b.
    std::optional<DensityBounds> bounds;
};

struct Energy {
    std::string label;
    EnergyDescriptor descriptor;
    /// Finite whenever in_domain holds.
    std::function<double(const Point&)> evaluate;
    std::function<bool(const Point&)> in_domain;
    std::optional<double> lower_bound;
    /// Euclidean points only; empty when not available.
    std::function<std::vector<double>(const Point&)> gradient;

    /// Value, or +infinity outside the domain.
    ExtReal operator()(const Point& x) const;
    /// Value; throws DomainError outside the domain.
    double at(const Point& x) const;
};

Energy make_zero_energy();
/// k |x|^2 / 2 on euclidean points.
Energy make_quadratic(double k = 1.0);
/// <V, x> on euclidean or density points.
Energy make_linear(std::vector<double> V);
/// KL(x | ref) on densities.
Energy make_entropy(std::vector<double> ref);
/// k sum x_i^4.
Energy make_quartic(double k = 1.0);
/// sum sqrt(x_i^2 + delta^2) - delta.
Energy make_smooth_abs(double delta);
/// sum |x_i|. Not differentiable at 0.
Energy make_abs();

/// Restricts an energy to lo <= x_i <= hi (+infinity outside).
Energy restrict_to_box(Energy e, double lo, double hi);
/// Restricts an energy on densities to the [a,b] ratio bound.
Energy restrict_to_bounds(Energy e, DensityBounds bounds);

/// Central finite-difference gradient with step h.
std::vector<double> numeric_gradient(const std::function<double(const Point&)>& fn, const Point& x,
                                     double h = 1e-6);

/// phi = f + g with the moduli claimed for each part.
struct SplitEnergy {
    Energy f;
    Energy g;
    double lambda_f = 0.0;
    double lambda_g = 0.0;
    double tau_bar = 1.0;

    void validate() const;
};

/// f(x) + g(x), or +infinity outside either domain.
ExtReal eval_phi(const SplitEnergy& se, const Point& x);
/// f + g as a single energy. Descriptor kind is kept when one part is zero.
Energy phi_energy(const SplitEnergy& se);

}  // namespace evilab
