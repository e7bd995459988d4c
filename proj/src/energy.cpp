#include "evilab/energy.hpp"

#include <cmath>
#include <sstream>

#include "evilab/cost.hpp"
#include "evilab/error.hpp"

namespace evilab {

std::string to_string(EnergyKind kind) {
    switch (kind) {
        case EnergyKind::zero: return "zero";
        case EnergyKind::quadratic: return "quadratic";
        case EnergyKind::linear: return "linear";
        case EnergyKind::entropy: return "entropy";
        case EnergyKind::quartic: return "quartic";
        case EnergyKind::smooth_abs: return "smooth_abs";
        case EnergyKind::abs: return "abs";
        case EnergyKind::custom: return "custom";
    }
    return "unknown";
}

ExtReal Energy::operator()(const Point& x) const {
    if (!in_domain(x)) return ExtReal::infinity();
    return ExtReal(evaluate(x));
}

double Energy::at(const Point& x) const {
    if (!in_domain(x)) throw DomainError("point outside the domain of energy " + label);
    return evaluate(x);
}

namespace {

bool is_coordinate_point(const Point& x) { return x.kind() != PointKind::finite_index; }

Energy coordinatewise(std::string label, EnergyKind kind, double k,
                      std::function<double(double)> term, std::function<double(double)> dterm,
                      std::optional<double> lower) {
    Energy e;
    e.label = std::move(label);
    e.descriptor.kind = kind;
    e.descriptor.k = k;
    e.in_domain = [](const Point& x) { return x.kind() == PointKind::euclidean; };
    e.evaluate = [term](const Point& x) {
        double s = 0.0;
        for (double v : x.values()) s += term(v);
        return s;
    };
    if (dterm) {
        e.gradient = [dterm](const Point& x) {
            std::vector<double> g(x.dim());
            for (std::size_t i = 0; i < g.size(); ++i) g[i] = dterm(x[i]);
            return g;
        };
    }
    e.lower_bound = lower;
    return e;
}

std::string with_param(const char* name, const char* key, double v) {
    std::ostringstream os;
    os << name << ':' << key << '=' << v;
    return os.str();
}

}  // namespace

Energy make_zero_energy() {
    Energy e;
    e.label = "zero";
    e.descriptor.kind = EnergyKind::zero;
    e.in_domain = [](const Point&) { return true; };
    e.evaluate = [](const Point&) { return 0.0; };
    e.gradient = [](const Point& x) { return std::vector<double>(x.dim(), 0.0); };
    e.lower_bound = 0.0;
    return e;
}

Energy make_quadratic(double k) {
    std::optional<double> lower;
    if (k >= 0.0) lower = 0.0;
    return coordinatewise(with_param("quadratic", "k", k), EnergyKind::quadratic, k,
                          [k](double v) { return 0.5 * k * v * v; }, [k](double v) { return k * v; },
                          lower);
}

Energy make_quartic(double k) {
    std::optional<double> lower;
    if (k >= 0.0) lower = 0.0;
    return coordinatewise(with_param("quartic", "k", k), EnergyKind::quartic, k,
                          [k](double v) { return k * v * v * v * v; },
                          [k](double v) { return 4.0 * k * v * v * v; }, lower);
}

Energy make_smooth_abs(double delta) {
    if (!(delta > 0.0)) throw DomainError("smooth_abs needs delta > 0");
    return coordinatewise(
        with_param("smooth_abs", "delta", delta), EnergyKind::smooth_abs, delta,
        [delta](double v) { return std::sqrt(v * v + delta * delta) - delta; },
        [delta](double v) { return v / std::sqrt(v * v + delta * delta); }, 0.0);
}

Energy make_abs() {
    Energy e = coordinatewise("abs", EnergyKind::abs, 1.0, [](double v) { return std::abs(v); },
                              nullptr, 0.0);
    return e;
}

Energy make_linear(std::vector<double> V) {
    Energy e;
    std::ostringstream os;
    os << "linear:V=[";
    for (std::size_t i = 0; i < V.size(); ++i) os << (i ? "," : "") << V[i];
    os << ']';
    e.label = os.str();
    e.descriptor.kind = EnergyKind::linear;
    e.descriptor.vec = V;
    e.in_domain = [n = V.size()](const Point& x) { return is_coordinate_point(x) && x.dim() == n; };
    e.evaluate = [V](const Point& x) {
        double s = 0.0;
        for (std::size_t i = 0; i < V.size(); ++i) s += V[i] * x[i];
        return s;
    };
    e.gradient = [V](const Point&) { return V; };
    return e;
}

Energy make_entropy(std::vector<double> ref) {
    const Point rho = Point::density(ref);
    for (double r : ref)
        if (!(r > 0.0)) throw DomainError("entropy reference density must be strictly positive");
    Energy e;
    std::ostringstream os;
    os << "entropy:ref=[";
    for (std::size_t i = 0; i < ref.size(); ++i) os << (i ? "," : "") << ref[i];
    os << ']';
    e.label = os.str();
    e.descriptor.kind = EnergyKind::entropy;
    e.descriptor.vec = ref;
    e.in_domain = [n = ref.size()](const Point& x) {
        return x.kind() == PointKind::density && x.dim() == n;
    };
    e.evaluate = [rho](const Point& x) { return kl_divergence(x, rho).value(); };
    e.lower_bound = 0.0;
    return e;
}

Energy restrict_to_box(Energy e, double lo, double hi) {
    if (!(lo < hi)) throw DomainError("box restriction needs lo < hi");
    std::ostringstream os;
    os << e.label << "|box=[" << lo << ',' << hi << ']';
    e.label = os.str();
    e.descriptor.box = std::make_pair(lo, hi);
    e.in_domain = [inner = e.in_domain, lo, hi](const Point& x) {
        if (!inner(x)) return false;
        for (double v : x.values())
            if (v < lo || v > hi) return false;
        return true;
    };
    return e;
}

Energy restrict_to_bounds(Energy e, DensityBounds bounds) {
    std::ostringstream os;
    os << e.label << "|bounds=[" << bounds.a << ',' << bounds.b << ']';
    e.label = os.str();
    e.descriptor.bounds = bounds;
    e.in_domain = [inner = e.in_domain, bounds](const Point& x) {
        return inner(x) && x.kind() == PointKind::density && x.dim() == bounds.reference.size() &&
               bounds.contains(x.values());
    };
    return e;
}

std::vector<double> numeric_gradient(const std::function<double(const Point&)>& fn, const Point& x,
                                     double h) {
    if (x.kind() != PointKind::euclidean)
        throw ContractError("finite-difference gradients need euclidean points");
    std::vector<double> g(x.dim());
    std::vector<double> coords(x.values().begin(), x.values().end());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double keep = coords[i];
        coords[i] = keep + h;
        const double up = fn(Point::euclidean(coords));
        coords[i] = keep - h;
        const double down = fn(Point::euclidean(coords));
        coords[i] = keep;
        g[i] = (up - down) / (2.0 * h);
    }
    return g;
}

void SplitEnergy::validate() const {
    if (!(tau_bar > 0.0)) throw DomainError("tau_bar must be positive");
    if (lambda_f < 0.0 || lambda_g < 0.0)
        throw DomainError("lambda_f and lambda_g must be non-negative for the splitting scheme");
}

ExtReal eval_phi(const SplitEnergy& se, const Point& x) { return se.f(x) + se.g(x); }

Energy phi_energy(const SplitEnergy& se) {
    if (se.f.descriptor.kind == EnergyKind::zero) return se.g;
    if (se.g.descriptor.kind == EnergyKind::zero) return se.f;
    const EnergyDescriptor& a = se.f.descriptor;
    const EnergyDescriptor& b = se.g.descriptor;
    const bool plain = !a.box && !b.box && !a.bounds && !b.bounds;
    if (plain && a.kind == EnergyKind::quadratic && b.kind == EnergyKind::quadratic) return make_quadratic(a.k + b.k);
    if (plain && a.kind == EnergyKind::linear && b.kind == EnergyKind::linear && a.vec.size() == b.vec.size()) {
        std::vector<double> v = a.vec;
        for (std::size_t i = 0; i < v.size(); ++i) v[i] += b.vec[i];
        return make_linear(std::move(v));
    }
    Energy e;
    e.label = se.f.label + "+" + se.g.label;
    e.evaluate = [f = se.f.evaluate, g = se.g.evaluate](const Point& x) { return f(x) + g(x); };
    e.in_domain = [f = se.f.in_domain, g = se.g.in_domain](const Point& x) { return f(x) && g(x); };
    if (se.f.lower_bound && se.g.lower_bound) e.lower_bound = *se.f.lower_bound + *se.g.lower_bound;
    if (se.f.gradient && se.g.gradient) {
        e.gradient = [f = se.f.gradient, g = se.g.gradient](const Point& x) {
            std::vector<double> a = f(x);
            const std::vector<double> b = g(x);
            for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
            return a;
        };
    }
    return e;
}

}  // namespace evilab
