#include "evilab/closed_form.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "evilab/error.hpp"

namespace evilab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kValueTol = 1e-10;

bool is_kind(const Energy& e, EnergyKind k) { return e.descriptor.kind == k; }

double sup_distance(const Point& a, const Point& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

double cost_or_inf(const CostFn& c, const Point& x, const Point& y) {
    try {
        return c(x, y);
    } catch (const DomainError&) {
        return kInf;
    }
}

/// Density proportional to w, checked against the energy's ratio bounds.
Point normalized_density(std::vector<double> w, const Energy& e, const char* who) {
    double s = 0.0;
    for (double v : w) s += v;
    for (double& v : w) v /= s;
    // Renormalize once more so the sum is 1 to rounding.
    s = 0.0;
    for (double v : w) s += v;
    for (double& v : w) v /= s;
    if (e.descriptor.bounds && !e.descriptor.bounds->contains(w))
        throw DomainError(std::string(who) + ": closed-form step leaves the [a,b] density bounds");
    return Point::density(std::move(w));
}

Point clip_to_box(std::vector<double> x, const Energy& e) {
    if (e.descriptor.box) {
        const auto [lo, hi] = *e.descriptor.box;
        for (double& v : x) v = std::clamp(v, lo, hi);
    }
    return Point::euclidean(std::move(x));
}

struct Instance {
    Energy energy;
    CostFn cost;
    double tau;
    std::vector<Point> bases;
    FiniteSpace grid;
    double allowed_distance;
};

std::string describe(const Instance& in) {
    std::ostringstream os;
    os << in.energy.label << " / " << in.cost.label << " tau=" << in.tau << " grid=" << in.grid.size();
    return os.str();
}

void merge(ClosedFormVerification& v, double excess, double distance, double allowed,
           const std::string& what) {
    ++v.instances;
    v.worst_value_excess = std::max(v.worst_value_excess, excess);
    v.worst_distance = std::max(v.worst_distance, distance);
    if (excess > kValueTol || distance > allowed) {
        v.passed = false;
        std::ostringstream os;
        os.precision(6);
        os << what << ": value excess " << excess << ", distance " << distance << " (allowed " << allowed
           << "); ";
        v.detail += os.str();
    }
}

/// Closed-form minimizer of x -> c(x, y0)/tau + g(x) against the grid minimizer.
ClosedFormVerification verify_P(const std::string& key, const ClosedFormEntry& entry,
                                const std::vector<Instance>& instances) {
    ClosedFormVerification v{key, true, 0.0, 0.0, 0, {}};
    for (const Instance& in : instances) {
        for (const Point& y0 : in.bases) {
            auto objective = [&](const Point& x) {
                const ExtReal g = in.energy(x);
                if (g.is_infinite()) return kInf;
                return cost_or_inf(in.cost, x, y0) / in.tau + g.value();
            };
            double best = kInf;
            std::size_t best_i = 0;
            for (std::size_t i = 0; i < in.grid.size(); ++i) {
                const double o = objective(in.grid[i]);
                if (o < best) {
                    best = o;
                    best_i = i;
                }
            }
            const Point x = entry.solve(in.energy, in.cost, in.tau, y0);
            merge(v, objective(x) - best, sup_distance(x, in.grid[best_i]), in.allowed_distance,
                  describe(in));
        }
    }
    return v;
}

/// Closed-form transform value against the grid supremum, which it must dominate.
ClosedFormVerification verify_T(const std::string& key, const ClosedFormEntry& entry,
                                const std::vector<Instance>& instances) {
    ClosedFormVerification v{key, true, 0.0, 0.0, 0, {}};
    for (const Instance& in : instances) {
        for (const Point& y : in.bases) {
            double sup = -kInf;
            for (const Point& x : in.grid) {
                const ExtReal f = in.energy(x);
                if (f.is_infinite()) continue;
                sup = std::max(sup, f.value() - cost_or_inf(in.cost, x, y) / in.tau);
            }
            const double closed = entry.value(in.energy, in.cost, in.tau, y);
            // The grid sup cannot exceed the true sup; the gap shrinks with grid spacing.
            merge(v, sup - closed, std::abs(closed - sup), in.allowed_distance, describe(in));
        }
    }
    return v;
}

/// Closed-form explicit step: its objective (with the closed-form transform) equals f(x0)
/// and is not beaten by any grid point.
ClosedFormVerification verify_Q(const std::string& key, const ClosedFormEntry& entry,
                                const ClosedFormEntry& transform, const std::vector<Instance>& instances) {
    ClosedFormVerification v{key, true, 0.0, 0.0, 0, {}};
    for (const Instance& in : instances) {
        for (const Point& x0 : in.bases) {
            auto objective = [&](const Point& y) {
                const double cy = cost_or_inf(in.cost, x0, y);
                if (!(cy < kInf)) return kInf;
                return cy / in.tau + transform.value(in.energy, in.cost, in.tau, y);
            };
            double best = kInf;
            std::size_t best_i = 0;
            for (std::size_t i = 0; i < in.grid.size(); ++i) {
                const double o = objective(in.grid[i]);
                if (o < best) {
                    best = o;
                    best_i = i;
                }
            }
            const Point y = entry.solve(in.energy, in.cost, in.tau, x0);
            const double at_y = objective(y);
            const double concavity_gap = std::abs(at_y - in.energy.at(x0));
            merge(v, std::max(at_y - best, concavity_gap), sup_distance(y, in.grid[best_i]),
                  in.allowed_distance, describe(in));
        }
    }
    return v;
}

Point e1(double v) { return Point::euclidean({v}); }

std::vector<Instance> euclid_instances(const std::function<Energy(std::size_t dim)>& make, double tau,
                                       std::vector<Point> bases_1d, std::vector<Point> bases_2d) {
    std::vector<Instance> out;
    out.push_back({make(1), make_squared_euclidean(), tau, std::move(bases_1d),
                   uniform_grid_1d(-3.0, 3.0, 1201), 0.0051});
    const std::vector<double> lo{-2.0, -2.0}, hi{2.0, 2.0};
    out.push_back({make(2), make_bregman_quadratic(), tau, std::move(bases_2d),
                   uniform_grid_box(lo, hi, 161), 0.0251});
    return out;
}

std::vector<Instance> simplex_instances(const std::function<Energy(std::size_t atoms)>& make, double tau,
                                        std::vector<Point> bases_2, std::vector<Point> bases_3) {
    std::vector<Instance> out;
    out.push_back({make(2), make_kl(), tau, std::move(bases_2), simplex_line(2001, 0.0), 0.00051});
    out.push_back({make(3), make_kl(), tau, std::move(bases_3), simplex_grid(3, 120), 1.01 / 120});
    return out;
}

}  // namespace

std::string to_string(StepKind kind) {
    switch (kind) {
        case StepKind::implicit_P: return "P";
        case StepKind::explicit_Q: return "Q";
        case StepKind::transform: return "T";
    }
    return "?";
}

bool is_half_squared_euclidean(const CostFn& c) {
    return c.label == "sq_euclid" || c.label == "bregman:quadratic";
}

bool is_kl_cost(const CostFn& c) { return c.label == "kl" || c.label == "bregman:entropy"; }

ClosedFormRegistry& ClosedFormRegistry::global() {
    static ClosedFormRegistry registry;
    return registry;
}

ClosedFormRegistry::ClosedFormRegistry() {
    const auto d2 = [](double a, double b) { return Point::density({a, b}); };
    const auto d3 = [](double a, double b, double c) { return Point::density({a, b, c}); };
    const auto e2 = [](double a, double b) { return Point::euclidean({a, b}); };
    auto V_for = [](std::size_t n) {
        return n == 1 ? std::vector<double>{0.5} : n == 2 ? std::vector<double>{1.0, -0.5}
                                                          : std::vector<double>{0.5, 0.0, -0.5};
    };
    auto kl_V_for = [](std::size_t n) {
        return n == 2 ? std::vector<double>{1.0, -1.0} : std::vector<double>{0.5, 0.0, -0.5};
    };

    // ---- implicit steps ----
    entries_.push_back(ClosedFormEntry{
        "P:zero", StepKind::implicit_P,
        [](const Energy& g, const CostFn& c, double) { return is_kind(g, EnergyKind::zero) && c.dissipative; },
        [](const Energy&, const CostFn&, double, const Point& y0) { return y0; }, nullptr, nullptr});
    entries_.back().verify = [this, e2, d2, d3] {
        std::vector<Instance> in = euclid_instances([](std::size_t) { return make_zero_energy(); }, 0.5,
                                                    {e1(0.73), e1(-1.1)}, {e2(0.4, -1.2)});
        auto s = simplex_instances([](std::size_t) { return make_zero_energy(); }, 0.1, {d2(0.3, 0.7)},
                                   {d3(0.2, 0.3, 0.5)});
        in.insert(in.end(), s.begin(), s.end());
        return verify_P("P:zero", entries_[0], in);
    };

    entries_.push_back(ClosedFormEntry{
        "P:quadratic/sq_euclid", StepKind::implicit_P,
        [](const Energy& g, const CostFn& c, double tau) {
            return is_kind(g, EnergyKind::quadratic) && is_half_squared_euclidean(c) &&
                   1.0 + g.descriptor.k * tau > 0.0;
        },
        [](const Energy& g, const CostFn&, double tau, const Point& y0) {
            std::vector<double> x(y0.values().begin(), y0.values().end());
            for (double& v : x) v /= 1.0 + g.descriptor.k * tau;
            return clip_to_box(std::move(x), g);
        },
        nullptr, nullptr});
    {
        const std::size_t idx = entries_.size() - 1;
        entries_.back().verify = [this, idx, e2] {
            std::vector<Instance> in = euclid_instances([](std::size_t) { return make_quadratic(1.0); }, 0.5,
                                                        {e1(1.0), e1(-1.7)}, {e2(1.2, -0.4)});
            auto k2 = euclid_instances([](std::size_t) { return make_quadratic(2.0); }, 0.1, {e1(2.5)},
                                       {e2(-1.9, 0.3)});
            in.insert(in.end(), k2.begin(), k2.end());
            in.push_back({restrict_to_box(make_quadratic(1.0), -0.5, 0.5), make_squared_euclidean(), 0.5,
                          {e1(1.8), e1(-0.3)}, uniform_grid_1d(-3.0, 3.0, 1201), 0.0051});
            return verify_P(entries_[idx].key, entries_[idx], in);
        };
    }

    entries_.push_back(ClosedFormEntry{
        "P:linear/sq_euclid", StepKind::implicit_P,
        [](const Energy& g, const CostFn& c, double) {
            return is_kind(g, EnergyKind::linear) && is_half_squared_euclidean(c) && !g.descriptor.box;
        },
        [](const Energy& g, const CostFn&, double tau, const Point& y0) {
            std::vector<double> x(y0.values().begin(), y0.values().end());
            for (std::size_t i = 0; i < x.size(); ++i) x[i] -= tau * g.descriptor.vec[i];
            return Point::euclidean(std::move(x));
        },
        nullptr, nullptr});
    {
        const std::size_t idx = entries_.size() - 1;
        entries_.back().verify = [this, idx, e2, V_for] {
            auto in = euclid_instances([V_for](std::size_t n) { return make_linear(V_for(n)); }, 0.5,
                                       {e1(1.0), e1(-0.3)}, {e2(0.5, 0.5)});
            return verify_P(entries_[idx].key, entries_[idx], in);
        };
    }

    entries_.push_back(ClosedFormEntry{
        "P:abs/sq_euclid", StepKind::implicit_P,
        [](const Energy& g, const CostFn& c, double) {
            return is_kind(g, EnergyKind::abs) && is_half_squared_euclidean(c) && !g.descriptor.box;
        },
        [](const Energy&, const CostFn&, double tau, const Point& y0) {
            std::vector<double> x(y0.values().begin(), y0.values().end());
            for (double& v : x) v = std::copysign(std::max(std::abs(v) - tau, 0.0), v);
            return Point::euclidean(std::move(x));
        },
        nullptr, nullptr});
    {
        const std::size_t idx = entries_.size() - 1;
        entries_.back().verify = [this, idx, e2] {
            auto in = euclid_instances([](std::size_t) { return make_abs(); }, 0.3,
                                       {e1(1.0), e1(0.2), e1(-0.5)}, {e2(1.0, -0.1)});
            return verify_P(entries_[idx].key, entries_[idx], in);
        };
    }

    entries_.push_back(ClosedFormEntry{
        "P:linear/kl", StepKind::implicit_P,
        [](const Energy& g, const CostFn& c, double) { return is_kind(g, EnergyKind::linear) && is_kl_cost(c); },
        [](const Energy& g, const CostFn&, double tau, const Point& y0) {
            std::vector<double> w(y0.dim());
            for (std::size_t i = 0; i < w.size(); ++i) w[i] = y0[i] * std::exp(-tau * g.descriptor.vec[i]);
            return normalized_density(std::move(w), g, "argmin_P");
        },
        nullptr, nullptr});
    {
        const std::size_t idx = entries_.size() - 1;
        entries_.back().verify = [this, idx, d2, d3, kl_V_for] {
            auto in = simplex_instances([kl_V_for](std::size_t n) { return make_linear(kl_V_for(n)); }, 0.1,
                                        {d2(0.5, 0.5), d2(0.3, 0.7)}, {d3(0.2, 0.3, 0.5)});
            return verify_P(entries_[idx].key, entries_[idx], in);
        };
    }

    entries_.push_back(ClosedFormEntry{
        "P:entropy/kl", StepKind::implicit_P,
        [](const Energy& g, const CostFn& c, double) { return is_kind(g, EnergyKind::entropy) && is_kl_cost(c); },
        [](const Energy& g, const CostFn&, double tau, const Point& y0) {
            const std::vector<double>& rho = g.descriptor.vec;
            std::vector<double> w(y0.dim());
            for (std::size_t i = 0; i < w.size(); ++i)
                w[i] = std::exp((std::log(y0[i]) + tau * std::log(rho[i])) / (1.0 + tau));
            return normalized_density(std::move(w), g, "argmin_P");
        },
        nullptr, nullptr});
    {
        const std::size_t idx = entries_.size() - 1;
        entries_.back().verify = [this, idx, d2, d3] {
            auto in = simplex_instances(
                [](std::size_t n) {
                    return make_entropy(n == 2 ? std::vector<double>{0.25, 0.75} : std::vector<double>{0.2, 0.3, 0.5});
                },
                0.5, {d2(0.6, 0.4), d2(0.1, 0.9)}, {d3(0.6, 0.3, 0.1)});
            return verify_P(entries_[idx].key, entries_[idx], in);
        };
    }

    // ---- transforms ----
    entries_.push_back(ClosedFormEntry{
        "T:zero", StepKind::transform,
        [](const Energy& f, const CostFn& c, double) { return is_kind(f, EnergyKind::zero) && c.dissipative; },
        nullptr, [](const Energy&, const CostFn&, double, const Point&) { return 0.0; }, nullptr});
    {
        const std::size_t idx = entries_.size() - 1;
        entries_.back().verify = [this, idx, e2, d3] {
            auto in = euclid_instances([](std::size_t) { return make_zero_energy(); }, 0.5, {e1(0.7)},
                                       {e2(0.3, 0.3)});
            in.push_back({make_zero_energy(), make_kl(), 0.1, {d3(0.2, 0.3, 0.5)}, simplex_grid(3, 120), 1e-3});
            for (auto& i : in) i.allowed_distance = 1e-3;
            return verify_T(entries_[idx].key, entries_[idx], in);
        };
    }

    entries_.push_back(ClosedFormEntry{
        "T:quadratic/sq_euclid", StepKind::transform,
        [](const Energy& f, const CostFn& c, double tau) {
            return is_kind(f, EnergyKind::quadratic) && is_half_squared_euclidean(c) && !f.descriptor.box &&
                   f.descriptor.k * tau < 1.0;
        },
        nullptr,
        [](const Energy& f, const CostFn&, double tau, const Point& y) {
            const double k = f.descriptor.k;
            double s = 0.0;
            for (double v : y.values()) s += v * v;
            return 0.5 * k * s / (1.0 - k * tau);
        },
        nullptr});
    {
        const std::size_t idx = entries_.size() - 1;
        entries_.back().verify = [this, idx, e2] {
            auto in = euclid_instances([](std::size_t) { return make_quadratic(1.0); }, 0.1, {e1(0.9), e1(-1.3)},
                                       {e2(0.5, -0.8)});
            for (auto& i : in) i.allowed_distance = 1e-3;
            return verify_T(entries_[idx].key, entries_[idx], in);
        };
    }

    entries_.push_back(ClosedFormEntry{
        "T:linear/sq_euclid", StepKind::transform,
        [](const Energy& f, const CostFn& c, double) {
            return is_kind(f, EnergyKind::linear) && is_half_squared_euclidean(c) && !f.descriptor.box;
        },
        nullptr,
        [](const Energy& f, const CostFn&, double tau, const Point& y) {
            double s = 0.0, vv = 0.0;
            for (std::size_t i = 0; i < y.dim(); ++i) {
                s += f.descriptor.vec[i] * y[i];
                vv += f.descriptor.vec[i] * f.descriptor.vec[i];
            }
            return s + 0.5 * tau * vv;
        },
        nullptr});
    {
        const std::size_t idx = entries_.size() - 1;
        entries_.back().verify = [this, idx, e2, V_for] {
            auto in = euclid_instances([V_for](std::size_t n) { return make_linear(V_for(n)); }, 0.5, {e1(0.4)},
                                       {e2(-0.5, 0.2)});
            for (auto& i : in) i.allowed_distance = 1e-3;
            return verify_T(entries_[idx].key, entries_[idx], in);
        };
    }

    entries_.push_back(ClosedFormEntry{
        "T:linear/kl", StepKind::transform,
        [](const Energy& f, const CostFn& c, double) { return is_kind(f, EnergyKind::linear) && is_kl_cost(c); },
        nullptr,
        [](const Energy& f, const CostFn&, double tau, const Point& y) {
            // The maximizer is proportional to y exp(tau V); it must respect the bounds.
            std::vector<double> w(y.dim());
            double s = 0.0;
            for (std::size_t i = 0; i < w.size(); ++i) {
                w[i] = y[i] * std::exp(tau * f.descriptor.vec[i]);
                s += w[i];
            }
            normalized_density(w, f, "c_transform");
            return std::log(s) / tau;
        },
        nullptr});
    {
        const std::size_t idx = entries_.size() - 1;
        entries_.back().verify = [this, idx, d2, d3, kl_V_for] {
            auto in = simplex_instances([kl_V_for](std::size_t n) { return make_linear(kl_V_for(n)); }, 0.1,
                                        {d2(0.5, 0.5), d2(0.2, 0.8)}, {d3(0.2, 0.3, 0.5)});
            for (auto& i : in) i.allowed_distance = 1e-3;
            return verify_T(entries_[idx].key, entries_[idx], in);
        };
    }

    // ---- explicit steps ----
    entries_.push_back(ClosedFormEntry{
        "Q:zero", StepKind::explicit_Q,
        [](const Energy& f, const CostFn& c, double) { return is_kind(f, EnergyKind::zero) && c.dissipative; },
        [](const Energy&, const CostFn&, double, const Point& x0) { return x0; }, nullptr, nullptr});
    {
        const std::size_t idx = entries_.size() - 1;
        entries_.back().verify = [this, idx, e2, d3] {
            auto in = euclid_instances([](std::size_t) { return make_zero_energy(); }, 0.5, {e1(0.7)},
                                       {e2(0.4, -0.4)});
            in.push_back({make_zero_energy(), make_kl(), 0.1, {d3(0.2, 0.3, 0.5)}, simplex_grid(3, 120), 1.01 / 120});
            return verify_Q(entries_[idx].key, entries_[idx], *find_key("T:zero"), in);
        };
    }

    entries_.push_back(ClosedFormEntry{
        "Q:quadratic/sq_euclid", StepKind::explicit_Q,
        [](const Energy& f, const CostFn& c, double tau) {
            return is_kind(f, EnergyKind::quadratic) && is_half_squared_euclidean(c) && !f.descriptor.box &&
                   f.descriptor.k * tau < 1.0;
        },
        [](const Energy& f, const CostFn&, double tau, const Point& x0) {
            std::vector<double> y(x0.values().begin(), x0.values().end());
            for (double& v : y) v *= 1.0 - f.descriptor.k * tau;
            return Point::euclidean(std::move(y));
        },
        nullptr, nullptr});
    {
        const std::size_t idx = entries_.size() - 1;
        entries_.back().verify = [this, idx, e2] {
            auto in = euclid_instances([](std::size_t) { return make_quadratic(1.0); }, 0.1, {e1(1.0), e1(-2.2)},
                                       {e2(0.8, -1.2)});
            auto k2 = euclid_instances([](std::size_t) { return make_quadratic(2.0); }, 0.2, {e1(1.5)},
                                       {e2(-1.0, 0.6)});
            in.insert(in.end(), k2.begin(), k2.end());
            return verify_Q(entries_[idx].key, entries_[idx], *find_key("T:quadratic/sq_euclid"), in);
        };
    }

    entries_.push_back(ClosedFormEntry{
        "Q:linear/sq_euclid", StepKind::explicit_Q,
        [](const Energy& f, const CostFn& c, double) {
            return is_kind(f, EnergyKind::linear) && is_half_squared_euclidean(c) && !f.descriptor.box;
        },
        [](const Energy& f, const CostFn&, double tau, const Point& x0) {
            std::vector<double> y(x0.values().begin(), x0.values().end());
            for (std::size_t i = 0; i < y.size(); ++i) y[i] -= tau * f.descriptor.vec[i];
            return Point::euclidean(std::move(y));
        },
        nullptr, nullptr});
    {
        const std::size_t idx = entries_.size() - 1;
        entries_.back().verify = [this, idx, e2, V_for] {
            auto in = euclid_instances([V_for](std::size_t n) { return make_linear(V_for(n)); }, 0.5,
                                       {e1(1.0)}, {e2(0.3, -0.6)});
            return verify_Q(entries_[idx].key, entries_[idx], *find_key("T:linear/sq_euclid"), in);
        };
    }

    entries_.push_back(ClosedFormEntry{
        "Q:linear/kl", StepKind::explicit_Q,
        [](const Energy& f, const CostFn& c, double) { return is_kind(f, EnergyKind::linear) && is_kl_cost(c); },
        [](const Energy& f, const CostFn&, double tau, const Point& x0) {
            std::vector<double> w(x0.dim());
            for (std::size_t i = 0; i < w.size(); ++i) w[i] = x0[i] * std::exp(-tau * f.descriptor.vec[i]);
            return normalized_density(std::move(w), f, "argmin_Q");
        },
        nullptr, nullptr});
    {
        const std::size_t idx = entries_.size() - 1;
        entries_.back().verify = [this, idx, d2, d3, kl_V_for] {
            auto in = simplex_instances([kl_V_for](std::size_t n) { return make_linear(kl_V_for(n)); }, 0.1,
                                        {d2(0.5, 0.5), d2(0.3, 0.7)}, {d3(0.2, 0.3, 0.5)});
            return verify_Q(entries_[idx].key, entries_[idx], *find_key("T:linear/kl"), in);
        };
    }
}

const ClosedFormEntry* ClosedFormRegistry::find_key(const std::string& key) const {
    for (const auto& e : entries_)
        if (e.key == key) return &e;
    return nullptr;
}

const ClosedFormEntry* ClosedFormRegistry::find(StepKind step, const Energy& e, const CostFn& c,
                                                double tau) const {
    for (const auto& entry : entries_)
        if (entry.step == step && entry.applies(e, c, tau)) return &entry;
    return nullptr;
}

ClosedFormVerification ClosedFormRegistry::ensure_verified(const std::string& key) {
    {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = verified_.find(key);
        if (it != verified_.end()) return it->second;
    }
    const ClosedFormEntry* entry = find_key(key);
    if (!entry) throw ContractError("no closed form named " + key);
    ClosedFormVerification v = entry->verify();
    std::lock_guard<std::mutex> lock(mutex_);
    verified_.emplace(key, v);
    return v;
}

std::vector<ClosedFormVerification> ClosedFormRegistry::verify_all() {
    std::vector<ClosedFormVerification> out;
    for (const auto& e : entries_) out.push_back(ensure_verified(e.key));
    return out;
}

const ClosedFormEntry& ClosedFormRegistry::require(StepKind step, const Energy& e, const CostFn& c, double tau) {
    const ClosedFormEntry* entry = find(step, e, c, tau);
    if (!entry)
        throw ContractError("no closed form registered for " + to_string(step) + " with " + e.label + " / " +
                            c.label);
    const ClosedFormVerification v = ensure_verified(entry->key);
    if (!v.passed) throw ContractError("closed form " + entry->key + " failed oracle verification: " + v.detail);
    return *entry;
}

}  // namespace evilab
