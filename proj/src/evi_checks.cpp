#include "evilab/evi_checks.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "evilab/closed_form.hpp"
#include "evilab/error.hpp"
#include "evilab/parallel.hpp"

namespace evilab {

namespace {

constexpr const char* kNetNote = "residuals are reported net of their per-entry tolerance";

void conclude(CheckReport& r, std::size_t inconclusive) {
    if (inconclusive) r.notes.push_back(std::to_string(inconclusive) + " entries inconclusive (derivative estimates unstable)");
    if (r.verdict == Verdict::fail) return;
    if (r.worst_residual > r.tolerance) {
        r.verdict = Verdict::fail;
    } else if (inconclusive) {
        r.verdict = Verdict::inconclusive;
    } else {
        r.verdict = Verdict::pass;
    }
}

void require_ladder(const ContinuousCurve& curve, const std::vector<double>& h) {
    if (h.size() < 2) throw ContractError("h ladder needs at least two steps");
    for (std::size_t k = 0; k < h.size(); ++k) {
        if (!(h[k] > 0.0)) throw ContractError("h ladder entries must be positive");
        if (k && !(h[k] < h[k - 1])) throw ContractError("h ladder must be strictly decreasing");
    }
    if (h.back() < curve.resolution)
        throw ContractError("smallest h is below the resolution of the curve");
}

void require_symmetric(const CostFn& c, const char* who) {
    if (!c.symmetric) throw ContractError(std::string(who) + " needs a symmetric cost");
}

Location where(std::optional<long> test, std::optional<double> time, std::optional<long> step = std::nullopt) {
    return Location{std::nullopt, step, test, time};
}

}  // namespace

Point ContinuousCurve::operator()(double t) const {
    if (t < 0.0 || t > horizon * (1.0 + 1e-12) + 1e-12) {
        std::ostringstream os;
        os << "curve " << source << " evaluated at t=" << t << " outside [0, " << horizon << "]";
        throw HorizonError(os.str(), horizon);
    }
    return at(std::min(t, horizon));
}

ContinuousCurve curve_from_trajectory(const Trajectory& tr, std::string source) {
    ContinuousCurve c;
    c.source = std::move(source);
    c.horizon = tr.horizon();
    c.resolution = tr.tau();
    c.at = [tr](double t) { return tr.interpolate(t); };
    return c;
}

std::optional<ContinuousCurve> closed_form_flow(const Energy& phi, const CostFn& c, const Point& x0,
                                                double horizon) {
    if (!is_half_squared_euclidean(c) || x0.kind() != PointKind::euclidean || phi.descriptor.box) return std::nullopt;
    const std::vector<double> x(x0.values().begin(), x0.values().end());
    ContinuousCurve curve;
    curve.horizon = horizon;
    const EnergyDescriptor d = phi.descriptor;
    switch (d.kind) {
        case EnergyKind::zero:
            curve.source = "closed_form:stationary";
            curve.at = [x0](double) { return x0; };
            return curve;
        case EnergyKind::quadratic:
            curve.source = "closed_form:exp";
            curve.at = [x, k = d.k](double t) {
                std::vector<double> y = x;
                for (double& v : y) v *= std::exp(-k * t);
                return Point::euclidean(std::move(y));
            };
            return curve;
        case EnergyKind::linear:
            curve.source = "closed_form:drift";
            curve.at = [x, V = d.vec](double t) {
                std::vector<double> y = x;
                for (std::size_t i = 0; i < y.size(); ++i) y[i] -= t * V[i];
                return Point::euclidean(std::move(y));
            };
            return curve;
        case EnergyKind::abs:
            curve.source = "closed_form:shrink";
            curve.at = [x](double t) {
                std::vector<double> y = x;
                for (double& v : y) v = std::copysign(std::max(std::abs(v) - t, 0.0), v);
                return Point::euclidean(std::move(y));
            };
            return curve;
        default:
            return std::nullopt;
    }
}

double E_lambda(double lambda, double t) {
    if (t < 0.0) throw DomainError("E_lambda needs t >= 0");
    if (lambda == 0.0) return t;
    const double z = lambda * t;
    if (std::abs(z) < 1e-6) return t * (1.0 + z / 2.0 + z * z / 6.0);
    return std::expm1(z) / lambda;
}

Estimate richardson(const std::vector<double>& h, const std::vector<double>& D) {
    if (h.size() != D.size() || h.size() < 2) throw ContractError("richardson needs matching ladders of size >= 2");
    Estimate e;
    std::vector<double> R;
    for (std::size_t k = 0; k + 1 < h.size(); ++k)
        R.push_back(D[k + 1] + (D[k + 1] - D[k]) * h[k + 1] / (h[k] - h[k + 1]));
    e.value = R.back();
    e.uncertainty = R.size() >= 2 ? std::abs(R.back() - R[R.size() - 2]) : std::abs(D.back() - D[D.size() - 2]);
    double scale = 0.0;
    for (double v : D) scale = std::max(scale, std::abs(v));
    int sign = 0;
    for (std::size_t k = 0; k + 1 < D.size(); ++k) {
        const double d = D[k + 1] - D[k];
        if (std::abs(d) <= 1e-12 * (1.0 + scale)) continue;
        const int s = d > 0 ? 1 : -1;
        if (sign && s != sign) {
            e.inconclusive = true;
            e.note = "samples not monotone along the h ladder";
        }
        sign = s;
    }
    return e;
}

CheckReport evi_integral_residual(const ContinuousCurve& curve, const CostFn& c, const Energy& phi,
                                  double lambda, const FiniteSpace& test_points,
                                  const std::vector<IntervalPair>& pairs, std::size_t quadrature_n, double base) {
    if (quadrature_n == 0) throw ContractError("quadrature_n must be positive");
    CheckReport r;
    r.check_name = "evi_integral";
    r.tolerance = 0.0;
    r.notes.push_back(kNetNote);
    const std::size_t m = test_points.size();
    std::vector<char> usable(m);
    std::vector<double> phi_x(m);
    std::size_t skipped = 0;
    for (std::size_t k = 0; k < m; ++k) {
        const ExtReal v = phi(test_points[k]);
        usable[k] = v.is_finite();
        if (usable[k]) phi_x[k] = v.value(); else ++skipped;
    }
    for (const auto& pr : pairs) {
        if (pr.s < 0.0 || pr.t < pr.s) throw ContractError("interval pairs need 0 <= s <= t");
        const double h = (pr.t - pr.s) / static_cast<double>(quadrature_n);
        std::vector<Point> xs;
        std::vector<double> phis;
        xs.reserve(quadrature_n + 1);
        for (std::size_t q = 0; q <= quadrature_n; ++q) {
            const double tq = q == quadrature_n ? pr.t : pr.s + static_cast<double>(q) * h;
            xs.push_back(curve(tq));
            phis.push_back(phi.at(xs.back()));
        }
        std::vector<double> excess(m, 0.0);
        parallel_for(m, [&](std::size_t b, std::size_t e) {
            for (std::size_t k = b; k < e; ++k) {
                if (!usable[k]) continue;
                const Point& x = test_points[k];
                double integral = 0.0, variation = 0.0, prev = 0.0, first = 0.0, last = 0.0;
                for (std::size_t q = 0; q <= quadrature_n; ++q) {
                    const double cx = c(x, xs[q]);
                    if (q == 0) first = cx;
                    if (q == quadrature_n) last = cx;
                    const double integrand = lambda * cx + phis[q];
                    if (q < quadrature_n) integral += h * integrand;
                    if (q) variation += std::abs(integrand - prev);
                    prev = integrand;
                }
                const double residual = last - first + integral - (pr.t - pr.s) * phi_x[k];
                const double terms = std::abs(last) + std::abs(first) + std::abs(integral) +
                                     std::abs((pr.t - pr.s) * phi_x[k]);
                excess[k] = residual - (base * (1.0 + terms) + h * variation);
            }
        });
        for (std::size_t k = 0; k < m; ++k)
            if (usable[k]) r.record(excess[k], where(static_cast<long>(k), pr.t), "integral EVI");
    }
    if (skipped) r.notes.push_back(std::to_string(skipped) + " test points outside dom(phi) skipped");
    r.finalize();
    return r;
}

CheckReport evi_exponential_residual(const ContinuousCurve& curve, const CostFn& c, const Energy& phi,
                                     double lambda, const FiniteSpace& test_points,
                                     const std::vector<IntervalPair>& pairs, double tolerance) {
    CheckReport r;
    r.check_name = "evi_exponential";
    r.tolerance = tolerance;
    std::size_t skipped = 0;
    for (const auto& pr : pairs) {
        if (pr.s < 0.0 || pr.t < pr.s) throw ContractError("interval pairs need 0 <= s <= t");
        const Point xs = curve(pr.s), xt = curve(pr.t);
        const double phit = phi.at(xt);
        const double E = E_lambda(lambda, pr.t - pr.s);
        const double growth = std::exp(lambda * (pr.t - pr.s));
        for (std::size_t k = 0; k < test_points.size(); ++k) {
            const ExtReal px = phi(test_points[k]);
            if (px.is_infinite()) {
                ++skipped;
                continue;
            }
            const Point& x = test_points[k];
            r.record(growth * c(x, xt) - c(x, xs) - E * (px.value() - phit), where(static_cast<long>(k), pr.t),
                     "exponential EVI");
        }
    }
    if (skipped) r.notes.push_back(std::to_string(skipped) + " (test point, pair) entries outside dom(phi) skipped");
    r.finalize();
    return r;
}

CheckReport evi_differential_residual(const ContinuousCurve& curve, const CostFn& c, const Energy& phi,
                                      double lambda, const FiniteSpace& test_points,
                                      const std::vector<double>& times, const std::vector<double>& h_ladder,
                                      double floor) {
    require_ladder(curve, h_ladder);
    CheckReport r;
    r.check_name = "evi_differential";
    r.tolerance = 0.0;
    r.notes.push_back(kNetNote);
    std::size_t inconclusive = 0, skipped = 0;
    for (double t : times) {
        const Point xt = curve(t);
        const double phit = phi.at(xt);
        std::vector<Point> ahead;
        for (double h : h_ladder) ahead.push_back(curve(t + h));
        for (std::size_t k = 0; k < test_points.size(); ++k) {
            const ExtReal px = phi(test_points[k]);
            if (px.is_infinite()) {
                ++skipped;
                continue;
            }
            const Point& x = test_points[k];
            const double base = c(x, xt);
            std::vector<double> D;
            for (std::size_t j = 0; j < h_ladder.size(); ++j) D.push_back((c(x, ahead[j]) - base) / h_ladder[j]);
            const Estimate e = richardson(h_ladder, D);
            if (e.inconclusive) {
                ++inconclusive;
                continue;
            }
            const double residual = e.value + lambda * base - px.value() + phit;
            r.record(residual - std::max(floor, 3.0 * e.uncertainty), where(static_cast<long>(k), t),
                     "differential EVI");
        }
    }
    if (skipped) r.notes.push_back(std::to_string(skipped) + " entries outside dom(phi) skipped");
    conclude(r, inconclusive);
    return r;
}

CheckReport evi_lipschitz_bound(const ContinuousCurve& curve, const CostFn& c, const Energy& phi, double lambda,
                                const std::vector<IntervalPair>& pairs, double tolerance) {
    CheckReport r;
    r.check_name = "evi_lipschitz";
    r.tolerance = tolerance;
    for (const auto& pr : pairs) {
        const Point xs = curve(pr.s), xt = curve(pr.t);
        const double v = c(xs, xt);
        r.record(-v, where(std::nullopt, pr.t), "c(x_s,x_t) >= 0");
        r.record(v - E_lambda(-lambda, pr.t - pr.s) * (phi.at(xs) - phi.at(xt)), where(std::nullopt, pr.t),
                 "c(x_s,x_t) - E_{-lambda}(t-s) (phi(x_s) - phi(x_t))");
    }
    r.finalize();
    return r;
}

double lambda_contraction_gap(const ContinuousCurve& a, const ContinuousCurve& b, const CostFn& c, double lambda,
                              double s, double t) {
    require_symmetric(c, "lambda_contraction_gap");
    if (s < 0.0 || t < s) throw ContractError("lambda_contraction_gap needs 0 <= s <= t");
    return std::exp(-2.0 * lambda * (t - s)) * c(a(s), b(s)) - c(a(t), b(t));
}

double contraction_ratio(const ContinuousCurve& a, const ContinuousCurve& b, const CostFn& c, double lambda,
                         double s, double t) {
    require_symmetric(c, "contraction_ratio");
    const double cs = c(a(s), b(s));
    if (!(cs > 0.0)) throw DomainError("contraction_ratio: curves coincide at s");
    return std::exp(2.0 * lambda * (t - s)) * c(a(t), b(t)) / cs;
}

CheckReport lambda_contraction_check(const ContinuousCurve& a, const ContinuousCurve& b, const CostFn& c,
                                     double lambda, const std::vector<IntervalPair>& pairs, double tolerance) {
    CheckReport r;
    r.check_name = "lambda_contraction";
    r.tolerance = tolerance;
    for (const auto& pr : pairs)
        r.record(-lambda_contraction_gap(a, b, c, lambda, pr.s, pr.t), where(std::nullopt, pr.t),
                 "c(x_t,y_t) - e^{-2 lambda (t-s)} c(x_s,y_s)");
    r.finalize();
    return r;
}

Estimate c_cost_derivative(const ContinuousCurve& curve, const CostFn& c, double t,
                           const std::vector<double>& h_ladder) {
    require_symmetric(c, "c_cost_derivative");
    require_ladder(curve, h_ladder);
    const Point xt = curve(t);
    std::vector<double> Q;
    bool all_zero = true;
    for (double h : h_ladder) {
        const double v = c(xt, curve(t + h));
        if (v != 0.0) all_zero = false;
        Q.push_back(2.0 * v / (h * h));
    }
    if (all_zero) {
        Estimate e;
        e.degenerate = true;
        e.note = "stationary on the ladder";
        return e;
    }
    Estimate e = richardson(h_ladder, Q);
    if (e.uncertainty > 0.5 * std::abs(e.value) && e.uncertainty > 1e-12) {
        e.inconclusive = true;
        e.note = "extrapolation spread exceeds half the value";
    }
    return e;
}

Estimate oriented_local_slope(const ContinuousCurve& curve, const Energy& phi, const CostFn& c, double t,
                              const std::vector<double>& h_ladder) {
    require_ladder(curve, h_ladder);
    const Point xt = curve(t);
    const double pt = phi.at(xt);
    std::vector<double> q;
    bool degenerate = true;
    for (double h : h_ladder) {
        const Point xh = curve(t + h);
        const double cc = c(xt, xh);
        const double drop = std::max(pt - phi.at(xh), 0.0);
        if (cc > 0.0) degenerate = false;
        q.push_back(cc > 0.0 ? drop / std::sqrt(2.0 * cc) : 0.0);
    }
    Estimate e;
    const double a = q[q.size() - 2], b = q.back();
    e.value = std::max(a, b);
    e.uncertainty = std::abs(a - b);
    e.degenerate = degenerate;
    if (degenerate) e.note = "stationary on the ladder";
    return e;
}

CheckReport energy_identity_gap(const ContinuousCurve& curve, const Energy& phi, const CostFn& c,
                                const std::vector<double>& times, const std::vector<double>& h_ladder,
                                double floor) {
    require_ladder(curve, h_ladder);
    CheckReport r;
    r.check_name = "energy_identity";
    r.tolerance = 0.0;
    r.notes.push_back(kNetNote);
    std::size_t inconclusive = 0;
    for (double t : times) {
        const double pt = phi.at(curve(t));
        std::vector<double> D;
        for (double h : h_ladder) D.push_back((phi.at(curve(t + h)) - pt) / h);
        const Estimate dphi = richardson(h_ladder, D);
        const Estimate speed = c_cost_derivative(curve, c, t, h_ladder);
        if (dphi.inconclusive || speed.inconclusive) {
            ++inconclusive;
            continue;
        }
        const double gap = std::abs(dphi.value + speed.value);
        const double unc = dphi.uncertainty + speed.uncertainty;
        r.record(gap - std::max(floor, 3.0 * unc), where(std::nullopt, t), "|dphi/dt + |x'|_c^2|");
    }
    conclude(r, inconclusive);
    return r;
}

CheckReport velocity_monotonicity(const ContinuousCurve& curve, const CostFn& c, double lambda,
                                  const std::vector<double>& times, const std::vector<double>& h_ladder,
                                  double floor) {
    CheckReport r;
    r.check_name = "velocity_monotonicity";
    r.tolerance = 0.0;
    r.notes.push_back(kNetNote);
    std::size_t inconclusive = 0;
    std::optional<Estimate> prev;
    double prev_t = 0.0;
    for (double t : times) {
        Estimate e = c_cost_derivative(curve, c, t, h_ladder);
        if (e.inconclusive) {
            ++inconclusive;
            prev.reset();
            continue;
        }
        const double w = std::exp(2.0 * lambda * t);
        e.value *= w;
        e.uncertainty *= w;
        if (prev) {
            r.record(e.value - prev->value - std::max(floor, 3.0 * (e.uncertainty + prev->uncertainty)),
                     where(std::nullopt, t), "increase of e^{2 lambda t} |x'_t|^2 since " + std::to_string(prev_t));
        }
        prev = e;
        prev_t = t;
    }
    conclude(r, inconclusive);
    return r;
}

CheckReport apriori_gap(const ContinuousCurve& curve, const CostFn& c, const Energy& phi, double lambda,
                        const FiniteSpace& test_points, const std::vector<IntervalPair>& pairs,
                        const std::vector<double>& h_ladder, double tolerance) {
    CheckReport r;
    r.check_name = "apriori";
    r.tolerance = 0.0;
    r.notes.push_back(kNetNote);
    std::size_t inconclusive = 0;
    for (const auto& pr : pairs) {
        const Point xs = curve(pr.s), xt = curve(pr.t);
        const double phit = phi.at(xt);
        const double E = E_lambda(lambda, pr.t - pr.s);
        const Estimate v = c_cost_derivative(curve, c, pr.t, h_ladder);
        if (v.inconclusive) {
            ++inconclusive;
            continue;
        }
        for (std::size_t k = 0; k < test_points.size(); ++k) {
            const ExtReal px = phi(test_points[k]);
            if (px.is_infinite()) continue;
            const Point& x = test_points[k];
            const double residual = std::exp(lambda * (pr.t - pr.s)) * c(x, xt) - c(x, xs) +
                                    0.5 * E * E * v.value - E * (px.value() - phit);
            r.record(residual - (tolerance + 3.0 * v.uncertainty * 0.5 * E * E), where(static_cast<long>(k), pr.t),
                     "a priori estimate");
        }
    }
    conclude(r, inconclusive);
    return r;
}

CheckReport asymptotic_report(const ContinuousCurve& curve, const Energy& phi, const CostFn& c, double lambda,
                              const Point& minimizer, double t0, const std::vector<double>& times,
                              const std::vector<double>& h_ladder, double tolerance, double floor) {
    CheckReport r;
    r.check_name = "asymptotic";
    r.tolerance = 0.0;
    r.notes.push_back(kNetNote);
    if (lambda < 0.0) {
        r.notes.push_back("lambda < 0: long-time inequalities not applicable, skipped");
        r.verdict = Verdict::inconclusive;
        return r;
    }
    const Point& xb = minimizer;
    const double phib = phi.at(xb);
    const Point x0 = curve(t0);
    const double c0 = c(xb, x0);
    std::optional<Estimate> v0;
    const bool derivatives = c.symmetric;
    if (!derivatives) r.notes.push_back("asymmetric cost: derivative rows skipped");
    else v0 = c_cost_derivative(curve, c, t0, h_ladder);
    std::size_t inconclusive = 0;
    double prev_c = c0;
    for (double t : times) {
        if (t <= t0) continue;
        const Point xt = curve(t);
        const double gap = phi.at(xt) - phib;
        const double ct = c(xb, xt);
        const double dt = t - t0;
        const Location loc = where(std::nullopt, t);
        if (lambda > 0.0) {
            r.record(lambda * ct - gap - tolerance, loc, "lambda c(xbar,x_t) <= phi(x_t) - phi(xbar)");
            r.record(gap - lambda * c0 / std::expm1(lambda * dt) - tolerance, loc, "phi gap decay");
            r.record(ct - c0 * std::exp(-2.0 * lambda * dt) - tolerance, loc, "c(xbar,x_t) decay");
        } else {
            r.record(gap - c0 / dt - tolerance, loc, "phi gap <= c(xbar,x_t0)/(t-t0)");
            r.record(ct - prev_c - tolerance, loc, "c(xbar,x_t) non-increasing");
        }
        prev_c = ct;
        if (!derivatives) continue;
        const Estimate v = c_cost_derivative(curve, c, t, h_ladder);
        if (v.inconclusive || v0->inconclusive) {
            ++inconclusive;
            continue;
        }
        const double speed = std::sqrt(std::max(v.value, 0.0));
        const double speed0 = std::sqrt(std::max(v0->value, 0.0));
        // Uncertainty of sqrt(v) from that of v, guarded near zero.
        const double su = std::sqrt(v.uncertainty) + std::sqrt(v0->uncertainty);
        r.record(2.0 * lambda * gap - v.value - std::max(floor, 3.0 * v.uncertainty), loc,
                 "2 lambda (phi(x_t) - phi(xbar)) <= |x'_t|^2");
        r.record(speed - speed0 * std::exp(-lambda * dt) - std::max(floor, 3.0 * su), loc,
                 "|x'_t| <= |x'_t0| e^{-lambda (t-t0)}");
        r.record(speed - std::sqrt(2.0 * c0) / E_lambda(lambda, dt) - std::max(floor, 3.0 * su), loc,
                 "|x'_t| <= sqrt(2 c(xbar,x_t0)) / E_lambda(t-t0)");
    }
    conclude(r, inconclusive);
    return r;
}

double local_stationarity_residual(const ContinuousCurve& curve, const CostFn& c, const Energy& phi, double t,
                                   double fd_step) {
    if (!(fd_step > 0.0)) throw ContractError("fd_step must be positive");
    const Point xt = curve(t);
    if (xt.kind() != PointKind::euclidean) throw ContractError("local_stationarity_residual needs euclidean points");
    const std::size_t n = xt.dim();
    const double h = fd_step;
    const bool central = t - h >= 0.0;
    const Point ahead = curve(t + h);
    const Point behind = central ? curve(t - h) : xt;
    std::vector<double> vel(n);
    for (std::size_t i = 0; i < n; ++i) vel[i] = (ahead[i] - behind[i]) / (central ? 2.0 * h : h);

    std::vector<double> base(xt.values().begin(), xt.values().end());
    auto shifted = [&](std::size_t i, double d) {
        std::vector<double> v = base;
        v[i] += d;
        return Point::euclidean(std::move(v));
    };
    std::vector<double> grad = phi.gradient ? phi.gradient(xt) : numeric_gradient([&](const Point& p) { return phi.at(p); }, xt, h);
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double hv = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double mixed = (c(shifted(i, h), shifted(j, h)) - c(shifted(i, h), shifted(j, -h)) -
                                  c(shifted(i, -h), shifted(j, h)) + c(shifted(i, -h), shifted(j, -h))) /
                                 (4.0 * h * h);
            hv += mixed * vel[j];
        }
        norm += (hv - grad[i]) * (hv - grad[i]);
    }
    return std::sqrt(norm);
}

}  // namespace evilab
