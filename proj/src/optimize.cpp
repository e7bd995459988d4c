#include "evilab/optimize.hpp"

#include <algorithm>
#include <cmath>

namespace evilab {

namespace {

double sup_norm(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace

MinimizeResult minimize_bfgs(const Objective& fn, const ObjectiveGradient& grad,
                             std::vector<double> start, double tolerance, std::size_t max_evals,
                             std::optional<double> stop_below) {
    const std::size_t n = start.size();
    MinimizeResult r;
    r.x = std::move(start);

    auto eval = [&](const std::vector<double>& x) {
        ++r.evaluations;
        return fn(x);
    };
    auto gradient = [&](const std::vector<double>& x) {
        if (grad) return grad(x);
        std::vector<double> g(n), y = x;
        for (std::size_t i = 0; i < n; ++i) {
            const double h = 1e-6 * std::max(1.0, std::abs(x[i]));
            y[i] = x[i] + h;
            const double up = eval(y);
            y[i] = x[i] - h;
            const double down = eval(y);
            y[i] = x[i];
            g[i] = (up - down) / (2.0 * h);
        }
        return g;
    };

    r.value = eval(r.x);
    std::vector<double> g = gradient(r.x);
    std::vector<double> H(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) H[i * n + i] = 1.0;

    while (true) {
        r.gradient_norm = sup_norm(g);
        if (r.gradient_norm <= tolerance) {
            r.converged = true;
            return r;
        }
        if (stop_below && r.value < *stop_below) {
            r.unbounded = true;
            return r;
        }
        if (r.evaluations >= max_evals) return r;

        std::vector<double> p(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) p[i] -= H[i * n + j] * g[j];
        double slope = dot(p, g);
        if (!(slope < 0.0)) {
            for (std::size_t i = 0; i < n; ++i) {
                p[i] = -g[i];
                std::fill(H.begin() + i * n, H.begin() + (i + 1) * n, 0.0);
                H[i * n + i] = 1.0;
            }
            slope = -dot(g, g);
        }

        double step = 1.0;
        std::vector<double> x_new(n);
        double f_new = 0.0;
        bool accepted = false;
        for (int k = 0; k < 60; ++k) {
            for (std::size_t i = 0; i < n; ++i) x_new[i] = r.x[i] + step * p[i];
            f_new = eval(x_new);
            if (std::isfinite(f_new) && f_new <= r.value + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) return r;

        std::vector<double> g_new = gradient(x_new);
        std::vector<double> s(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = x_new[i] - r.x[i];
            y[i] = g_new[i] - g[i];
        }
        const double sy = dot(s, y);
        if (sy > 1e-16) {
            std::vector<double> Hy(n, 0.0);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) Hy[i] += H[i * n + j] * y[j];
            const double yHy = dot(y, Hy);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    H[i * n + j] += ((sy + yHy) * s[i] * s[j]) / (sy * sy) -
                                    (Hy[i] * s[j] + s[i] * Hy[j]) / sy;
        }
        r.x = std::move(x_new);
        r.value = f_new;
        g = std::move(g_new);
    }
}

}  // namespace evilab
