#include "evilab/trajectory.hpp"

#include <cmath>
#include <sstream>

#include "evilab/error.hpp"

namespace evilab {

std::size_t step_index(double t, double tau) {
    const double ratio = t / tau;
    double k = std::floor(ratio);
    if (ratio - k > 1.0 - 1e-9) k += 1.0;
    return static_cast<std::size_t>(k);
}

Trajectory::Trajectory(double tau, std::vector<Point> points, unsigned level)
    : tau_(tau), points_(std::move(points)), level_(level) {
    if (!(tau_ > 0.0)) throw DomainError("trajectory step tau must be positive");
    if (points_.empty()) throw DomainError("trajectory needs at least one point");
}

const Point& Trajectory::interpolate(double t) const {
    if (!(t >= 0.0)) throw DomainError("interpolation time must be non-negative");
    const std::size_t k = step_index(t, tau_);
    if (k >= points_.size()) {
        std::ostringstream os;
        os.precision(17);
        os << "time " << t << " is past the stored horizon; the last iterate is at t = " << horizon()
           << " and queries must satisfy t < " << tau_ * static_cast<double>(points_.size());
        throw HorizonError(os.str(), horizon());
    }
    return points_[k];
}

std::vector<double> checkpoint_grid(double horizon, std::size_t count) {
    if (!(horizon > 0.0)) throw DomainError("checkpoint horizon must be positive");
    if (count < 2) throw DomainError("checkpoint grid needs at least two times");
    std::vector<double> times(count);
    for (std::size_t i = 0; i < count; ++i)
        times[i] = horizon * static_cast<double>(i) / static_cast<double>(count - 1);
    times.back() = horizon;
    return times;
}

}  // namespace evilab
