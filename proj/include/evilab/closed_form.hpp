#pragma once

#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "evilab/cost.hpp"
#include "evilab/energy.hpp"
#include "evilab/point.hpp"

namespace evilab {

enum class StepKind { implicit_P, explicit_Q, transform };

std::string to_string(StepKind kind);

/// Outcome of comparing a closed form against exhaustive grid search.
struct ClosedFormVerification {
    std::string key;
    bool passed = false;
    /// Largest amount by which the closed-form objective exceeded the grid optimum.
    double worst_value_excess = 0.0;
    /// Largest sup-norm distance between the closed-form point and the grid optimizer.
    double worst_distance = 0.0;
    std::size_t instances = 0;
    std::string detail;
};

struct ClosedFormEntry {
    std::string key;
    StepKind step;
    std::function<bool(const Energy&, const CostFn&, double tau)> applies;
    /// Minimizer for implicit_P / explicit_Q entries.
    std::function<Point(const Energy&, const CostFn&, double tau, const Point&)> solve;
    /// Transform value for transform entries.
    std::function<double(const Energy&, const CostFn&, double tau, const Point&)> value;
    std::function<ClosedFormVerification()> verify;
};

/// Closed-form argmin and transform formulas. An entry is usable only after its
/// verification against exhaustive search has passed.
class ClosedFormRegistry {
public:
    static ClosedFormRegistry& global();

    const std::vector<ClosedFormEntry>& entries() const { return entries_; }
    const ClosedFormEntry* find(StepKind step, const Energy& e, const CostFn& c, double tau) const;

    /// Runs (once) and returns the verification of an entry.
    ClosedFormVerification ensure_verified(const std::string& key);
    std::vector<ClosedFormVerification> verify_all();

    /// Verified entry for (step, e, c); throws ContractError when missing or unverified.
    const ClosedFormEntry& require(StepKind step, const Energy& e, const CostFn& c, double tau);

private:
    ClosedFormRegistry();
    const ClosedFormEntry* find_key(const std::string& key) const;

    std::vector<ClosedFormEntry> entries_;
    std::map<std::string, ClosedFormVerification> verified_;
    std::mutex mutex_;
};

/// True for costs that equal |x - y|^2 / 2 on euclidean points.
bool is_half_squared_euclidean(const CostFn& c);
/// True for costs that equal KL(x | y) on densities.
bool is_kl_cost(const CostFn& c);

}  // namespace evilab
