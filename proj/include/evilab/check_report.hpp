#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace evilab {

enum class Verdict { pass, fail, inconclusive };

std::string to_string(Verdict v);

/// Where the worst residual of a sweep was found. Unused fields stay empty.
struct Location {
    std::optional<long> level;
    std::optional<long> step;
    std::optional<long> test_point;
    std::optional<double> time;
};

/// One row of a sweep that violated its tolerance.
struct Violation {
    Location where;
    double residual = 0.0;
    std::string detail;
};

/// Result of an inequality or certificate sweep.
struct CheckReport {
    std::string check_name;
    Verdict verdict = Verdict::pass;
    double worst_residual = -std::numeric_limits<double>::infinity();
    Location worst_location;
    double tolerance = 0.0;
    std::size_t sweep_count = 0;
    double runtime_ms = 0.0;
    std::vector<std::string> notes;
    std::vector<Violation> violations;

    bool passed() const noexcept { return verdict == Verdict::pass; }

    /// Records one residual; larger residuals replace the worst location.
    /// Residuals above `tolerance` are kept as violations (the first 1000).
    void record(double residual, const Location& where, const std::string& detail = {});
    /// Sets verdict from worst_residual <= tolerance unless already inconclusive.
    void finalize();
};

/// Worst of two verdicts in the order pass < inconclusive < fail.
Verdict worst(Verdict a, Verdict b);

nlohmann::json to_json(const CheckReport& r);

}  // namespace evilab
