#include "evilab/check_report.hpp"

#include <cmath>
#include <sstream>

#include "evilab/error.hpp"
#include "evilab/extended_real.hpp"

namespace evilab {

double ExtReal::value() const {
    if (infinite_) throw DomainError("value requested from +infinity");
    return value_;
}

std::string ExtReal::to_string() const {
    if (infinite_) return "+inf";
    std::ostringstream os;
    os.precision(17);
    os << value_;
    return os.str();
}

std::string to_string(Verdict v) {
    switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::inconclusive: return "inconclusive";
    }
    return "unknown";
}

Verdict worst(Verdict a, Verdict b) {
    auto rank = [](Verdict v) { return v == Verdict::pass ? 0 : v == Verdict::inconclusive ? 1 : 2; };
    return rank(a) >= rank(b) ? a : b;
}

void CheckReport::record(double residual, const Location& where, const std::string& detail) {
    ++sweep_count;
    if (std::isnan(residual)) {
        verdict = Verdict::fail;
        notes.push_back("NaN residual" + (detail.empty() ? std::string() : ": " + detail));
        return;
    }
    if (residual > worst_residual) {
        worst_residual = residual;
        worst_location = where;
    }
    if (residual > tolerance && violations.size() < 1000) violations.push_back({where, residual, detail});
}

void CheckReport::finalize() {
    if (verdict == Verdict::inconclusive) return;
    if (verdict == Verdict::fail) return;
    verdict = (worst_residual <= tolerance) ? Verdict::pass : Verdict::fail;
}

namespace {

nlohmann::json location_json(const Location& l) {
    nlohmann::json j;
    j["level"] = l.level ? nlohmann::json(*l.level) : nlohmann::json(nullptr);
    j["step"] = l.step ? nlohmann::json(*l.step) : nlohmann::json(nullptr);
    j["test_point"] = l.test_point ? nlohmann::json(*l.test_point) : nlohmann::json(nullptr);
    j["time"] = l.time ? nlohmann::json(*l.time) : nlohmann::json(nullptr);
    return j;
}

}  // namespace

nlohmann::json to_json(const CheckReport& r) {
    nlohmann::json j;
    j["check_name"] = r.check_name;
    j["pass"] = r.passed();
    j["verdict"] = to_string(r.verdict);
    j["worst_residual"] = std::isfinite(r.worst_residual) ? nlohmann::json(r.worst_residual)
                                                          : nlohmann::json(nullptr);
    j["worst_location"] = location_json(r.worst_location);
    j["tolerance"] = r.tolerance;
    j["sweep_count"] = r.sweep_count;
    j["runtime_ms"] = r.runtime_ms;
    j["notes"] = r.notes;
    j["violation_count"] = r.violations.size();
    return j;
}

}  // namespace evilab
