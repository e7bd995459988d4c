#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "evilab/check_report.hpp"
#include "evilab/config.hpp"
#include "evilab/evi_checks.hpp"
#include "evilab/schemes.hpp"
#include "evilab/transforms.hpp"

namespace evilab {

inline constexpr const char* kToolVersion = "0.3.0";

enum class Command { run, ladder, certify, transform };

std::string to_string(Command c);

/// Engineering slack on top of the exact inequalities; --strict-tolerances sets it to zero.
struct RunOptions {
    bool strict_tolerances = false;
};

CostFn resolve_cost(const ExperimentConfig& cfg);
Energy resolve_energy(const EnergySpec& spec, const ExperimentConfig& cfg);
SplitEnergy resolve_split(const ExperimentConfig& cfg);
/// Point of the configured space from raw coordinates or weights.
Point make_point(const ExperimentConfig& cfg, const std::vector<double>& values);
/// Search grid of exhaustive solvers and certificate sweeps.
FiniteSpace search_domain(const ExperimentConfig& cfg);
/// Euclidean: uniform grid with test_points per axis. Density: test_points random densities
/// (seeded) inside the bounds.
FiniteSpace test_points(const ExperimentConfig& cfg);
SchemeSolvers scheme_solvers(const ExperimentConfig& cfg);
LadderSpec ladder_spec(const ExperimentConfig& cfg);
/// Energy driving the flow: g for implicit runs, f + g for splitting runs.
Energy flow_energy(const ExperimentConfig& cfg);

/// Closed-form flow when one is registered, otherwise the ladder interpolant at level P+2
/// (source tag "ladder:P+2"). Throws BudgetError when that ladder is too long.
ContinuousCurve reference_oracle(const ExperimentConfig& cfg, std::optional<std::vector<double>> x0 = std::nullopt);

struct ReportDocument {
    std::string tool_version = kToolVersion;
    std::string name;
    std::string command;
    std::string fingerprint;
    std::uint64_t seed = 0;
    std::string reference;
    std::vector<CheckReport> checks;
    Verdict verdict = Verdict::pass;
    int exit_code = 0;
    double runtime_ms = 0.0;

    nlohmann::json to_json() const;
};

/// Everything the CSV writers need besides the report.
struct Artifacts {
    std::vector<SchemeRun> runs;
    std::optional<ContinuousCurve> reference;
    std::vector<std::vector<double>> residual_heat;
    std::optional<TransformResult> transform;
    std::optional<CostFn> cost;
};

struct Experiment {
    ReportDocument report;
    Artifacts artifacts;
};

/// 0 pass, 1 fail, 2 inconclusive.
int exit_code(Verdict v);

Experiment run_experiment(const ExperimentConfig& cfg, Command command = Command::run, RunOptions options = {});

/// Writes report.json and the CSV artifacts into `dir` (created when missing).
void write_artifacts(const Experiment& e, const std::string& dir);

/// Removes every "runtime_ms" member, recursively.
nlohmann::json strip_runtime(nlohmann::json j);

/// CSV writers; numbers use 17 significant digits.
std::string trajectory_csv(const Artifacts& a);
std::string phi_plotdata_csv(const Artifacts& a);
std::string cgap_plotdata_csv(const Artifacts& a);
std::string residual_plotdata_csv(const Artifacts& a);
std::string violations_csv(const ReportDocument& r);
std::string transform_csv(const Artifacts& a);

}  // namespace evilab
