#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "evilab/evi_checks.hpp"
#include "evilab/schemes.hpp"
#include "evilab/transforms.hpp"

namespace evilab {

struct SpaceSpec {
    /// euclidean | density
    std::string kind = "euclidean";
    std::size_t dim = 1;
    /// Euclidean box of the search grid and test points.
    std::vector<double> lo{-2.0};
    std::vector<double> hi{2.0};
    /// Points per axis of the euclidean search grid.
    std::size_t grid = 21;
    std::size_t atoms = 3;
    /// Resolution of the density search grid (weights k / resolution).
    std::size_t resolution = 10;
    /// Reference density of the bounds and of entropy energies; uniform when empty.
    std::vector<double> reference;
    std::optional<std::pair<double, double>> bounds;
    /// Atom positions (ground space of Sinkhorn costs); 0, 1, ... when empty.
    std::vector<std::vector<double>> support;
};

/// Energy given as "name[:key=value,...]" or as a table with a `name` key.
struct EnergySpec {
    std::string name = "zero";
    std::map<std::string, double> params;
    std::vector<double> vec;
    std::optional<std::pair<double, double>> box;
};

struct CheckParams {
    /// Step sizes of error_estimate (default: the scheme tau).
    std::vector<double> error_taus;
    std::size_t checkpoints = 51;
    /// Test points: grid size (euclidean) or number of random densities.
    std::size_t test_points = 11;
    std::vector<double> times{0.5, 1.0, 2.0};
    std::vector<double> h_ladder{1e-2, 5e-3, 2.5e-3};
    std::vector<IntervalPair> pairs{{0.0, 0.5}, {0.5, 1.0}, {0.0, 2.0}, {1.0, 3.0}};
    std::size_t quadrature_n = 200;
    std::optional<double> lambda;
    std::vector<double> contraction_x0;
    std::vector<double> minimizer;
    double t0 = 0.5;
    std::optional<double> phi_inf;
    std::optional<double> cert_tau;
    std::optional<double> mu;
    std::string slack = "zero";
    std::size_t t_grid = 11;
    std::size_t max_instances = 400;
    double derivative_floor = 1e-3;
    double reference_budget = 4e6;
};

struct ExperimentConfig {
    std::string name;
    std::uint64_t seed = 0;
    SpaceSpec space;
    std::string cost = "sq_euclid";
    EnergySpec f;
    EnergySpec g;
    double lambda_f = 0.0;
    double lambda_g = 0.0;
    double tau_bar = 1e9;
    SchemeKind scheme = SchemeKind::implicit;
    std::vector<double> x0{1.0};
    double tau = 0.1;
    double horizon = 1.0;
    unsigned ladder_depth = 0;
    SolverKind solver = SolverKind::closed_form;
    double solver_tolerance = 1e-10;
    std::vector<std::string> checks;
    CheckParams check_params;
    std::map<std::string, double> tolerances;
    std::string output;

    void validate() const;
};

/// Parses a YAML document. Unknown keys and malformed values raise ConfigError with line:column.
ExperimentConfig parse_config(const std::string& text, const std::string& origin = "<string>");
ExperimentConfig load_config(const std::string& path);

/// Canonical JSON of every field (the fingerprint input).
nlohmann::json to_json(const ExperimentConfig& cfg);
/// FNV-1a 64 of the canonical JSON dump, hex.
std::string fingerprint(const ExperimentConfig& cfg);

struct Label {
    std::string name;
    std::map<std::string, double> scalars;
    std::map<std::string, std::vector<double>> vectors;
};

/// Parses "name:key=value,key=[v1,v2,...]". A bare qualifier ("bregman:entropy") stays in the name.
Label parse_label(const std::string& label);

/// Names accepted in `checks`.
const std::vector<std::string>& known_checks();

}  // namespace evilab
