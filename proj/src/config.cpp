#include "evilab/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "evilab/error.hpp"
#include "evilab/experiment.hpp"

namespace evilab {

namespace {

std::string where(const YAML::Node& n, const std::string& origin) {
    const YAML::Mark m = n.Mark();
    if (m.is_null()) return origin;
    return origin + ":" + std::to_string(m.line + 1) + ":" + std::to_string(m.column + 1);
}

[[noreturn]] void fail(const YAML::Node& n, const std::string& origin, const std::string& msg) {
    throw ConfigError(where(n, origin) + ": " + msg);
}

class Reader {
public:
    Reader(YAML::Node node, std::string path, const std::string& origin)
        : node_(std::move(node)), path_(std::move(path)), origin_(origin) {
        if (!node_.IsMap()) fail(node_, origin_, path_ + " must be a table");
    }

    /// Rejects keys outside `allowed`.
    void strict(std::initializer_list<const char*> allowed) const {
        for (const auto& kv : node_) {
            const std::string key = kv.first.as<std::string>();
            if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
                fail(kv.first, origin_, "unknown key '" + qualified(key) + "'");
        }
    }

    bool has(const std::string& key) const { return static_cast<bool>(node_[key]); }
    YAML::Node get(const std::string& key) const { return node_[key]; }
    std::string qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    template <class T>
    void read(const std::string& key, T& out) const {
        const YAML::Node n = node_[key];
        if (!n) return;
        try {
            out = n.as<T>();
        } catch (const YAML::Exception&) {
            fail(n, origin_, "invalid value for '" + qualified(key) + "'");
        }
    }

    template <class T>
    void read_opt(const std::string& key, std::optional<T>& out) const {
        if (!has(key)) return;
        T v{};
        read(key, v);
        out = v;
    }

    void read_pair(const std::string& key, std::optional<std::pair<double, double>>& out) const {
        const YAML::Node n = node_[key];
        if (!n) return;
        std::vector<double> v;
        read(key, v);
        if (v.size() != 2) fail(n, origin_, "'" + qualified(key) + "' needs two numbers");
        out = std::make_pair(v[0], v[1]);
    }

    Reader sub(const std::string& key) const { return Reader(node_[key], qualified(key), origin_); }
    const YAML::Node& node() const { return node_; }
    const std::string& origin() const { return origin_; }

private:
    YAML::Node node_;
    std::string path_;
    const std::string& origin_;
};

EnergySpec read_energy(const YAML::Node& n, const std::string& path, const std::string& origin) {
    EnergySpec e;
    if (n.IsScalar()) {
        try {
            const Label l = parse_label(n.as<std::string>());
            e.name = l.name;
            e.params = l.scalars;
            for (const auto& [k, v] : l.vectors) {
                if (k != "V" && k != "ref") throw ConfigError("energy label '" + l.name + "' has no list parameter " + k);
                e.vec = v;
            }
        } catch (const ConfigError& ex) {
            fail(n, origin, ex.what());
        }
        return e;
    }
    Reader r(n, path, origin);
    r.strict({"name", "k", "delta", "V", "ref", "box"});
    r.read("name", e.name);
    for (const char* key : {"k", "delta"}) {
        if (r.has(key)) {
            double v = 0.0;
            r.read(key, v);
            e.params[key] = v;
        }
    }
    r.read("V", e.vec);
    r.read("ref", e.vec);
    r.read_pair("box", e.box);
    return e;
}

nlohmann::json energy_json(const EnergySpec& e) {
    nlohmann::json j;
    j["name"] = e.name;
    j["params"] = e.params;
    j["vec"] = e.vec;
    j["box"] = e.box ? nlohmann::json{e.box->first, e.box->second} : nlohmann::json(nullptr);
    return j;
}

}  // namespace

namespace {

double parse_number(const std::string& text, const std::string& label) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size()) throw ConfigError("'" + text + "' in label '" + label + "' is not numeric");
    return v;
}

}  // namespace

Label parse_label(const std::string& label) {
    Label out;
    const auto colon = label.find(':');
    out.name = label.substr(0, colon);
    if (out.name.empty()) throw ConfigError("empty label");
    if (colon == std::string::npos) return out;
    const std::string rest = label.substr(colon + 1);
    if (rest.find('=') == std::string::npos) {
        out.name = label;
        return out;
    }
    // Split on commas outside brackets.
    std::vector<std::string> items;
    std::string cur;
    int depth = 0;
    for (char ch : rest) {
        if (ch == '[') ++depth;
        if (ch == ']') --depth;
        if (ch == ',' && depth == 0) {
            items.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    items.push_back(cur);
    for (const auto& item : items) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw ConfigError("label parameter '" + item + "' in '" + label + "' is not key=value");
        const std::string key = item.substr(0, eq), value = item.substr(eq + 1);
        if (!value.empty() && value.front() == '[') {
            if (value.back() != ']') throw ConfigError("unterminated list in label '" + label + "'");
            std::vector<double> v;
            std::istringstream is(value.substr(1, value.size() - 2));
            std::string part;
            while (std::getline(is, part, ',')) v.push_back(parse_number(part, label));
            out.vectors[key] = std::move(v);
        } else {
            out.scalars[key] = parse_number(value, label);
        }
    }
    return out;
}

const std::vector<std::string>& known_checks() {
    static const std::vector<std::string> names{
        "error_estimate", "cauchy",         "discrete_evi",  "monotone_energy",     "evi_integral",
        "evi_exponential", "evi_differential", "evi_lipschitz", "lambda_contraction", "energy_identity",
        "velocity_monotonicity", "apriori", "asymptotic",    "cross_concave",       "cross_convex",
        "compat_concave", "compat_convex",  "nncc_segment",  "c_concave"};
    return names;
}

void ExperimentConfig::validate() const {
    if (name.empty()) throw ConfigError("name: must not be empty");
    if (space.kind != "euclidean" && space.kind != "density")
        throw ConfigError("space.kind: must be euclidean or density, got '" + space.kind + "'");
    if (space.kind == "euclidean") {
        if (space.dim == 0) throw ConfigError("space.dim: must be positive");
        if (space.lo.size() != space.dim || space.hi.size() != space.dim)
            throw ConfigError("space.lo/space.hi: need one entry per dimension");
        if (x0.size() != space.dim) throw ConfigError("scheme.x0: needs space.dim entries");
        if (space.grid < 2) throw ConfigError("space.grid: needs at least 2 points");
    } else {
        if (space.atoms < 2) throw ConfigError("space.atoms: needs at least 2 atoms");
        if (x0.size() != space.atoms) throw ConfigError("scheme.x0: needs space.atoms weights");
        if (!space.reference.empty() && space.reference.size() != space.atoms)
            throw ConfigError("space.reference: needs space.atoms entries");
        if (!space.support.empty() && space.support.size() != space.atoms)
            throw ConfigError("space.support: needs space.atoms positions");
        if (space.bounds && !(space.bounds->first > 0.0 && space.bounds->first < space.bounds->second))
            throw ConfigError("space.bounds: need 0 < a < b");
    }
    if (!(tau > 0.0)) throw ConfigError("scheme.tau: must be positive");
    if (!(horizon > 0.0)) throw ConfigError("scheme.horizon: must be positive");
    if (!(tau_bar > 0.0)) throw ConfigError("energy.tau_bar: must be positive");
    if (!(tau < tau_bar)) throw ConfigError("scheme.tau: must be below energy.tau_bar");
    if (!(solver_tolerance > 0.0)) throw ConfigError("scheme.solver_tolerance: must be positive");
    if (checks.empty()) throw ConfigError("checks: list at least one check");
    std::set<std::string> seen;
    for (const auto& c : checks) {
        const auto& k = known_checks();
        if (std::find(k.begin(), k.end(), c) == k.end()) throw ConfigError("checks: unknown check '" + c + "'");
        if (!seen.insert(c).second) throw ConfigError("checks: '" + c + "' listed twice");
    }
    for (const auto& [k, v] : tolerances) {
        if (!seen.count(k)) throw ConfigError("tolerances." + k + ": not a listed check");
        if (!(v >= 0.0)) throw ConfigError("tolerances." + k + ": must be non-negative");
    }
    const auto& p = check_params;
    for (double t : p.error_taus)
        if (!(t > 0.0)) throw ConfigError("check_params.error_taus: must be positive");
    if (p.checkpoints < 2) throw ConfigError("check_params.checkpoints: needs at least 2");
    if (p.test_points == 0) throw ConfigError("check_params.test_points: must be positive");
    for (const auto& pr : p.pairs)
        if (pr.s < 0.0 || pr.t < pr.s) throw ConfigError("check_params.pairs: need 0 <= s <= t");
}

ExperimentConfig parse_config(const std::string& text, const std::string& origin) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError(origin + ":" + std::to_string(e.mark.line + 1) + ":" + std::to_string(e.mark.column + 1) +
                          ": " + e.msg);
    }
    if (!root || root.IsNull()) throw ConfigError(origin + ": empty configuration");
    Reader top(root, "", origin);
    top.strict({"name", "seed", "space", "cost", "energy", "scheme", "checks", "check_params", "tolerances", "output"});
    ExperimentConfig cfg;
    top.read("name", cfg.name);
    top.read("seed", cfg.seed);
    top.read("cost", cfg.cost);
    top.read("output", cfg.output);

    if (top.has("space")) {
        Reader s = top.sub("space");
        s.strict({"kind", "dim", "lo", "hi", "grid", "atoms", "resolution", "reference", "bounds", "support"});
        auto& sp = cfg.space;
        s.read("kind", sp.kind);
        s.read("dim", sp.dim);
        if (s.has("lo")) {
            const YAML::Node n = s.get("lo");
            if (n.IsScalar()) sp.lo.assign(sp.dim, n.as<double>()); else s.read("lo", sp.lo);
        } else {
            sp.lo.assign(sp.dim, -2.0);
        }
        if (s.has("hi")) {
            const YAML::Node n = s.get("hi");
            if (n.IsScalar()) sp.hi.assign(sp.dim, n.as<double>()); else s.read("hi", sp.hi);
        } else {
            sp.hi.assign(sp.dim, 2.0);
        }
        s.read("grid", sp.grid);
        s.read("atoms", sp.atoms);
        s.read("resolution", sp.resolution);
        s.read("reference", sp.reference);
        s.read_pair("bounds", sp.bounds);
        s.read("support", sp.support);
    }

    if (top.has("energy")) {
        Reader e = top.sub("energy");
        e.strict({"f", "g", "lambda_f", "lambda_g", "tau_bar"});
        if (e.has("f")) cfg.f = read_energy(e.get("f"), "energy.f", origin);
        if (e.has("g")) cfg.g = read_energy(e.get("g"), "energy.g", origin);
        e.read("lambda_f", cfg.lambda_f);
        e.read("lambda_g", cfg.lambda_g);
        e.read("tau_bar", cfg.tau_bar);
    }

    if (top.has("scheme")) {
        Reader s = top.sub("scheme");
        s.strict({"kind", "x0", "tau", "horizon", "ladder_depth", "solver", "solver_tolerance"});
        std::string kind = to_string(cfg.scheme), solver = to_string(cfg.solver);
        s.read("kind", kind);
        s.read("solver", solver);
        try {
            cfg.scheme = parse_scheme_kind(kind);
            cfg.solver = parse_solver_kind(solver);
        } catch (const Error& ex) {
            fail(s.node(), origin, ex.what());
        }
        s.read("x0", cfg.x0);
        s.read("tau", cfg.tau);
        s.read("horizon", cfg.horizon);
        s.read("ladder_depth", cfg.ladder_depth);
        s.read("solver_tolerance", cfg.solver_tolerance);
    }

    if (top.has("checks")) {
        const YAML::Node n = top.get("checks");
        if (!n.IsSequence()) fail(n, origin, "checks must be a list");
        top.read("checks", cfg.checks);
    }

    if (top.has("check_params")) {
        Reader c = top.sub("check_params");
        c.strict({"error_taus", "checkpoints", "test_points", "times", "h_ladder", "pairs", "quadrature_n", "lambda",
                  "contraction_x0", "minimizer", "t0", "phi_inf", "cert_tau", "mu", "slack", "t_grid",
                  "max_instances", "derivative_floor", "reference_budget"});
        auto& p = cfg.check_params;
        c.read("error_taus", p.error_taus);
        c.read("checkpoints", p.checkpoints);
        c.read("test_points", p.test_points);
        c.read("times", p.times);
        c.read("h_ladder", p.h_ladder);
        if (c.has("pairs")) {
            std::vector<std::vector<double>> raw;
            c.read("pairs", raw);
            p.pairs.clear();
            for (const auto& v : raw) {
                if (v.size() != 2) fail(c.get("pairs"), origin, "check_params.pairs entries need two numbers");
                p.pairs.push_back({v[0], v[1]});
            }
        }
        c.read("quadrature_n", p.quadrature_n);
        c.read_opt("lambda", p.lambda);
        c.read("contraction_x0", p.contraction_x0);
        c.read("minimizer", p.minimizer);
        c.read("t0", p.t0);
        c.read_opt("phi_inf", p.phi_inf);
        c.read_opt("cert_tau", p.cert_tau);
        c.read_opt("mu", p.mu);
        c.read("slack", p.slack);
        c.read("t_grid", p.t_grid);
        c.read("max_instances", p.max_instances);
        c.read("derivative_floor", p.derivative_floor);
        c.read("reference_budget", p.reference_budget);
    }

    if (top.has("tolerances")) {
        const YAML::Node n = top.get("tolerances");
        if (!n.IsMap()) fail(n, origin, "tolerances must be a table");
        top.read("tolerances", cfg.tolerances);
    }

    try {
        cfg.validate();
        // Label resolution errors surface at load time rather than mid-run.
        resolve_cost(cfg);
        resolve_split(cfg);
        make_point(cfg, cfg.x0);
    } catch (const ConfigError& e) {
        throw ConfigError(origin + ": " + e.what());
    } catch (const Error& e) {
        throw ConfigError(origin + ": " + e.what());
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

nlohmann::json to_json(const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["name"] = cfg.name;
    j["seed"] = cfg.seed;
    const auto& s = cfg.space;
    j["space"] = {{"kind", s.kind},          {"dim", s.dim},   {"lo", s.lo},
                  {"hi", s.hi},              {"grid", s.grid}, {"atoms", s.atoms},
                  {"resolution", s.resolution}, {"reference", s.reference},
                  {"bounds", s.bounds ? nlohmann::json{s.bounds->first, s.bounds->second} : nlohmann::json(nullptr)},
                  {"support", s.support}};
    j["cost"] = cfg.cost;
    j["energy"] = {{"f", energy_json(cfg.f)},
                   {"g", energy_json(cfg.g)},
                   {"lambda_f", cfg.lambda_f},
                   {"lambda_g", cfg.lambda_g},
                   {"tau_bar", cfg.tau_bar}};
    j["scheme"] = {{"kind", to_string(cfg.scheme)},   {"x0", cfg.x0},
                   {"tau", cfg.tau},                  {"horizon", cfg.horizon},
                   {"ladder_depth", cfg.ladder_depth}, {"solver", to_string(cfg.solver)},
                   {"solver_tolerance", cfg.solver_tolerance}};
    j["checks"] = cfg.checks;
    const auto& p = cfg.check_params;
    nlohmann::json pairs = nlohmann::json::array();
    for (const auto& pr : p.pairs) pairs.push_back({pr.s, pr.t});
    auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
    j["check_params"] = {{"error_taus", p.error_taus},
                         {"checkpoints", p.checkpoints},
                         {"test_points", p.test_points},
                         {"times", p.times},
                         {"h_ladder", p.h_ladder},
                         {"pairs", pairs},
                         {"quadrature_n", p.quadrature_n},
                         {"lambda", opt(p.lambda)},
                         {"contraction_x0", p.contraction_x0},
                         {"minimizer", p.minimizer},
                         {"t0", p.t0},
                         {"phi_inf", opt(p.phi_inf)},
                         {"cert_tau", opt(p.cert_tau)},
                         {"mu", opt(p.mu)},
                         {"slack", p.slack},
                         {"t_grid", p.t_grid},
                         {"max_instances", p.max_instances},
                         {"derivative_floor", p.derivative_floor},
                         {"reference_budget", p.reference_budget}};
    j["tolerances"] = cfg.tolerances;
    j["output"] = cfg.output;
    return j;
}

std::string fingerprint(const ExperimentConfig& cfg) {
    const std::string text = to_json(cfg).dump();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace evilab
