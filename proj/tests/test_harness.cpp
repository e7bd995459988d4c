#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "evilab/config.hpp"
#include "evilab/error.hpp"
#include "evilab/experiment.hpp"
#include "evilab/presets.hpp"

#include <spdlog/spdlog.h>

using namespace evilab;

namespace {

const char* kMinimal = R"(name: tiny
space:
  kind: euclidean
  dim: 1
cost: sq_euclid
energy:
  g: quadratic
  lambda_g: 1
scheme:
  kind: implicit
  x0: [1.0]
  tau: 0.1
  horizon: 1
checks: [discrete_evi]
)";

std::string replace(std::string s, const std::string& from, const std::string& to) {
    auto at = s.find(from);
    REQUIRE(at != std::string::npos);
    return s.replace(at, from.size(), to);
}

std::string config_error(const std::string& text) {
    try {
        parse_config(text, "cfg.yaml");
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

std::size_t columns(const std::string& line) {
    std::size_t n = 1;
    bool quoted = false;
    for (char ch : line) {
        if (ch == '"') quoted = !quoted;
        if (ch == ',' && !quoted) ++n;
    }
    return n;
}

void check_csv_shape(const std::string& csv, std::size_t want) {
    std::istringstream in(csv);
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(columns(line) == want);
    while (std::getline(in, line))
        if (!line.empty()) CHECK(columns(line) == want);
}

}  // namespace

const bool quiet = [] {
    spdlog::set_level(spdlog::level::warn);
    return true;
}();

TEST_CASE("minimal config") {
    auto cfg = parse_config(kMinimal);
    CHECK(cfg.name == "tiny");
    CHECK(cfg.g.name == "quadratic");
    CHECK(cfg.check_params.checkpoints == 51);
    CHECK(fingerprint(cfg) == fingerprint(parse_config(kMinimal)));
    CHECK(fingerprint(cfg) != fingerprint(parse_config(replace(kMinimal, "tau: 0.1", "tau: 0.05"))));
}

TEST_CASE("unknown keys carry line and column") {
    auto msg = config_error(replace(kMinimal, "cost: sq_euclid", "cost: sq_euclid\nbogus: 1"));
    CHECK(msg.find("cfg.yaml:6:1") != std::string::npos);
    CHECK(msg.find("bogus") != std::string::npos);
    CHECK(config_error(replace(kMinimal, "  dim: 1", "  dim: 1\n  dimm: 2")).find("dimm") != std::string::npos);
}

TEST_CASE("validation errors") {
    auto over = replace(kMinimal, "  lambda_g: 1", "  lambda_g: 1\n  tau_bar: 0.05");
    CHECK(config_error(over).find("tau_bar") != std::string::npos);
    CHECK(config_error(replace(kMinimal, "cost: sq_euclid", "cost: wasserstein")).find("wasserstein") !=
          std::string::npos);
    CHECK_FALSE(config_error(replace(kMinimal, "[discrete_evi]", "[nope]")).empty());
    CHECK_FALSE(config_error(replace(kMinimal, "tau: 0.1", "tau: -1")).empty());
    CHECK_FALSE(config_error(replace(kMinimal, "x0: [1.0]", "x0: [1.0, 2.0]")).empty());
    CHECK_FALSE(config_error(replace(kMinimal, "tau: 0.1", "tau: fast")).empty());
    CHECK_FALSE(config_error("").empty());
}

TEST_CASE("labels") {
    auto l = parse_label("linear:V=[1,-0.5,0]");
    CHECK(l.name == "linear");
    REQUIRE(l.vectors.count("V"));
    CHECK(l.vectors["V"] == std::vector<double>{1.0, -0.5, 0.0});
    auto p = parse_label("sinkhorn:eps=0.5,max_iters=200");
    CHECK(p.name == "sinkhorn");
    CHECK(p.scalars["eps"] == 0.5);
    CHECK(p.scalars["max_iters"] == 200);
    CHECK(parse_label("bregman:entropy").name == "bregman:entropy");
    CHECK(parse_label("kl").scalars.empty());
    CHECK_THROWS_AS(parse_label("power:p=x"), ConfigError);
    CHECK_THROWS_AS(parse_label("linear:V=[1,2"), ConfigError);
}

TEST_CASE("cost and energy labels resolve") {
    auto cfg = parse_config(kMinimal);
    for (const char* label : {"sq_euclid", "power_dist:p=3", "power:p=2", "bregman:quadratic"}) {
        cfg.cost = label;
        CHECK_NOTHROW(resolve_cost(cfg));
    }
    cfg.cost = "power_dist:p=3";
    CHECK(resolve_cost(cfg)(Point::euclidean({0.0}), Point::euclidean({2.0})) == doctest::Approx(8.0));
    std::string d = replace(kMinimal, "kind: euclidean\n  dim: 1", "kind: density\n  atoms: 3");
    d = replace(replace(replace(d, "x0: [1.0]", "x0: [0.2, 0.3, 0.5]"), "cost: sq_euclid", "cost: kl"), "g: quadratic",
                "g: entropy");
    auto dens = parse_config(d);
    for (const char* label : {"kl", "bregman:entropy", "sinkhorn:eps=1"}) {
        dens.cost = label;
        CHECK_NOTHROW(resolve_cost(dens));
    }
    EnergySpec lin{"linear", {}, {1.0, 0.0, -1.0}, std::nullopt};
    CHECK(resolve_energy(lin, dens).at(Point::density({0.2, 0.3, 0.5})) == doctest::Approx(-0.3));
}

TEST_CASE("every preset parses and reports its name") {
    REQUIRE(presets().size() >= 7);
    for (const auto& p : presets()) {
        INFO(p.name);
        auto cfg = parse_config(p.yaml, p.name);
        CHECK(cfg.name == p.name);
    }
    CHECK_THROWS_AS(find_preset("missing"), ConfigError);
}

TEST_CASE("reference oracle") {
    auto q = parse_config(find_preset("quadratic-implicit").yaml);
    auto ref = reference_oracle(q);
    CHECK(ref.source.rfind("closed_form", 0) == 0);
    CHECK(ref(0.0)[0] == 1.0);
    CHECK(ref(1.0)[0] == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
    auto kl = parse_config(find_preset("kl-mirror").yaml);
    CHECK(reference_oracle(kl).source == "ladder:P+2");
}

TEST_CASE("exit code contract") {
    CHECK(exit_code(Verdict::pass) == 0);
    CHECK(exit_code(Verdict::fail) == 1);
    CHECK(exit_code(Verdict::inconclusive) == 2);
    std::map<std::string, int> want{{"quadratic-implicit", 0}, {"negative-control-concave", 1}, {"abs-kink", 2}};
    for (const auto& [name, code] : want) {
        INFO(name);
        auto e = run_experiment(parse_config(find_preset(name).yaml, name));
        CHECK(e.report.exit_code == code);
    }
}

TEST_CASE("quadratic suite passes all nine checks") {
    auto e = run_experiment(parse_config(find_preset("quadratic-implicit").yaml));
    REQUIRE(e.report.checks.size() == 9);
    for (const auto& c : e.report.checks) {
        INFO(c.check_name);
        CHECK(c.passed());
    }
}

TEST_CASE("negative control locates its violation") {
    auto e = run_experiment(parse_config(find_preset("negative-control-concave").yaml));
    REQUIRE(e.report.checks.size() == 1);
    const auto& r = e.report.checks[0];
    CHECK(r.verdict == Verdict::fail);
    CHECK(r.worst_location.step.has_value());
    CHECK(r.worst_location.test_point.has_value());
    CHECK_FALSE(r.violations.empty());
}

TEST_CASE("report document and artifacts") {
    auto e = run_experiment(parse_config(find_preset("quadratic-splitting").yaml));
    auto j = e.report.to_json();
    for (const char* k : {"tool_version", "name", "command", "fingerprint", "checks", "verdict", "exit_code"})
        CHECK(j.contains(k));
    for (const auto& c : j["checks"])
        for (const char* k : {"check_name", "pass", "worst_residual", "worst_location", "tolerance", "runtime_ms"})
            CHECK(c.contains(k));
    auto s = strip_runtime(j);
    CHECK_FALSE(s.contains("runtime_ms"));
    CHECK_FALSE(s["checks"][0].contains("runtime_ms"));

    std::size_t dim = e.artifacts.runs.at(0).records.at(0).x.dim();
    check_csv_shape(trajectory_csv(e.artifacts), 4 + dim);
    check_csv_shape(phi_plotdata_csv(e.artifacts), 3);
    check_csv_shape(cgap_plotdata_csv(e.artifacts), 3);
    check_csv_shape(residual_plotdata_csv(e.artifacts), 3);
    check_csv_shape(violations_csv(e.report), 7);

    auto dir = std::filesystem::temp_directory_path() / "evilab_harness_artifacts";
    std::filesystem::remove_all(dir);
    write_artifacts(e, dir.string());
    for (const char* f : {"report.json", "trajectory.csv", "plotdata_phi.csv", "plotdata_cgap.csv",
                          "plotdata_residual.csv", "violations.csv"})
        CHECK(std::filesystem::exists(dir / f));
    std::filesystem::remove_all(dir);
}

TEST_CASE("transform command writes the transform table") {
    auto cfg = parse_config(find_preset("quadratic-splitting").yaml);
    auto e = run_experiment(cfg, Command::transform);
    REQUIRE(e.artifacts.transform.has_value());
    check_csv_shape(transform_csv(e.artifacts), 3);
}

TEST_CASE("strict tolerances remove the engineering slack") {
    auto cfg = parse_config(find_preset("quadratic-implicit").yaml);
    cfg.checks = {"discrete_evi"};
    auto loose = run_experiment(cfg);
    auto strict = run_experiment(cfg, Command::run, RunOptions{true});
    CHECK(strict.report.checks[0].tolerance <= loose.report.checks[0].tolerance);
}
