#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "mvlab/config.hpp"
#include "mvlab/experiments.hpp"
#include "mvlab/io.hpp"

using namespace mvlab;
namespace fs = std::filesystem;

namespace {

ExperimentConfig parse(const std::string& text, const std::string& experiment) {
  std::istringstream in(text);
  return parse_config(in, experiment);
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("mvlab_unit_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("config parsing") {
    const auto c = parse(
        "experiment = rates_euler_strong\n"
        "alpha = 0.6\n"
        "horizon = 1.0\n"
        "h = 0.25, 0.125, 0.0625\n"
        "[kernel]\n"
        "type = gaussian_gradient\n"
        "width = 0.3\n"
        "[noise]\n"
        "structure = isotropic\n"
        "[run]\n"
        "dim = 2\n"
        "drift = pairwise\n"
        "seed = 42\n",
        "rates_euler_strong");
    CHECK(c.alpha == 0.6);
    CHECK(c.steps == std::vector<std::size_t>{4, 8, 16});
    CHECK(c.kernel == "gaussian_gradient");
    CHECK(c.make_kernel().kind() == KernelKind::GaussianGradient);
    CHECK(c.make_noise().structure() == NoiseStructure::Isotropic);
    CHECK(c.drift == DriftMethod::Pairwise);
    CHECK(c.seed == 42);
    CHECK(c.sizes == ExperimentConfig::defaults("rates_euler_strong").sizes);

    const auto atoms = parse("structure = discrete\ndim = 2\natoms = 1 0; 0 1\nweights = 1, 2\n",
                             "sample_noise");
    REQUIRE(atoms.atoms.size() == 2);
    CHECK(atoms.atoms[1].weight == 2.0);
    CHECK(atoms.make_noise().structure() == NoiseStructure::DiscreteSpherical);
  }

  TEST_CASE("config errors") {
    const std::string e = "rates_euler_strong";
    CHECK_THROWS_AS(parse("alpha = 1.5\n", e), ConfigError);
    CHECK_THROWS_AS(parse("alpha = 0\n", e), ConfigError);
    CHECK_THROWS_AS(parse("colour = red\n", e), ConfigError);
    CHECK_THROWS_AS(parse("alpha = 0.5\nalpha = 0.6\n", e), ConfigError);
    CHECK_THROWS_AS(parse("alpha = fast\n", e), ConfigError);
    CHECK_THROWS_AS(parse("steps = 3, 8\n", e), ConfigError);
    CHECK_THROWS_AS(parse("h = 0.3\n", e), ConfigError);
    CHECK_THROWS_AS(parse("experiment = picard\n", e), ConfigError);
    CHECK_THROWS_AS(parse("type = spline\n", e), ConfigError);
    CHECK_THROWS_AS(parse("structure = discrete\ndim = 2\natoms = 1 0\n", "sample_noise"), ConfigError);
    CHECK_THROWS_AS(parse("gamma = 0.9\n", e), ConfigError);
    CHECK_THROWS_AS(parse("drift = magic\n", e), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::defaults("flying"), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/config.ini", e), ConfigError);
  }

  TEST_CASE("regime flags and hashing") {
    auto c = ExperimentConfig::defaults("picard");
    c.alpha = 0.8;
    c.beta = 0.3;
    CHECK(c.weak_regime());
    CHECK_FALSE(c.strong_regime());
    c.beta = 0.7;
    CHECK(c.strong_regime());
    c.beta = 0.1;
    CHECK_FALSE(c.weak_regime());
    CHECK(c.regime_json()["weak_threshold"].get<double>() == doctest::Approx(0.2));
    auto d = c;
    d.threads = 4;
    d.out = "elsewhere";
    CHECK(d.hash() == c.hash());
    d.seed = 2;
    CHECK(d.hash() != c.hash());
    CHECK(fnv1a("") == 0xcbf29ce484222325ull);
    CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cull);
  }

  TEST_CASE("io round trips") {
    const auto dir = scratch("io");
    Cloud a(0.0, 2, {1.0, 2.0, 3.0, 4.0});
    Cloud b(0.5, 2, {-1.0, 0.1, 1e-300, 5.0});
    write_snapshot(dir / "s.bin", {a, b});
    const auto back = read_snapshot(dir / "s.bin");
    REQUIRE(back.size() == 2);
    CHECK(back[1].positions == b.positions);
    CHECK(back[1].time == 0.5);
    CHECK(back[0].ids == a.ids);
    CHECK(slurp(dir / "s.bin").substr(0, 8) == "MVLSNAP1");
    CHECK_THROWS_AS(write_snapshot(dir / "x.bin", {a, Cloud(0.0, 1, {1.0})}), std::invalid_argument);
    { std::ofstream(dir / "bad.bin") << "NOTASNAP"; }
    CHECK_THROWS_AS(read_snapshot(dir / "bad.bin"), std::runtime_error);

    MeasureFlow flow;
    flow.horizon = 1.0;
    flow.steps = 1;
    flow.clouds = {Cloud(0.0, 1, {0.0, 1.0}), Cloud(1.0, 1, {0.5, 1.5})};
    flow.provenance = "picard:3";
    write_flow(dir / "flow", flow);
    const auto f2 = read_flow(dir / "flow");
    CHECK(f2.provenance == "picard:3");
    CHECK(f2.clouds[1].positions == flow.clouds[1].positions);

    GridField g(2.0, 8, 1);
    for (std::size_t i = 0; i < 8; ++i) g.values[i] = 0.1 * static_cast<double>(i);
    write_grid_field(dir / "g", g);
    const auto g2 = read_grid_field(dir / "g");
    CHECK(g2.values == g.values);
    CHECK(g2.half_length == 2.0);

    RateTable t{"demo", "h", {{0.5, 0.25, 0.0}}, {}};
    write_rate_table_csv(dir / "t.csv", t);
    CHECK(slurp(dir / "t.csv") == "parameter,error,stderr\n0.5,0.25,0\n");
    CHECK(format_double(0.1) == "0.1");
    CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
    Trajectory tr;
    tr.clouds = {a};
    write_trajectory_csv(dir / "tr.csv", tr);
    CHECK(slurp(dir / "tr.csv") == "time,path,x1,x2\n0,0,1,2\n0,1,3,4\n");
    fs::remove_all(dir);
  }

  TEST_CASE("zero kernel commands are exact") {
    auto c = ExperimentConfig::defaults("rates_euler_strong");
    c.kernel = "zero";
    c.sizes = {32};
    c.steps = {4, 8, 16};
    c.reference_steps = 64;
    c.checkpoints = 4;
    const auto r = run_experiment(c);
    CHECK(r.flags.at("exact"));
    CHECK(r.passed());
    CHECK(r.runtimes.count("total_seconds"));

    auto p = ExperimentConfig::defaults("poc_strong");
    p.kernel = "zero";
    p.sizes = {8, 32};
    p.steps = {16};
    p.points = 256;
    p.checkpoints = 16;
    const auto rp = run_experiment(p);
    CHECK(rp.flags.at("exact"));
    CHECK(rp.flags.at("flow_converged"));
  }

  TEST_CASE("small runs write a complete directory once") {
    auto c = ExperimentConfig::defaults("picard");
    c.points = 500;
    c.steps = {16};
    c.tol = 0.05;
    const auto r = run_experiment(c);
    CHECK(r.flags.count("converged"));
    const auto dir = scratch("run");
    write_run(c, r, dir);
    CHECK(fs::exists(dir / "config.echo.json"));
    CHECK(fs::exists(dir / "results" / "picard_history.csv"));
    const auto j = nlohmann::json::parse(slurp(dir / "summary.json"));
    CHECK(j["experiment"] == "picard");
    CHECK(j["passed"].get<bool>() == r.passed());
    CHECK(j["version"].get<std::string>().rfind(library_version(), 0) == 0);
    CHECK_THROWS_AS(write_run(c, r, dir), std::runtime_error);
    fs::remove_all(dir);
  }

  TEST_CASE("results do not depend on the thread count") {
    auto c = ExperimentConfig::defaults("commute");
    c.sizes = {4, 16};
    c.steps = {4, 16};
    c.pool = 64;
    auto c3 = c;
    c3.threads = 3;
    const auto a = run_experiment(c);
    const auto b = run_experiment(c3);
    CHECK(a.metrics["matrix"] == b.metrics["matrix"]);
    CHECK(a.flags == b.flags);

    auto s = ExperimentConfig::defaults("sample_noise");
    s.cf_draws = 20000;
    s.moment_draws = 5000;
    s.moment_levels = {4, 5, 6};
    auto s3 = s;
    s3.threads = 3;
    const auto x = run_experiment(s);
    const auto y = run_experiment(s3);
    CHECK(x.metrics == y.metrics);
    CHECK(x.tables[0].records.size() == 3);
  }
}
