#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mvlab/config.hpp"
#include "mvlab/experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{"mvlab: stable-noise McKean-Vlasov experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> threads;
  for (const auto& name : mvlab::experiment_names()) {
    auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
    sub->add_option("--config", config_path, "key=value config file");
    sub->add_option("--seed", seed, "override the seed");
    sub->add_option("--out", out, "run directory");
    sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  const std::string experiment = app.get_subcommands().front()->get_name();

  mvlab::ExperimentConfig cfg;
  try {
    cfg = config_path.empty() ? mvlab::ExperimentConfig::defaults(experiment)
                              : mvlab::load_config(config_path, experiment);
    if (seed) cfg.seed = *seed;
    if (threads) cfg.threads = *threads;
    if (out) cfg.out = *out;
    cfg.validate();
  } catch (const mvlab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }

  const auto dir = out ? std::filesystem::path(*out) : cfg.out / cfg.name;
  try {
    const auto report = mvlab::run_experiment(cfg);
    mvlab::write_run(cfg, report, dir);
    for (const auto& label : report.labels) std::cout << label << '\n';
    for (const auto& [flag, ok] : report.flags) {
      std::cout << (ok ? "PASS " : "FAIL ") << flag << '\n';
    }
    std::cout << "results in " << dir.string() << '\n';
    return report.passed() ? 0 : 1;
  } catch (const mvlab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
