#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "mvlab/config.hpp"
#include "mvlab/rate_table.hpp"

namespace mvlab {

/// Plain numeric table written as results/<name>.csv.
struct CsvTable {
  std::string name;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

struct RunReport {
  std::string experiment;
  std::vector<RateTable> tables;
  std::vector<CsvTable> extra;
  nlohmann::json metrics = nlohmann::json::object();
  std::map<std::string, bool> flags;
  std::map<std::string, double> runtimes;
  std::vector<std::string> labels;  // e.g. "out-of-theory: ..."

  bool passed() const;
  const RateTable& table(const std::string& name) const;
};

RunReport cmd_sample_noise(const ExperimentConfig& cfg);
RunReport cmd_rates_euler_strong(const ExperimentConfig& cfg);
RunReport cmd_rates_euler_weak(const ExperimentConfig& cfg);
RunReport cmd_poc_strong(const ExperimentConfig& cfg);
RunReport cmd_poc_weak(const ExperimentConfig& cfg);
RunReport cmd_commute(const ExperimentConfig& cfg);
RunReport cmd_picard(const ExperimentConfig& cfg);
RunReport cmd_pde_compare(const ExperimentConfig& cfg);
RunReport cmd_besov_smoothing(const ExperimentConfig& cfg);

const std::vector<std::string>& experiment_names();

/// Dispatches on cfg.experiment and records the total wall-clock time.
RunReport run_experiment(const ExperimentConfig& cfg);

nlohmann::json summary_json(const ExperimentConfig& cfg, const RunReport& report);

/// Writes config.echo.json, results/*.csv and summary.json into dir.
/// Refuses a directory that already holds a finalized run.
void write_run(const ExperimentConfig& cfg, const RunReport& report,
               const std::filesystem::path& dir);

std::string library_version();

}  // namespace mvlab
