#pragma once

#include <optional>
#include <string>
#include <vector>

namespace mvlab {

struct RateRecord {
  double parameter = 0.0;
  double error = 0.0;
  double std_error = 0.0;
};

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// (parameter, error) records of one convergence experiment.
struct RateTable {
  std::string name;
  std::string parameter_name = "parameter";
  std::vector<RateRecord> records;
  std::optional<RateFit> fit;

  void add(double parameter, double error, double std_error = 0.0) {
    records.push_back({parameter, error, std_error});
  }
};

/// Least squares of log(error) on log(parameter). Requires at least three
/// records, strictly monotone parameters and positive values; throws
/// std::invalid_argument otherwise.
RateFit rate_fit(const RateTable& table);

/// rate_fit, stored into table.fit.
const RateFit& fit_in_place(RateTable& table);

}  // namespace mvlab
