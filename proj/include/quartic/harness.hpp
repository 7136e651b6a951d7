#pragma once

#include <string>
#include <vector>

#include "quartic/config.hpp"
#include "quartic/partial_waves.hpp"
#include "quartic/potential.hpp"

namespace quartic {

struct RunOutcome {
  std::string report;   // JSON, deterministic for a fixed config
  std::string csv;      // sample table, empty for experiments without samples
  std::string sidecar;  // timestamps, wall time and thread count
  bool pass = true;     // every in-config assertion held
  std::vector<std::string> files;
};

// Executes config.experiment and, when write_files is set, writes
// <dir>/<stem>.json, <stem>.csv and <stem>.meta.json.
RunOutcome run(const ExperimentConfig& config, bool write_files = true);

Potential make_potential(const ExperimentConfig& config);
Potential make_potential(const ExperimentConfig& config, double coupling);

// grid.r_max when positive; otherwise the support radius of a fast-decaying
// profile or default_r_max(beta) for a power law.
RadialGrid make_grid(const ExperimentConfig& config, const Potential& potential);

// '.' decimal separator, 17 significant digits.
std::string csv_number(double x);

}  // namespace quartic
