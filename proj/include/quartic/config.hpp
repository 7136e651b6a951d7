#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace quartic {

// A band assertion on a named fit: |exponent - center| <= band.
struct FitAssertion {
  double center = 0.0;
  double band = 0.0;
};

// Flat dotted-key configuration, one "key = value" per line, '#' starts a comment.
struct ExperimentConfig {
  std::string experiment;  // classify | free-decay | perturbed-decay | resolvent-bounds | expansion-check | resonance-tune

  std::string profile = "zero";  // zero | gaussian | exponential | polynomial
  double coupling = 0.0;
  double parameter = 0.0;  // polynomial decay exponent
  double beta = 0.0;       // asserted decay; 0 keeps the profile default

  int grid_count = 64;
  double grid_r_max = 0.0;  // 0 picks a radius from the potential
  int ell_max = 2;

  double window_lo = 10.0;
  double window_hi = 1000.0;
  int window_samples = 15;
  std::string window_variable = "t";  // t | lambda | eta

  double tol = 1e-12;
  double classify_tol = 1e-7;

  // free-decay separations linspace(0, geometry_r_max, geometry_count);
  // perturbed-decay uses the default geometry grid, or geometry_count random
  // geometries drawn from `seed` when geometry_set = random.
  std::string geometry_set = "default";
  double geometry_r_max = 5.0;
  int geometry_count = 20;

  std::string subtract = "none";  // none | auto
  std::string f_window = "cutoff"; // cutoff | full
  double eta_end = 6.0;

  std::string sign = "plus";
  double s = 2.0;
  double s_prime = 2.0;
  int derivative = 0;

  std::string expansion_kind = "inverse";  // inverse | free
  double expansion_r = 1.0;

  int tune_ell = 0;
  double tune_lo = 0.0;
  double tune_hi = 0.0;

  std::map<std::string, FitAssertion> fit_assertions;  // fit name -> band
  std::string expect_verdict;                          // empty: no verdict assertion

  std::string output_dir = "out";
  std::string output_stem;  // empty: experiment name
  std::uint64_t seed = 0;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// Normalised form: every key in a fixed order, doubles with 17 significant digits.
std::string serialize_config(const ExperimentConfig& config);

// Throws ConfigError when windows or names are inconsistent.
void validate_config(const ExperimentConfig& config);

const std::vector<std::string>& experiment_names();

}  // namespace quartic
