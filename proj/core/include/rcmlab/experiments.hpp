#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rcmlab/environment.hpp"

namespace rcm {

/// One Monte Carlo sweep: experiment name, disorder parameters, box grid,
/// seed range, tolerance knobs. The config hash covers everything that can
/// change the computed rows (not threads, not the output path).
struct ExperimentConfig {
  std::string experiment;  // spectrum|localization|scaling|limit-law|traps|percolation|paths
  int dim = 2;
  std::string law_kind = "polynomial";  // polynomial|constant
  double gamma = 0.2;
  double const_c = 1.0;
  std::vector<int> n_grid;
  int seeds = 1;
  std::uint64_t seed_base = 1;
  double xi = 0.0;        // percolation threshold (0 = derive from p)
  double p = 0.0;         // open-edge probability (percolation/paths)
  double epsilon = 0.0;   // D_n exponent (0 = recipe from epsilon1)
  double epsilon1 = 0.0;  // localization exponent (0 = default recipe)
  double delta = 0.002;   // paths: quantile of the bad-edge threshold
  double tol = 1e-10;
  int threads = 1;
  std::string out;

  void validate() const;
  ConductanceLaw make_law() const;
  double effective_epsilon1() const;
  double effective_epsilon() const;

  std::string canonical() const;  // hash input
  std::string hash_hex() const;

  std::string to_json() const;
  static ExperimentConfig from_json(const std::string& text);
};

/// One (seed, n) outcome. Fields that an experiment does not produce are NaN.
struct RunRecord {
  std::string config_hash;
  std::uint64_t seed = 0;
  int n = 0;
  std::string status = "ok";
  double lambda1 = 0.0;
  double min_pi = 0.0;
  double psi1_zn_sq = 0.0;
  double mass_Dn = 0.0;
  double trap_count = 0.0;
  double quotient_stat = 0.0;
  long iters = 0;
  long wall_ms = 0;

  std::string csv_row() const;
  /// Row with the wall-time column blanked, for determinism comparisons.
  std::string csv_row_no_wall() const;
};

inline constexpr const char* kRunsCsvHeader =
    "config_hash,seed,n,status,lambda1,min_pi,psi1_zn_sq,mass_Dn,trap_count,quotient_stat,iters,"
    "wall_ms";

struct SweepResult {
  std::vector<RunRecord> records;     // (n, seed) order
  std::string summary_json;
  std::filesystem::path out_dir;
};

/// Execute the sweep: per-(seed, n) jobs on a worker pool, rows flushed to
/// runs.csv in (n, seed) order, then summary.json and plotdata/*.csv.
/// Module precondition failures become status tags, never abort the sweep.
SweepResult run(const ExperimentConfig& config);

struct SlopeFit {
  double slope = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
};

/// Least-squares slope of log(median lambda1) vs log n over OK records, with
/// seeded bootstrap CI (1000 resamples).
SlopeFit scaling_slope(std::span<const RunRecord> records);

/// Median of a sample (average of middle pair for even sizes).
double median(std::vector<double> values);

}  // namespace rcm
