#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "goafem/marking.hpp"
#include "goafem/problems.hpp"

namespace goafem {

// Flat key=value experiment description; every key can also be overridden
// from the command line.
struct ExperimentConfig {
  std::string problem = "exp1";  // exp1 | exp2 | bem_conf | bem_nonconf
  std::string strategy = "A";
  double theta = 0.5;
  int p = 0;  // polynomial degree; 0 = per-problem default (exp1: 3, exp2: 1)
  double nu = 1e-3;
  double epsilon = 0.3;
  std::int64_t max_elements = 200000;
  std::int64_t max_levels = 0;           // 0 disables the level-count stop
  int initial_refine = 0;                // BEM problems: uniform pre-refinement rounds
  double tol = 0.0;                      // 0 disables the tolerance stop
  std::string tol_quantity = "product";  // product | goal_err
  std::string out = "out";
  std::int64_t snapshot_every = 0;
  // FEM problems only: size of the hidden reference pass used to compute the
  // goal reference (0 = no reference).
  std::int64_t ref_max_elements = 0;
  // Externally supplied goal reference (NaN = unset); skips the hidden pass.
  double reference = std::nan("");
};

ExperimentConfig load_config(const std::string& path);
void apply_override(ExperimentConfig& cfg, const std::string& key, const std::string& value);

struct RateFit {
  std::string quantity;
  double slope = 0.0;
  std::int64_t window_begin = 0;  // first and last level of the fit window
  std::int64_t window_end = 0;
  double residual = 0.0;  // rms of the log-log fit residuals
};

// Least-squares slope of log(quantity) against log(N) over the trailing
// decade of N (all levels with N >= N_final / 10). Quantities: eta_u, eta_z,
// product, goal_err. Levels with non-positive (or absent) values are
// excluded; fewer than 4 usable points throws std::runtime_error.
RateFit fit_rate(const AdaptiveHistory& history, const std::string& quantity);

struct NcumResult {
  std::int64_t ncum = 0;
  bool reached = false;
};

// Cumulative element count of the first level meeting the tolerance on the
// chosen quantity; unreached tolerances return the final cumulative count
// with reached = false.
NcumResult ncum_at_tolerance(const AdaptiveHistory& history, double tol, bool on_goal_err);

std::unique_ptr<AdaptiveProblem> make_problem(const ExperimentConfig& cfg);

struct RunResult {
  AdaptiveHistory history;
  std::vector<RateFit> rates;
  double reference = std::nan("");  // resolved goal reference, if any
};

// One adaptive run: optional hidden reference pass, the adaptive loop, and
// the output files (history.csv, history.dat, rates.txt, diagnostics.txt,
// optional snapshots) in cfg.out.
RunResult run_experiment(const ExperimentConfig& cfg);

// Strategy x theta sweep to a fixed tolerance; each job runs independently
// with job-private output files in a subdirectory of base.out, and the
// summary lands in base.out/ncum.csv (columns strategy,theta,ncum,reached).
void run_sweep(const ExperimentConfig& base, const std::vector<std::string>& strategies,
               const std::vector<double>& thetas);

}  // namespace goafem
