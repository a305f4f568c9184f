#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "goafem/mesh.hpp"

namespace goafem {

enum class Strategy { A, B, C, PrimalOnly, DualOnly, Uniform };

Strategy strategy_from_string(const std::string& s);
std::string strategy_to_string(Strategy s);

struct MarkingConfig {
  Strategy strategy = Strategy::A;
  double theta = 0.5;  // in (0, 1]
};

// Minimal-cardinality Dörfler set: the unique greedy prefix of the squared
// indicators sorted descending (ties by ascending element index) whose sum
// reaches theta * total. All-zero indicators yield the empty set. The
// comparison carries a 1e-12 relative guard against roundoff in the prefix
// sums.
MarkedSet doerfler_min_set(const std::vector<double>& indicators2, double theta);

// Strategy A: the smaller of the two Dörfler sets; tie prefers the primal.
MarkedSet select_A(const MarkedSet& mark_u, const MarkedSet& mark_z);

// Strategy B: the smaller set W, enlarged by the #W largest-indicator
// elements of the other set (ranked by that set's own squared indicators,
// ties by ascending index). Result size <= 2 #W before union collapsing.
MarkedSet select_B(const MarkedSet& mark_u, const MarkedSet& mark_z,
                   const std::vector<double>& indicators2_u,
                   const std::vector<double>& indicators2_z);

// Strategy C: Dörfler marking for the combined indicators
// rho(T)^2 = eta_u(T)^2 * eta_z^2 + eta_u^2 * eta_z(T)^2. Asserts the
// identity sum(rho^2) = 2 eta_u^2 eta_z^2 to 1e-12 relative on every call.
MarkedSet select_C(const std::vector<double>& indicators2_u,
                   const std::vector<double>& indicators2_z, double total2_u, double total2_z,
                   double theta);

struct LevelRecord {
  std::int64_t ell = 0;
  std::int64_t n = 0;  // number of elements
  double eta_u = 0.0;
  double eta_z = 0.0;
  double product = 0.0;
  double goal_value = 0.0;
  bool has_goal_err = false;
  double goal_err = 0.0;
  std::int64_t marked = 0;
  std::string chosen;  // which estimator's set was chosen: u | z | rho | all
  std::int64_t ncum = 0;
};

struct AdaptiveHistory {
  std::vector<LevelRecord> levels;
  bool aborted = false;
  std::string abort_reason;
  // Free-form per-run diagnostics (closure ratio, estimator reduction,
  // linear-convergence lag, ...), one line each.
  std::vector<std::string> diagnostics;
};

struct StopRule {
  std::int64_t max_elements = 200000;
  std::int64_t max_levels = 0;  // 0 disables the level-count stop
  double tol = 0.0;             // 0 disables the tolerance stop
  bool tol_on_goal_err = false;
};

// One adaptive problem instance: owns the current mesh, can solve and
// estimate on it, and can replace it by a refined one.
class AdaptiveProblem {
 public:
  struct Level {
    std::vector<double> eta2_u;
    std::vector<double> eta2_z;
    double goal_value = 0.0;
    bool has_goal_err = false;
    double goal_err = 0.0;
  };

  virtual ~AdaptiveProblem() = default;
  virtual std::int64_t num_elements() const = 0;
  virtual Level solve_and_estimate() = 0;
  virtual void refine(const MarkedSet& marked) = 0;
  // Elements that must be marked at every step regardless of indicators
  // (e.g. weight-interpolation transition panels).
  virtual MarkedSet forced_marks() const { return {}; }
  // Optional per-level output hook (mesh or solution dumps).
  virtual void snapshot(const std::string& /*out_dir*/, std::int64_t /*level*/) const {}
};

// Solve -> estimate -> record -> mark -> refine until the stop rule fires.
// Solver failures abort with the history collected so far.
AdaptiveHistory adaptive_loop(AdaptiveProblem& problem, const MarkingConfig& config,
                              const StopRule& stop, const std::string& snapshot_dir = {},
                              std::int64_t snapshot_every = 0);

}  // namespace goafem
