#include "goafem/marking.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace goafem {

Strategy strategy_from_string(const std::string& s) {
  if (s == "A") return Strategy::A;
  if (s == "B") return Strategy::B;
  if (s == "C") return Strategy::C;
  if (s == "primal_only") return Strategy::PrimalOnly;
  if (s == "dual_only") return Strategy::DualOnly;
  if (s == "uniform") return Strategy::Uniform;
  throw std::invalid_argument("unknown strategy: " + s);
}

std::string strategy_to_string(Strategy s) {
  switch (s) {
    case Strategy::A: return "A";
    case Strategy::B: return "B";
    case Strategy::C: return "C";
    case Strategy::PrimalOnly: return "primal_only";
    case Strategy::DualOnly: return "dual_only";
    case Strategy::Uniform: return "uniform";
  }
  throw std::logic_error("invalid strategy value");
}

namespace {

// Element indices ordered by squared indicator descending, ties ascending.
std::vector<std::int32_t> sorted_by_indicator(const std::vector<double>& ind2) {
  std::vector<std::int32_t> order(ind2.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::int32_t a, std::int32_t b) {
    return ind2[a] > ind2[b];
  });
  return order;
}

}  // namespace

MarkedSet doerfler_min_set(const std::vector<double>& indicators2, double theta) {
  if (!(theta > 0.0) || theta > 1.0)
    throw std::invalid_argument("doerfler_min_set: theta must be in (0, 1]");
  for (double v : indicators2)
    if (!(v >= 0.0)) throw std::invalid_argument("doerfler_min_set: negative indicator");

  std::vector<std::int32_t> order = sorted_by_indicator(indicators2);
  double total = 0.0;
  for (double v : indicators2) total += v;
  if (total <= 0.0) return {};

  const double target = theta * total;
  const double guard = 1e-12 * total;
  double prefix = 0.0;
  std::vector<std::int32_t> chosen;
  for (std::int32_t i : order) {
    if (prefix >= target - guard) break;
    if (indicators2[i] <= 0.0) break;  // only zeros remain; prefix cannot grow
    prefix += indicators2[i];
    chosen.push_back(i);
  }
  if (prefix < target - guard)
    throw std::logic_error("doerfler_min_set: marking property unreachable");
  return MarkedSet::of(std::move(chosen));
}

MarkedSet select_A(const MarkedSet& mark_u, const MarkedSet& mark_z) {
  return mark_z.size() < mark_u.size() ? mark_z : mark_u;
}

MarkedSet select_B(const MarkedSet& mark_u, const MarkedSet& mark_z,
                   const std::vector<double>& indicators2_u,
                   const std::vector<double>& indicators2_z) {
  const bool dual_smaller = mark_z.size() < mark_u.size();
  const MarkedSet& small = dual_smaller ? mark_z : mark_u;
  const MarkedSet& other = dual_smaller ? mark_u : mark_z;
  const std::vector<double>& other_ind2 = dual_smaller ? indicators2_u : indicators2_z;

  std::vector<std::int32_t> ranked = other.idx;  // ascending index = tie order
  std::stable_sort(ranked.begin(), ranked.end(), [&](std::int32_t a, std::int32_t b) {
    return other_ind2[a] > other_ind2[b];
  });
  std::size_t take = std::min(small.size(), ranked.size());
  std::vector<std::int32_t> merged = small.idx;
  merged.insert(merged.end(), ranked.begin(), ranked.begin() + take);
  return MarkedSet::of(std::move(merged));
}

MarkedSet select_C(const std::vector<double>& indicators2_u,
                   const std::vector<double>& indicators2_z, double total2_u, double total2_z,
                   double theta) {
  if (indicators2_u.size() != indicators2_z.size())
    throw std::invalid_argument("select_C: indicator size mismatch");
  const std::size_t n = indicators2_u.size();
  std::vector<double> rho2(n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    rho2[i] = indicators2_u[i] * total2_z + total2_u * indicators2_z[i];
    sum += rho2[i];
  }
  const double expected = 2.0 * total2_u * total2_z;
  if (std::abs(sum - expected) > 1e-12 * std::max(sum, expected))
    throw std::logic_error("select_C: combined-indicator identity violated");
  if (expected <= 0.0) return {};
  return doerfler_min_set(rho2, theta);
}

namespace {

double sum_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

MarkedSet all_elements(std::int64_t n) {
  std::vector<std::int32_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  return MarkedSet::of(std::move(idx));
}

MarkedSet union_of(const MarkedSet& a, const MarkedSet& b) {
  if (b.empty()) return a;
  std::vector<std::int32_t> merged = a.idx;
  merged.insert(merged.end(), b.idx.begin(), b.idx.end());
  return MarkedSet::of(std::move(merged));
}

}  // namespace

AdaptiveHistory adaptive_loop(AdaptiveProblem& problem, const MarkingConfig& config,
                              const StopRule& stop, const std::string& snapshot_dir,
                              std::int64_t snapshot_every) {
  AdaptiveHistory history;
  std::int64_t ncum = 0;
  std::int64_t marked_cum = 0;
  const std::int64_t n0 = problem.num_elements();

  for (std::int64_t ell = 0;; ++ell) {
    AdaptiveProblem::Level lv;
    try {
      lv = problem.solve_and_estimate();
    } catch (const std::exception& e) {
      history.aborted = true;
      history.abort_reason = e.what();
      break;
    }
    const std::int64_t n = problem.num_elements();
    if (static_cast<std::int64_t>(lv.eta2_u.size()) != n ||
        static_cast<std::int64_t>(lv.eta2_z.size()) != n)
      throw std::logic_error("adaptive_loop: indicator count mismatch");

    const double total2_u = sum_of(lv.eta2_u);
    const double total2_z = sum_of(lv.eta2_z);
    LevelRecord rec;
    rec.ell = ell;
    rec.n = n;
    rec.eta_u = std::sqrt(total2_u);
    rec.eta_z = std::sqrt(total2_z);
    rec.product = rec.eta_u * rec.eta_z;
    rec.goal_value = lv.goal_value;
    rec.has_goal_err = lv.has_goal_err;
    rec.goal_err = lv.goal_err;
    ncum += n;
    rec.ncum = ncum;
    rec.chosen = "-";
    history.levels.push_back(rec);

    if (snapshot_every > 0 && !snapshot_dir.empty() && ell % snapshot_every == 0)
      problem.snapshot(snapshot_dir, ell);

    const bool tol_met =
        stop.tol > 0.0 && (stop.tol_on_goal_err ? (lv.has_goal_err && lv.goal_err <= stop.tol)
                                                : (rec.product <= stop.tol));
    if (n >= stop.max_elements || tol_met || (stop.max_levels > 0 && ell >= stop.max_levels))
      break;

    MarkedSet marked;
    std::string chosen;
    switch (config.strategy) {
      case Strategy::A: {
        MarkedSet mu = doerfler_min_set(lv.eta2_u, config.theta);
        MarkedSet mz = doerfler_min_set(lv.eta2_z, config.theta);
        chosen = mz.size() < mu.size() ? "z" : "u";
        marked = select_A(mu, mz);
        break;
      }
      case Strategy::B: {
        MarkedSet mu = doerfler_min_set(lv.eta2_u, config.theta);
        MarkedSet mz = doerfler_min_set(lv.eta2_z, config.theta);
        chosen = mz.size() < mu.size() ? "z" : "u";
        marked = select_B(mu, mz, lv.eta2_u, lv.eta2_z);
        break;
      }
      case Strategy::C:
        chosen = "rho";
        marked = select_C(lv.eta2_u, lv.eta2_z, total2_u, total2_z, config.theta);
        break;
      case Strategy::PrimalOnly:
        chosen = "u";
        marked = doerfler_min_set(lv.eta2_u, config.theta);
        break;
      case Strategy::DualOnly:
        chosen = "z";
        marked = doerfler_min_set(lv.eta2_z, config.theta);
        break;
      case Strategy::Uniform:
        chosen = "all";
        marked = all_elements(n);
        break;
    }
    marked = union_of(marked, problem.forced_marks());
    history.levels.back().marked = static_cast<std::int64_t>(marked.size());
    history.levels.back().chosen = chosen;
    if (marked.empty()) break;  // zero estimator: nothing left to drive

    marked_cum += static_cast<std::int64_t>(marked.size());
    try {
      problem.refine(marked);
    } catch (const std::exception& e) {
      history.aborted = true;
      history.abort_reason = e.what();
      break;
    }
    if (problem.num_elements() <= n)
      throw std::logic_error("adaptive_loop: refinement did not grow the mesh");
  }

  // Diagnostics: closure overhead and the product-halving lag.
  if (marked_cum > 0 && !history.levels.empty()) {
    double ratio = static_cast<double>(problem.num_elements() - n0) /
                   static_cast<double>(marked_cum);
    history.diagnostics.push_back("closure_ratio=" + std::to_string(ratio));
  }
  const auto& lvls = history.levels;
  std::int64_t lag = -1;
  for (std::int64_t cand = 1; cand < static_cast<std::int64_t>(lvls.size()); ++cand) {
    bool ok = true;
    for (std::size_t ell = 0; ell + cand < lvls.size(); ++ell)
      if (!(lvls[ell + cand].product <= 0.5 * lvls[ell].product)) {
        ok = false;
        break;
      }
    if (ok) {
      lag = cand;
      break;
    }
  }
  history.diagnostics.push_back("halving_lag=" +
                                (lag < 0 ? std::string("none") : std::to_string(lag)));
  return history;
}

}  // namespace goafem
