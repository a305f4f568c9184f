#include "goafem/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace goafem {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12e", v);
  return buf;
}

bool is_fem(const std::string& problem) { return problem == "exp1" || problem == "exp2"; }

int default_degree(const std::string& problem) { return problem == "exp1" ? 3 : 1; }

void write_history(const std::filesystem::path& dir, const AdaptiveHistory& history) {
  std::ofstream csv(dir / "history.csv");
  std::ofstream dat(dir / "history.dat");
  csv << "ell,N,eta_u,eta_z,product,goal_err,marked,chosen,ncum\n";
  dat << "# ell N eta_u eta_z product goal_err marked chosen ncum\n";
  std::int64_t prefix = 0;
  for (const LevelRecord& r : history.levels) {
    prefix += r.n;
    if (prefix != r.ncum) throw std::logic_error("write_history: ncum is not the prefix sum of N");
    std::string goal = r.has_goal_err ? fmt(r.goal_err) : "nan";
    csv << r.ell << ',' << r.n << ',' << fmt(r.eta_u) << ',' << fmt(r.eta_z) << ','
        << fmt(r.product) << ',' << goal << ',' << r.marked << ',' << r.chosen << ',' << r.ncum
        << '\n';
    dat << r.ell << ' ' << r.n << ' ' << fmt(r.eta_u) << ' ' << fmt(r.eta_z) << ' '
        << fmt(r.product) << ' ' << goal << ' ' << r.marked << ' ' << r.chosen << ' ' << r.ncum
        << '\n';
  }
}

void write_rates(const std::filesystem::path& dir, const std::vector<RateFit>& rates) {
  std::ofstream txt(dir / "rates.txt");
  std::ofstream dat(dir / "rates.dat");
  txt << "quantity,slope,window,residual\n";
  dat << "# quantity slope window residual\n";
  for (const RateFit& r : rates) {
    std::string win = std::to_string(r.window_begin) + "-" + std::to_string(r.window_end);
    txt << r.quantity << ',' << fmt(r.slope) << ',' << win << ',' << fmt(r.residual) << '\n';
    dat << r.quantity << ' ' << fmt(r.slope) << ' ' << win << ' ' << fmt(r.residual) << '\n';
  }
}

}  // namespace

void apply_override(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "problem") cfg.problem = value;
  else if (key == "strategy") cfg.strategy = value;
  else if (key == "theta") cfg.theta = std::stod(value);
  else if (key == "p") cfg.p = std::stoi(value);
  else if (key == "nu") cfg.nu = std::stod(value);
  else if (key == "epsilon") cfg.epsilon = std::stod(value);
  else if (key == "max_elements") cfg.max_elements = std::stoll(value);
  else if (key == "max_levels") cfg.max_levels = std::stoll(value);
  else if (key == "initial_refine") cfg.initial_refine = std::stoi(value);
  else if (key == "tol") cfg.tol = std::stod(value);
  else if (key == "tol_quantity") cfg.tol_quantity = value;
  else if (key == "out") cfg.out = value;
  else if (key == "snapshot_every") cfg.snapshot_every = std::stoll(value);
  else if (key == "ref_max_elements") cfg.ref_max_elements = std::stoll(value);
  else if (key == "reference") cfg.reference = std::stod(value);
  else throw std::invalid_argument("unknown config key: " + key);
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  ExperimentConfig cfg;
  std::string line;
  while (std::getline(in, line)) {
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto eq = t.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line is not key=value: " + line);
    apply_override(cfg, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  return cfg;
}

RateFit fit_rate(const AdaptiveHistory& history, const std::string& quantity) {
  auto pick = [&](const LevelRecord& r, double& v) {
    if (quantity == "eta_u") v = r.eta_u;
    else if (quantity == "eta_z") v = r.eta_z;
    else if (quantity == "product") v = r.product;
    else if (quantity == "goal_err") {
      if (!r.has_goal_err) return false;
      v = r.goal_err;
    } else {
      throw std::invalid_argument("fit_rate: unknown quantity " + quantity);
    }
    return v > 0.0;
  };

  if (history.levels.empty()) throw std::runtime_error("fit_rate: empty history");
  const double n_final = static_cast<double>(history.levels.back().n);
  std::vector<double> xs, ys;
  std::int64_t first = -1, last = -1;
  for (const LevelRecord& r : history.levels) {
    if (static_cast<double>(r.n) < n_final / 10.0) continue;
    double v;
    if (!pick(r, v)) continue;
    xs.push_back(std::log(static_cast<double>(r.n)));
    ys.push_back(std::log(v));
    if (first < 0) first = r.ell;
    last = r.ell;
  }
  if (xs.size() < 4)
    throw std::runtime_error("fit_rate: window collapsed for " + quantity + " (" +
                             std::to_string(xs.size()) + " usable points)");

  const std::size_t m = xs.size();
  double xbar = 0.0, ybar = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    xbar += xs[i];
    ybar += ys[i];
  }
  xbar /= static_cast<double>(m);
  ybar /= static_cast<double>(m);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxy += (xs[i] - xbar) * (ys[i] - ybar);
    sxx += (xs[i] - xbar) * (xs[i] - xbar);
  }
  RateFit fit;
  fit.quantity = quantity;
  fit.slope = sxy / sxx;
  fit.window_begin = first;
  fit.window_end = last;
  double ss = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double e = ys[i] - (ybar + fit.slope * (xs[i] - xbar));
    ss += e * e;
  }
  fit.residual = std::sqrt(ss / static_cast<double>(m));
  return fit;
}

NcumResult ncum_at_tolerance(const AdaptiveHistory& history, double tol, bool on_goal_err) {
  for (const LevelRecord& r : history.levels) {
    double v = on_goal_err ? (r.has_goal_err ? r.goal_err : -1.0) : r.product;
    if (on_goal_err && !r.has_goal_err) continue;
    if (v <= tol) return {r.ncum, true};
  }
  return {history.levels.empty() ? 0 : history.levels.back().ncum, false};
}

std::unique_ptr<AdaptiveProblem> make_problem(const ExperimentConfig& cfg) {
  const int degree = cfg.p > 0 ? cfg.p : default_degree(cfg.problem);
  if (cfg.problem == "exp1")
    return std::make_unique<FemProblem>(make_corner_interaction_setup(degree));
  if (cfg.problem == "exp2")
    return std::make_unique<FemProblem>(make_transport_pulse_setup(degree, cfg.nu));
  if (cfg.problem == "bem_conf") {
    BemProblemSetup s = make_boundary_hat_setup();
    s.initial_refine = cfg.initial_refine;
    return std::make_unique<BemProblem>(s);
  }
  if (cfg.problem == "bem_nonconf") {
    BemProblemSetup s = make_boundary_characteristic_setup(cfg.epsilon);
    s.initial_refine = cfg.initial_refine;
    return std::make_unique<BemProblem>(s);
  }
  throw std::invalid_argument("unknown problem: " + cfg.problem);
}

RunResult run_experiment(const ExperimentConfig& cfg) {
  std::filesystem::path dir(cfg.out);
  std::filesystem::create_directories(dir);

  RunResult result;
  std::vector<std::string> prelude;

  std::unique_ptr<AdaptiveProblem> problem = make_problem(cfg);
  if (is_fem(cfg.problem)) {
    auto* fem = dynamic_cast<FemProblem*>(problem.get());
    if (!std::isnan(cfg.reference)) {
      fem->set_reference(cfg.reference);
      result.reference = cfg.reference;
      prelude.push_back("reference=" + fmt(cfg.reference) + " source=config");
    } else if (cfg.ref_max_elements > 0) {
      // Hidden reference pass: strategy B, theta = 0.5, run well past the
      // main resolution, then take the last goal value.
      std::unique_ptr<AdaptiveProblem> refp = make_problem(cfg);
      MarkingConfig mc{Strategy::B, 0.5};
      StopRule sr;
      sr.max_elements = cfg.ref_max_elements;
      AdaptiveHistory rh = adaptive_loop(*refp, mc, sr);
      if (rh.aborted || rh.levels.empty())
        throw std::runtime_error("reference pass failed: " + rh.abort_reason);
      const auto& lv = rh.levels;
      double ref = lv.back().goal_value;
      fem->set_reference(ref);
      result.reference = ref;
      std::string diag = "reference=" + fmt(ref) + " source=pass levels=" +
                         std::to_string(lv.size());
      if (lv.size() >= 3) {
        double d1 = std::abs(lv[lv.size() - 2].goal_value - lv[lv.size() - 3].goal_value);
        double d2 = std::abs(lv.back().goal_value - lv[lv.size() - 2].goal_value);
        diag += " richardson_d1=" + fmt(d1) + " richardson_d2=" + fmt(d2);
      }
      prelude.push_back(diag);
    }
  } else if (auto* bem = dynamic_cast<BemProblem*>(problem.get())) {
    result.reference = bem->reference();
    prelude.push_back("reference=" + fmt(bem->reference()) + " source=exact");
  }

  MarkingConfig mc{strategy_from_string(cfg.strategy), cfg.theta};
  StopRule sr;
  sr.max_elements = cfg.max_elements;
  sr.max_levels = cfg.max_levels;
  sr.tol = cfg.tol;
  sr.tol_on_goal_err = cfg.tol_quantity == "goal_err";
  result.history =
      adaptive_loop(*problem, mc, sr, dir.string(), cfg.snapshot_every);
  result.history.diagnostics.insert(result.history.diagnostics.begin(), prelude.begin(),
                                    prelude.end());

  write_history(dir, result.history);
  std::vector<std::string> quantities{"eta_u", "eta_z", "product"};
  bool any_goal = false;
  for (const LevelRecord& r : result.history.levels) any_goal |= r.has_goal_err;
  if (any_goal) quantities.push_back("goal_err");
  for (const std::string& q : quantities) {
    try {
      result.rates.push_back(fit_rate(result.history, q));
    } catch (const std::exception& e) {
      result.history.diagnostics.push_back(std::string("rate_skipped ") + q + ": " + e.what());
    }
  }
  write_rates(dir, result.rates);

  std::ofstream diag(dir / "diagnostics.txt");
  for (const std::string& d : result.history.diagnostics) diag << d << '\n';
  if (result.history.aborted) diag << "aborted: " << result.history.abort_reason << '\n';
  return result;
}

void run_sweep(const ExperimentConfig& base, const std::vector<std::string>& strategies,
               const std::vector<double>& thetas) {
  std::filesystem::path dir(base.out);
  std::filesystem::create_directories(dir);

  ExperimentConfig shared = base;
  // Resolve the goal reference once so every job compares against the same
  // number (FEM problems; BEM references are analytic and cheap).
  if (is_fem(base.problem) && std::isnan(base.reference) && base.ref_max_elements > 0) {
    std::unique_ptr<AdaptiveProblem> refp = make_problem(base);
    MarkingConfig mc{Strategy::B, 0.5};
    StopRule sr;
    sr.max_elements = base.ref_max_elements;
    AdaptiveHistory rh = adaptive_loop(*refp, mc, sr);
    if (rh.aborted || rh.levels.empty())
      throw std::runtime_error("sweep reference pass failed: " + rh.abort_reason);
    shared.reference = rh.levels.back().goal_value;
  }

  std::ofstream csv(dir / "ncum.csv");
  csv << "strategy,theta,ncum,reached\n";
  for (const std::string& s : strategies) {
    for (double th : thetas) {
      ExperimentConfig job = shared;
      job.strategy = s;
      job.theta = th;
      char sub[64];
      std::snprintf(sub, sizeof(sub), "%s_%.2f", s.c_str(), th);
      job.out = (dir / sub).string();
      RunResult rr = run_experiment(job);
      NcumResult nc =
          ncum_at_tolerance(rr.history, job.tol, job.tol_quantity == "goal_err");
      char theta_s[16];
      std::snprintf(theta_s, sizeof(theta_s), "%.2f", th);
      csv << s << ',' << theta_s << ',' << nc.ncum << ',' << (nc.reached ? 1 : 0) << '\n';
    }
  }
}

}  // namespace goafem
