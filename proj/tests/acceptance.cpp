// Acceptance suite: end-to-end checks of the adaptive FEM/BEM toolkit at
// benchmark scale. Every check is always on; the binary prints one [PASS]
// line per criterion and stops with [FAIL] and a nonzero exit code on the
// first violated requirement.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "goafem/harness.hpp"

#define REQUIRE(cond, msg)                                                  \
  do {                                                                      \
    if (!(cond)) {                                                          \
      std::printf("[FAIL] %s:%d %s\n", __FILE__, __LINE__, msg);            \
      std::exit(1);                                                         \
    }                                                                       \
  } while (0)

using namespace goafem;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Mesh2 four_triangle_root() {
  return Mesh2::from_root(
      {{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}, {0.5, 0.5}},
      {{0, 1, 4}, {1, 2, 4}, {2, 3, 4}, {3, 0, 4}});
}

MarkedSet random_marks(const Mesh2& m, std::mt19937& rng) {
  std::uniform_int_distribution<int> count(1, 3);
  std::uniform_int_distribution<std::int32_t> pick(0, static_cast<std::int32_t>(m.num_triangles()) - 1);
  std::vector<std::int32_t> idx;
  for (int k = count(rng); k > 0; --k) idx.push_back(pick(rng));
  return MarkedSet::of(std::move(idx));
}

using TriKey = std::tuple<std::int32_t, std::uint64_t, std::uint64_t, std::int32_t>;

std::set<TriKey> leaf_keys(const Mesh2& m) {
  std::set<TriKey> keys;
  for (const Triangle& t : m.triangles())
    keys.insert({t.root, t.path.hi, t.path.lo, t.path.depth});
  return keys;
}

std::size_t brute_force_min_cardinality(const std::vector<double>& v2, double theta) {
  const int n = static_cast<int>(v2.size());
  double total = std::accumulate(v2.begin(), v2.end(), 0.0);
  if (total <= 0.0) return 0;
  std::size_t best = static_cast<std::size_t>(n);
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      if (mask & (1u << i)) s += v2[static_cast<std::size_t>(i)];
    if (s >= theta * total - 1e-12 * total)
      best = std::min(best, static_cast<std::size_t>(__builtin_popcount(mask)));
  }
  return best;
}

// ---------------------------------------------------------------------------
// 1. Mesh and marking axioms.

void check_mesh_axioms() {
  std::mt19937 rng(2024);

  // Refinement sequences: conformity and the sons bound on every step.
  for (int seq = 0; seq < 500; ++seq) {
    Mesh2 m = four_triangle_root();
    std::uniform_int_distribution<int> steps(2, 6);
    int ns = steps(rng);
    for (int s = 0; s < ns; ++s) {
      MarkedSet marks = random_marks(m, rng);
      Mesh2 next = nvb_refine(m, marks);
      next.audit();
      std::set<TriKey> old_keys = leaf_keys(m);
      std::set<TriKey> new_keys = leaf_keys(next);
      std::int64_t removed = 0;
      for (const TriKey& k : old_keys) removed += new_keys.count(k) ? 0 : 1;
      REQUIRE(removed + m.num_triangles() <= next.num_triangles(),
              "refinement sons bound violated");
      for (std::int32_t i : marks.idx) {
        const Triangle& t = m.tri(i);
        REQUIRE(!new_keys.count({t.root, t.path.hi, t.path.lo, t.path.depth}),
                "marked element survived refinement");
      }
      m = std::move(next);
    }
  }

  // Overlay pairs: coarsest-common-refinement cardinality bound.
  for (int rep = 0; rep < 200; ++rep) {
    Mesh2 root = four_triangle_root();
    Mesh2 a = root, b = root;
    std::uniform_int_distribution<int> steps(1, 5);
    for (int s = steps(rng); s > 0; --s) a = nvb_refine(a, random_marks(a, rng));
    for (int s = steps(rng); s > 0; --s) b = nvb_refine(b, random_marks(b, rng));
    Mesh2 ov = overlay(a, b);
    ov.audit();
    REQUIRE(ov.num_triangles() <= a.num_triangles() + b.num_triangles() - root.num_triangles(),
            "overlay cardinality bound violated");
    std::set<TriKey> ov_keys = leaf_keys(ov);
    for (const Mesh2* part : {&a, &b}) {
      for (const Triangle& lt : part->triangles()) {
        for (const Triangle& ot : ov.triangles()) {
          if (ot.root != lt.root) continue;
          REQUIRE(!ot.path.ancestor_of(lt.path), "overlay is coarser than an input mesh");
        }
      }
    }
  }

  // Doerfler minimal-cardinality equivalence against exhaustive search.
  std::uniform_real_distribution<double> val(0.0, 1.0);
  std::uniform_int_distribution<int> size(1, 12);
  for (double theta : {0.3, 0.5, 0.7}) {
    for (int rep = 0; rep < 300; ++rep) {
      std::vector<double> v2(static_cast<std::size_t>(size(rng)));
      for (double& x : v2) x = val(rng);
      if (rep % 7 == 0) v2[rep % v2.size()] = 0.0;
      MarkedSet got = doerfler_min_set(v2, theta);
      double total = std::accumulate(v2.begin(), v2.end(), 0.0);
      double got_sum = 0.0;
      for (std::int32_t i : got.idx) got_sum += v2[static_cast<std::size_t>(i)];
      REQUIRE(got_sum >= theta * total - 1e-12 * total, "marked set misses the theta fraction");
      REQUIRE(got.size() == brute_force_min_cardinality(v2, theta),
              "marked set is not minimal");
    }
  }
}

// ---------------------------------------------------------------------------
// 2. FEM correctness.

Mesh2 uniform_refine(const Mesh2& mesh, int times) {
  Mesh2 m = mesh;
  for (int k = 0; k < times; ++k) {
    std::vector<std::int32_t> all(static_cast<std::size_t>(m.num_triangles()));
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<std::int32_t>(i);
    m = nvb_refine(m, MarkedSet::of(std::move(all)));
  }
  return m;
}

double fit_log_slope(const std::vector<double>& ns, const std::vector<double>& es) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < ns.size(); ++k) {
    double x = std::log(ns[k]), y = std::log(es[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  double n = static_cast<double>(ns.size());
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

void check_fem_correctness() {
  Mesh2 base = Mesh2::from_root({{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}},
                                {{0, 1, 2}, {1, 3, 2}});
  std::mt19937 rng(7);
  Mesh2 m = base;
  for (int s = 0; s < 6; ++s) m = nvb_refine(m, random_marks(m, rng));

  // Patch test: solutions inside the space are reproduced at the dofs.
  struct Case {
    int p;
    std::function<double(Vec2)> u;
  };
  const std::vector<Case> cases = {
      {1, [](Vec2 x) { return 1.0 + 2.0 * x.x + 3.0 * x.y; }},
      {2, [](Vec2 x) { return x.x * x.x + x.x * x.y - x.y * x.y + x.x; }},
      {3, [](Vec2 x) { return x.x * x.x * x.x - 3.0 * x.x * x.y * x.y; }},
  };
  for (const Case& c : cases) {
    FESpace space(m, c.p);
    EllipticCoefficients coeffs;
    DiscreteFunction lift = lift_dirichlet(space, c.u);
    DiscreteFunction U = solve(assemble_primal(space, coeffs, LoadData{}, &lift), space);
    double worst = 0.0;
    for (std::int64_t d = 0; d < space.num_dofs(); ++d)
      worst = std::max(worst, std::abs(U.coeff[d] - c.u(space.dof_point(d))));
    REQUIRE(worst <= 1e-10, "patch test exceeded 1e-10");
  }

  // Dual matrix is the primal transpose (nonsymmetric coefficients).
  EllipticCoefficients tcoeffs;
  tcoeffs.c = {0.3};
  tcoeffs.has_b = true;
  tcoeffs.b0 = {0.0, 0.5};
  tcoeffs.b_lin = {0.0, 1.0, -1.0, 0.0};
  for (int p : {1, 2, 3}) {
    FESpace space(m, p);
    LinearSystem primal = assemble_primal(space, tcoeffs, LoadData{});
    LinearSystem dual = assemble_dual(space, tcoeffs, LoadData{});
    Eigen::SparseMatrix<double> diff =
        Eigen::SparseMatrix<double>(primal.A.transpose()) - dual.A;
    REQUIRE(diff.norm() <= 1e-14 * primal.A.norm(), "dual matrix is not the primal transpose");
  }

  // Galerkin residual of the direct solver.
  {
    FESpace space(m, 2);
    LoadData load;
    load.f1 = [](Vec2 x) { return std::sin(3.0 * x.x) + x.y; };
    LinearSystem sys = assemble_primal(space, tcoeffs, load);
    DiscreteFunction U = solve(sys, space);
    Eigen::VectorXd x_free(sys.free_dofs.size());
    for (std::size_t k = 0; k < sys.free_dofs.size(); ++k)
      x_free[static_cast<Eigen::Index>(k)] = U.coeff[sys.free_dofs[k]];
    REQUIRE((sys.rhs - sys.A * x_free).norm() <= 1e-10 * sys.rhs.norm(),
            "Galerkin residual exceeded 1e-10");
  }

  // Energy-norm convergence under uniform refinement: slope -p/2.
  const double pi = std::acos(-1.0);
  LoadData sload;
  sload.f1 = [pi](Vec2 x) {
    return 2.0 * pi * pi * std::sin(pi * x.x) * std::sin(pi * x.y);
  };
  auto grad_u = [pi](Vec2 x) -> Vec2 {
    return {pi * std::cos(pi * x.x) * std::sin(pi * x.y),
            pi * std::sin(pi * x.x) * std::cos(pi * x.y)};
  };
  for (int p : {1, 2, 3}) {
    std::vector<double> ns, errs;
    Mesh2 g = uniform_refine(base, 2);
    for (int level = 0; level < 5; ++level) {
      g = uniform_refine(g, 2);
      FESpace space(g, p);
      EllipticCoefficients coeffs;
      DiscreteFunction U = solve(assemble_primal(space, coeffs, sload), space);
      const TriangleRule& rule = TriangleRule::for_degree(10);
      double err2 = 0.0;
      for (std::int32_t t = 0; t < g.num_triangles(); ++t) {
        double a2 = 2.0 * g.area(t);
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
          Vec2 d = U.gradient(t, rule.points[q]) -
                   grad_u(space.map_to_physical(t, rule.points[q]));
          err2 += a2 * rule.weights[q] * norm2(d);
        }
      }
      ns.push_back(static_cast<double>(g.num_triangles()));
      errs.push_back(std::sqrt(err2));
    }
    double slope = fit_log_slope(ns, errs);
    std::printf("       energy slope p=%d: %+.3f\n", p, slope);
    REQUIRE(std::abs(slope + 0.5 * p) <= 0.15, "energy slope out of the -p/2 +- 0.15 band");
  }
}

// ---------------------------------------------------------------------------
// 3 & 4. FEM benchmark rates.

struct FemRunOutcome {
  AdaptiveHistory history;
  double final_layer_fraction = 0.0;  // elements with centroid within 0.1 of the boundary
};

FemRunOutcome run_fem(FemProblemSetup setup, double reference, bool has_ref, Strategy strategy,
                      double theta, std::int64_t max_elements) {
  FemProblem problem(std::move(setup));
  if (has_ref) problem.set_reference(reference);
  MarkingConfig mc{strategy, theta};
  StopRule stop;
  stop.max_elements = max_elements;
  FemRunOutcome out;
  out.history = adaptive_loop(problem, mc, stop);
  REQUIRE(!out.history.aborted, "adaptive run aborted");
  const Mesh2& mesh = problem.mesh();
  std::int64_t near = 0;
  for (std::int32_t t = 0; t < mesh.num_triangles(); ++t) {
    Vec2 c = mesh.centroid(t);
    double dist = std::min(std::min(c.x, c.y), std::min(1.0 - c.x, 1.0 - c.y));
    if (dist <= 0.1) ++near;
  }
  out.final_layer_fraction =
      static_cast<double>(near) / static_cast<double>(mesh.num_triangles());
  return out;
}

double slope_of(const AdaptiveHistory& h, const char* quantity) {
  RateFit fit = fit_rate(h, quantity);
  std::printf("       %-8s slope %+.3f (levels %lld-%lld, rms %.2e)\n", quantity, fit.slope,
              static_cast<long long>(fit.window_begin), static_cast<long long>(fit.window_end),
              fit.residual);
  return fit.slope;
}

// Goal-error slope restricted to the measurable part of the series. The
// computed |g(U_l) - g_ref| bottoms out at the double-precision evaluation
// floor of the assembly/solve/goal chain (observed plateau ~1e-14 absolute
// for a goal value of ~1.6e-3); once a level touches floor_abs every later
// measurement is dominated by arithmetic noise and carries no rate
// information, so the fit runs over the trailing decade of the levels before
// the first contact. A run whose goal error genuinely stagnates never gets
// near the floor, so this guard cannot hide a convergence failure.
double goal_slope_measurable(const AdaptiveHistory& h, double floor_abs) {
  AdaptiveHistory prefix;
  for (const LevelRecord& r : h.levels) {
    if (r.has_goal_err && r.goal_err > 0.0 && r.goal_err <= floor_abs) break;
    prefix.levels.push_back(r);
  }
  RateFit fit = fit_rate(prefix, "goal_err");
  const bool truncated = prefix.levels.size() < h.levels.size();
  std::printf("       %-8s slope %+.3f (levels %lld-%lld, rms %.2e%s)\n", "goal_err", fit.slope,
              static_cast<long long>(fit.window_begin), static_cast<long long>(fit.window_end),
              fit.residual, truncated ? ", pre-floor window" : "");
  return fit.slope;
}

void check_corner_interaction_rates() {
  // Hidden reference pass for the goal value.
  FemProblem refproblem(make_corner_interaction_setup(3));
  MarkingConfig refmc{Strategy::B, 0.5};
  StopRule refstop;
  refstop.max_elements = 150000;
  AdaptiveHistory refh = adaptive_loop(refproblem, refmc, refstop);
  REQUIRE(!refh.aborted, "reference pass aborted");
  const double reference = refh.levels.back().goal_value;
  std::printf("       reference %.12e from %lld elements\n", reference,
              static_cast<long long>(refh.levels.back().n));

  for (Strategy s : {Strategy::A, Strategy::B, Strategy::C}) {
    FemRunOutcome run = run_fem(make_corner_interaction_setup(3), reference, true, s, 0.5, 30000);
    std::printf("     strategy %s:\n", strategy_to_string(s).c_str());
    double su = slope_of(run.history, "eta_u");
    double sz = slope_of(run.history, "eta_z");
    double sp = slope_of(run.history, "product");
    double sg = goal_slope_measurable(run.history, 1e-12);
    REQUIRE(su >= -1.75 && su <= -1.25, "primal estimator slope out of [-1.75, -1.25]");
    REQUIRE(sz >= -1.75 && sz <= -1.25, "dual estimator slope out of [-1.75, -1.25]");
    REQUIRE(sp >= -3.4 && sp <= -2.6, "estimator product slope out of [-3.4, -2.6]");
    REQUIRE(sg <= -2.6, "goal-error slope above -2.6");
  }

  {
    FemRunOutcome run =
        run_fem(make_corner_interaction_setup(3), reference, true, Strategy::Uniform, 1.0, 30000);
    std::printf("     uniform:\n");
    double sp = slope_of(run.history, "product");
    REQUIRE(sp >= -1.3 && sp <= -0.7, "uniform product slope out of [-1.3, -0.7]");
  }
  {
    FemRunOutcome run = run_fem(make_corner_interaction_setup(3), reference, true,
                                Strategy::PrimalOnly, 0.5, 30000);
    std::printf("     primal-only:\n");
    double sp = slope_of(run.history, "product");
    REQUIRE(sp >= -2.3 && sp <= -1.7, "single-estimator product slope out of [-2.3, -1.7]");
  }
}

void check_transport_layer_rates() {
  FemRunOutcome run =
      run_fem(make_transport_pulse_setup(1, 1e-3), 0.0, false, Strategy::B, 0.6, 20000);
  double sp = slope_of(run.history, "product");
  std::printf("       boundary-layer element fraction %.3f\n", run.final_layer_fraction);
  REQUIRE(sp >= -1.25 && sp <= -0.8, "transport product slope out of [-1.25, -0.8]");
  REQUIRE(run.final_layer_fraction >= 0.40,
          "fewer than 40% of elements concentrate near the boundary");
}

// ---------------------------------------------------------------------------
// 5 & 6. BEM benchmark rates.

AdaptiveHistory run_bem(BemProblemSetup setup, Strategy strategy, double theta,
                        std::int64_t max_elements) {
  BemProblem problem(std::move(setup));
  MarkingConfig mc{strategy, theta};
  StopRule stop;
  stop.max_elements = max_elements;
  AdaptiveHistory h = adaptive_loop(problem, mc, stop);
  REQUIRE(!h.aborted, "boundary adaptive run aborted");
  return h;
}

void check_boundary_conforming_rates() {
  for (Strategy s : {Strategy::A, Strategy::B, Strategy::C}) {
    AdaptiveHistory h = run_bem(make_boundary_hat_setup(), s, 0.5, 4000);
    std::printf("     strategy %s:\n", strategy_to_string(s).c_str());
    double su = slope_of(h, "eta_u");
    double sz = slope_of(h, "eta_z");
    double sg = slope_of(h, "goal_err");
    REQUIRE(su >= -1.75 && su <= -1.25, "primal estimator slope out of [-1.75, -1.25]");
    REQUIRE(sz >= -1.75 && sz <= -1.25, "dual estimator slope out of [-1.75, -1.25]");
    REQUIRE(sg >= -3.5 && sg <= -2.5, "goal-error slope out of [-3.5, -2.5]");
  }
}

void check_boundary_nonconforming_rates() {
  {
    AdaptiveHistory h = run_bem(make_boundary_characteristic_setup(0.0), Strategy::A, 0.5, 2500);
    std::printf("     unscaled weights:\n");
    double sp = slope_of(h, "product");
    REQUIRE(sp >= -0.15, "estimator product decays although the weight is non-conforming");
  }
  {
    AdaptiveHistory h = run_bem(make_boundary_characteristic_setup(0.3), Strategy::A, 0.5, 4000);
    std::printf("     rescaled weights:\n");
    double sg = slope_of(h, "goal_err");
    REQUIRE(sg >= -3.5 && sg <= -2.5, "goal-error slope out of [-3.5, -2.5]");
  }
}

// ---------------------------------------------------------------------------
// 7. Layer-operator oracles.

void check_operator_oracles() {
  const double two_pi = 2.0 * std::acos(-1.0);

  // Self entries: closed form of the weakly singular double integral, also
  // cross-checked against adaptive outer quadrature of the inner potential.
  BoundaryMesh m = bisect_1d(Lshape::initial_mesh(), MarkedSet::of({0, 2, 5}));
  LayerOperatorAssembly va = assemble_V(m);
  for (std::int32_t i = 0; i < m.num_panels(); ++i) {
    double h = m.panel(i).h;
    double closed = h * h / two_pi * (1.5 - std::log(h));
    REQUIRE(std::abs(va.V(i, i) - closed) <= 1e-10, "self entry misses the closed form");
    Vec2 a = m.node(m.panel(i).a);
    Vec2 t = m.tangent(i);
    Vec2 b = m.node(m.panel(i).b);
    auto f = [&](double tau) { return log_potential(a + t * tau, a, b); };
    double quad = -adaptive_gauss(f, 0.0, h, 1e-14) / two_pi;
    REQUIRE(std::abs(va.V(i, i) - quad) <= 1e-10, "self entry misses independent quadrature");
  }

  // Fourier mode on a disk: application error decays under refinement.
  const double R = 0.3;
  const int k = 2;
  auto mode_error = [&](int n) {
    std::vector<Vec2> corners(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      double ang = two_pi * i / n;
      corners[static_cast<std::size_t>(i)] = {R * std::cos(ang), R * std::sin(ang)};
    }
    BoundaryMesh disk = BoundaryMesh::polygon(corners, 1e9);
    LayerOperatorAssembly dv = assemble_V(disk);
    Eigen::VectorXd U(n);
    for (int i = 0; i < n; ++i) {
      Vec2 mid = disk.midpoint(i);
      U[i] = std::cos(k * std::atan2(mid.y, mid.x));
    }
    Eigen::VectorXd got = dv.V * U;
    double err = 0.0;
    for (int i = 0; i < n; ++i) {
      Vec2 mid = disk.midpoint(i);
      double expect = R / (2.0 * k) * std::cos(k * std::atan2(mid.y, mid.x));
      err = std::max(err, std::abs(got[i] / disk.panel(i).h - expect));
    }
    return err;
  };
  double e64 = mode_error(64);
  double e128 = mode_error(128);
  std::printf("       disk mode error: n=64 %.3e, n=128 %.3e\n", e64, e128);
  REQUIRE(e128 < e64, "disk mode error does not decay under refinement");
  REQUIRE(e64 <= 5e-3, "disk mode error too large");

  // Jump identity for constant data: the double-layer potential of a
  // constant density has PV integral -1/2, so the assembled data for a
  // constant trace vanishes identically.
  DoubleLayerData data(Lshape::corners(), Lshape::phi, Lshape::grad_phi);
  BoundaryMesh m0 = Lshape::initial_mesh();
  for (std::int32_t p = 0; p < m0.num_panels(); ++p) {
    double smid = m0.panel(p).s0 + 0.5 * m0.panel(p).h;
    double g = data.gauss_integral(m0.midpoint(p), data.edge_of_s(smid));
    REQUIRE(std::abs(g + 0.5) <= 1e-10, "constant-density jump value is not -1/2");
  }
  Eigen::VectorXd rhs = assemble_rhs_dirichlet(m, [](Vec2) { return 1.0; });
  REQUIRE(rhs.lpNorm<Eigen::Infinity>() <= 1e-8, "constant trace leaves a nonzero data vector");
}

// ---------------------------------------------------------------------------
// 8. Cumulative-work comparison sweep.

void check_work_sweep() {
  ExperimentConfig base;
  base.problem = "exp1";
  base.p = 2;
  base.tol = 1e-4;
  base.tol_quantity = "product";
  base.max_elements = 100000;
  base.out = (std::filesystem::path("acceptance_out") / "sweep").string();
  std::filesystem::remove_all(base.out);

  const std::vector<std::string> strategies = {"A", "B", "C", "primal_only", "dual_only"};
  std::vector<double> thetas;
  for (int k = 1; k <= 9; ++k) thetas.push_back(0.1 * k);
  run_sweep(base, strategies, thetas);

  std::ifstream in(std::filesystem::path(base.out) / "ncum.csv");
  REQUIRE(in.good(), "sweep summary missing");
  std::string line;
  std::getline(in, line);  // header
  struct Row {
    std::string strategy;
    double theta;
    std::int64_t ncum;
    int reached;
  };
  std::vector<Row> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    Row r;
    std::string tok;
    std::getline(ss, r.strategy, ',');
    std::getline(ss, tok, ',');
    r.theta = std::stod(tok);
    std::getline(ss, tok, ',');
    r.ncum = std::stoll(tok);
    std::getline(ss, tok, ',');
    r.reached = std::stoi(tok);
    rows.push_back(r);
  }
  REQUIRE(rows.size() == strategies.size() * thetas.size(), "sweep summary is incomplete");

  std::map<std::string, std::int64_t> best;
  std::int64_t global_min = -1;
  for (const Row& r : rows) {
    REQUIRE(r.reached == 1, "a sweep job missed the tolerance");
    auto it = best.find(r.strategy);
    if (it == best.end() || r.ncum < it->second) best[r.strategy] = r.ncum;
    if (global_min < 0 || r.ncum < global_min) global_min = r.ncum;
  }
  for (const auto& [s, n] : best)
    std::printf("       best %-12s ncum %lld\n", s.c_str(), static_cast<long long>(n));

  bool min_is_b_mid_theta = false;
  for (const Row& r : rows)
    if (r.ncum == global_min && r.strategy == "B" && r.theta >= 0.5 - 1e-9 &&
        r.theta <= 0.8 + 1e-9)
      min_is_b_mid_theta = true;
  REQUIRE(min_is_b_mid_theta,
          "global work minimum is not attained by the joined marking at moderate theta");

  std::int64_t baseline = std::min(best.at("primal_only"), best.at("dual_only"));
  for (const char* s : {"A", "B", "C"})
    REQUIRE(best.at(s) < baseline, "a goal-oriented strategy loses to a single-estimator baseline");
}

struct Criterion {
  const char* name;
  void (*fn)();
};

}  // namespace

int main() {
  const Criterion criteria[] = {
      {"mesh refinement and marking axioms", check_mesh_axioms},
      {"fem correctness", check_fem_correctness},
      {"corner-interaction goal-driven rates", check_corner_interaction_rates},
      {"transport boundary-layer rates", check_transport_layer_rates},
      {"boundary conforming-weight rates", check_boundary_conforming_rates},
      {"boundary nonconforming-weight rates", check_boundary_nonconforming_rates},
      {"layer-operator oracles", check_operator_oracles},
      {"cumulative-work comparison sweep", check_work_sweep},
  };
  for (const Criterion& c : criteria) {
    std::printf("[ RUN] %s\n", c.name);
    std::fflush(stdout);
    auto t0 = std::chrono::steady_clock::now();
    c.fn();
    std::printf("[PASS] %s (%.1f s)\n", c.name, seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("all acceptance criteria passed\n");
  return 0;
}
