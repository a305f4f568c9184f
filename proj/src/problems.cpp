#include "goafem/problems.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace goafem {

Mesh2 square_mesh(int nx, int ny) {
  if (nx < 1 || ny < 1) throw std::invalid_argument("square_mesh: need at least 1x1 cells");
  std::vector<Vec2> verts;
  verts.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      verts.push_back({static_cast<double>(i) / nx, static_cast<double>(j) / ny});
  std::vector<std::array<std::int32_t, 3>> tris;
  tris.reserve(static_cast<std::size_t>(2 * nx * ny));
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      std::int32_t v00 = j * (nx + 1) + i;
      std::int32_t v10 = v00 + 1;
      std::int32_t v01 = v00 + (nx + 1);
      std::int32_t v11 = v01 + 1;
      tris.push_back({v00, v10, v01});  // anti-diagonal (v10, v01) is longest
      tris.push_back({v10, v11, v01});
    }
  return Mesh2::from_root(std::move(verts), std::move(tris));
}

// ---------------------------------------------------------------------------

FemProblem::FemProblem(FemProblemSetup setup) : setup_(std::move(setup)), mesh_(setup_.mesh0) {}

std::int64_t FemProblem::num_elements() const { return mesh_.num_triangles(); }

void FemProblem::set_reference(double ref) {
  setup_.goal.has_reference = true;
  setup_.goal.reference = ref;
}

AdaptiveProblem::Level FemProblem::solve_and_estimate() {
  FESpace space(mesh_, setup_.degree);
  FemSolver solver(space, setup_.coeffs);

  DiscreteFunction lift;
  bool has_lift = false;
  if (setup_.dirichlet) {
    lift = lift_dirichlet(space, setup_.dirichlet);
    has_lift = true;
  }
  DiscreteFunction U = solver.solve_primal(setup_.load, has_lift ? &lift : nullptr);

  DiscreteFunction Z;
  double goal_val = 0.0;
  if (setup_.goal.kind == GoalSpec::Kind::Volume) {
    Z = solver.solve_dual(setup_.goal.volume_load, nullptr);
    goal_val = goal_volume(U, setup_.goal.volume_load);
  } else {
    DiscreteFunction wlift = lift_dirichlet(space, setup_.goal.flux_weight);
    Z = solver.solve_dual(LoadData{}, &wlift);
    goal_val = goal_flux(Z, setup_.load);
    if (has_lift) goal_val += solver.bilinear(lift, Z);
  }

  EstimatorField eu = eta_primal(space, setup_.coeffs, setup_.load, U);
  EstimatorField ez = eta_dual(
      space, setup_.coeffs,
      setup_.goal.kind == GoalSpec::Kind::Volume ? setup_.goal.volume_load : LoadData{}, Z);

  Level out;
  out.eta2_u = std::move(eu.eta2);
  out.eta2_z = std::move(ez.eta2);
  out.goal_value = goal_val;
  out.has_goal_err = setup_.goal.has_reference;
  if (out.has_goal_err) out.goal_err = goal_error(goal_val, setup_.goal.reference);
  return out;
}

void FemProblem::refine(const MarkedSet& marked) {
  mesh_ = nvb_refine(mesh_, marked);
  mesh_.audit();
}

void FemProblem::snapshot(const std::string& out_dir, std::int64_t level) const {
  char name[64];
  std::snprintf(name, sizeof(name), "mesh_%04" PRId64 ".txt", level);
  std::ofstream out(std::filesystem::path(out_dir) / name);
  out << mesh_.dump();
}

// ---------------------------------------------------------------------------

FemProblemSetup make_corner_interaction_setup(int degree) {
  FemProblemSetup s;
  s.mesh0 = square_mesh(2, 2);
  s.degree = degree;
  // -Laplace U = -div(chi_{T_f} e1) with T_f the triangle at the origin;
  // goal g(v) = -int_{T_g} dv/dx1 over the mirrored triangle at (1,1).
  s.load.f2.assign(8, Vec2{0.0, 0.0});
  s.load.f2[0] = {1.0, 0.0};
  s.goal.kind = GoalSpec::Kind::Volume;
  s.goal.volume_load.f2.assign(8, Vec2{0.0, 0.0});
  s.goal.volume_load.f2[7] = {1.0, 0.0};
  return s;
}

FemProblemSetup make_transport_pulse_setup(int degree, double nu) {
  FemProblemSetup s;
  s.mesh0 = square_mesh(6, 6);
  s.degree = degree;
  s.coeffs.A = {Mat2::scale(nu)};
  s.coeffs.has_b = true;
  s.coeffs.b0 = {0.0, 0.5};
  s.coeffs.b_lin = Mat2{0.0, 1.0, -1.0, 0.0};  // b(x) = (x2, 1/2 - x1)
  auto bottom_pulse = [](double left, double peak, double right) {
    return [=](Vec2 x) {
      if (x.y > 1e-12 || x.x <= left || x.x >= right) return 0.0;
      return x.x <= peak ? (x.x - left) / (peak - left) : (right - x.x) / (right - peak);
    };
  };
  s.dirichlet = bottom_pulse(1.0 / 6.0, 1.0 / 3.0, 0.5);
  s.goal.kind = GoalSpec::Kind::Flux;
  s.goal.flux_weight = bottom_pulse(2.0 / 3.0, 5.0 / 6.0, 1.0);
  return s;
}

// ---------------------------------------------------------------------------

BemProblem::BemProblem(BemProblemSetup setup)
    : setup_(setup),
      mesh_(Lshape::initial_mesh()),
      data_(Lshape::corners(), [](Vec2 x) { return Lshape::phi(x); },
            [](Vec2 x) { return Lshape::grad_phi(x); }, setup.quad_tol),
      reference_(Lshape::goal_reference(setup.weight)) {
  for (int round = 0; round < setup_.initial_refine; ++round) {
    std::vector<std::int32_t> all(static_cast<std::size_t>(mesh_.num_panels()));
    for (std::int32_t p = 0; p < mesh_.num_panels(); ++p) all[static_cast<std::size_t>(p)] = p;
    mesh_ = bisect_1d(mesh_, MarkedSet::of(all));
  }
}

std::int64_t BemProblem::num_elements() const { return mesh_.num_panels(); }

AdaptiveProblem::Level BemProblem::solve_and_estimate() {
  const auto n = static_cast<std::int32_t>(mesh_.num_panels());
  LayerOperatorAssembly assembly = assemble_V(mesh_);

  Eigen::VectorXd rhs(n);
  for (std::int32_t p = 0; p < n; ++p) {
    const Panel& pl = mesh_.panel(p);
    auto it = rhs_cache_.find(pl.uid);
    if (it == rhs_cache_.end())
      it = rhs_cache_.emplace(pl.uid, panel_rhs_dirichlet(mesh_, p, data_)).first;
    rhs[p] = it->second;
  }

  BemFactor factor(assembly.V);
  Eigen::VectorXd U = factor.solve(rhs);

  WeightInterp wi = interp_weight(mesh_, setup_.weight);
  forced_ = wi.forced;
  Eigen::VectorXd Z = factor.solve(weight_load(mesh_, wi));

  std::vector<std::array<double, kEtaBemNodes>> dvals(static_cast<std::size_t>(n));
  for (std::int32_t p = 0; p < n; ++p) {
    const Panel& pl = mesh_.panel(p);
    auto it = dfds_cache_.find(pl.uid);
    if (it == dfds_cache_.end()) {
      std::array<double, kEtaBemNodes> row{};
      const Vec2 t = mesh_.tangent(p);
      const int edge = data_.edge_of_s(pl.s0 + 0.5 * pl.h);
      for (int q = 0; q < kEtaBemNodes; ++q)
        row[q] = data_.dFds(mesh_.point(p, eta_bem_node(q)), t, edge);
      it = dfds_cache_.emplace(pl.uid, row).first;
    }
    dvals[static_cast<std::size_t>(p)] = it->second;
  }
  BoundaryDerivFn dprimal = [&dvals](std::int32_t p, int q, const Vec2&, const Vec2&) {
    return dvals[static_cast<std::size_t>(p)][q];
  };
  EstimatorField eu = eta_bem(mesh_, U, dprimal, setup_.epsilon, false);

  std::vector<double> slope(static_cast<std::size_t>(n));
  for (std::int32_t p = 0; p < n; ++p) {
    const Panel& pl = mesh_.panel(p);
    slope[static_cast<std::size_t>(p)] =
        (wi.node_value[static_cast<std::size_t>(pl.b)] -
         wi.node_value[static_cast<std::size_t>(pl.a)]) /
        pl.h;
  }
  BoundaryDerivFn ddual = [&slope](std::int32_t p, int, const Vec2&, const Vec2&) {
    return slope[static_cast<std::size_t>(p)];
  };
  EstimatorField ez = eta_bem(mesh_, Z, ddual, setup_.epsilon, true);

  double goal_val = U.dot(weight_true_integrals(mesh_, setup_.weight));

  last_U_ = U;
  last_eta2_ = eu.eta2;

  Level out;
  out.eta2_u = std::move(eu.eta2);
  out.eta2_z = std::move(ez.eta2);
  out.goal_value = goal_val;
  out.has_goal_err = true;
  out.goal_err = goal_error(goal_val, reference_);
  return out;
}

void BemProblem::refine(const MarkedSet& marked) {
  mesh_ = bisect_1d(mesh_, marked);
  mesh_.audit();
}

void BemProblem::snapshot(const std::string& out_dir, std::int64_t level) const {
  if (last_U_.size() != mesh_.num_panels()) return;  // nothing solved yet
  char name[64];
  std::snprintf(name, sizeof(name), "panels_%04" PRId64 ".csv", level);
  std::ofstream out(std::filesystem::path(out_dir) / name);
  out << "panel,mid_x,mid_y,h,U,eta2\n";
  char line[256];
  for (std::int32_t p = 0; p < mesh_.num_panels(); ++p) {
    Vec2 m = mesh_.midpoint(p);
    std::snprintf(line, sizeof(line), "%d,%.12e,%.12e,%.12e,%.12e,%.12e\n", p, m.x, m.y,
                  mesh_.panel(p).h, last_U_[p], last_eta2_[static_cast<std::size_t>(p)]);
    out << line;
  }
}

BemProblemSetup make_boundary_hat_setup() {
  BemProblemSetup s;
  s.weight.kind = BemGoalWeight::Kind::ConformingHat;
  s.weight.s_begin = 0.0;
  s.weight.s_center = 0.25;
  s.weight.s_end = 0.5;
  s.epsilon = 0.0;
  return s;
}

BemProblemSetup make_boundary_characteristic_setup(double epsilon) {
  BemProblemSetup s;
  s.weight.kind = BemGoalWeight::Kind::Characteristic;
  // The arc sits strictly inside the first edge, symmetric about the point
  // where the conforming hat peaks.  Keeping its endpoints away from polygon
  // corners matters: the jump of the interpolated weight then forces
  // bisection of two panels on a smooth piece of boundary, where the primal
  // density carries no singular mass that refinement could keep draining.
  s.weight.s_begin = 0.125;
  s.weight.s_end = 0.375;
  s.weight.s_center = 0.25;  // unused by the characteristic weight
  s.epsilon = epsilon;
  return s;
}

}  // namespace goafem
