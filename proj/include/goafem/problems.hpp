#pragma once

#include <unordered_map>

#include "goafem/bem.hpp"
#include "goafem/estimators.hpp"
#include "goafem/fem.hpp"
#include "goafem/goals.hpp"
#include "goafem/marking.hpp"
#include "goafem/mesh.hpp"

namespace goafem {

// Unit square (0,1)^2 as nx x ny cells, each split along its anti-diagonal
// into two triangles; the anti-diagonal is every triangle's longest edge and
// becomes its refinement edge.
Mesh2 square_mesh(int nx, int ny);

struct FemProblemSetup {
  Mesh2 mesh0;
  int degree = 1;
  EllipticCoefficients coeffs;
  LoadData load;
  std::function<double(Vec2)> dirichlet;  // null = homogeneous
  GoalSpec goal;
};

// Goal-oriented FEM model problem on a triangle mesh with residual
// estimators and newest-vertex-bisection refinement.
class FemProblem : public AdaptiveProblem {
 public:
  explicit FemProblem(FemProblemSetup setup);

  std::int64_t num_elements() const override;
  Level solve_and_estimate() override;
  void refine(const MarkedSet& marked) override;
  void snapshot(const std::string& out_dir, std::int64_t level) const override;

  const Mesh2& mesh() const { return mesh_; }
  void set_reference(double ref);
  bool has_reference() const { return setup_.goal.has_reference; }

 private:
  FemProblemSetup setup_;
  Mesh2 mesh_;
};

// Interaction-driven diffusion benchmark: Poisson with characteristic-
// gradient source and a matching gradient goal in the opposite corner.
FemProblemSetup make_corner_interaction_setup(int degree);

// Convection-dominated benchmark: rotating transport with a Dirichlet pulse
// inflow and a weighted-outflow goal functional.
FemProblemSetup make_transport_pulse_setup(int degree, double nu);

struct BemProblemSetup {
  BemGoalWeight weight;
  double epsilon = 0.0;
  int initial_refine = 0;   // uniform bisection rounds applied before level 0
  double quad_tol = 1e-13;  // data-evaluation tolerance (see panel_rhs_dirichlet)
};

// Weakly-singular integral equation V u = (K + 1/2) phi on the rotated
// L-shaped boundary with lowest-order panels, weighted-residual estimators,
// and a boundary goal functional. The goal reference is computed from the
// closed-form solution in the constructor.
class BemProblem : public AdaptiveProblem {
 public:
  explicit BemProblem(BemProblemSetup setup);

  std::int64_t num_elements() const override;
  Level solve_and_estimate() override;
  void refine(const MarkedSet& marked) override;
  MarkedSet forced_marks() const override { return forced_; }
  void snapshot(const std::string& out_dir, std::int64_t level) const override;

  const BoundaryMesh& mesh() const { return mesh_; }
  double reference() const { return reference_; }

 private:
  BemProblemSetup setup_;
  BoundaryMesh mesh_;
  DoubleLayerData data_;
  double reference_ = 0.0;
  MarkedSet forced_;
  std::unordered_map<std::int64_t, double> rhs_cache_;
  std::unordered_map<std::int64_t, std::array<double, kEtaBemNodes>> dfds_cache_;
  Eigen::VectorXd last_U_;
  std::vector<double> last_eta2_;
};

BemProblemSetup make_boundary_hat_setup();
BemProblemSetup make_boundary_characteristic_setup(double epsilon);

}  // namespace goafem
