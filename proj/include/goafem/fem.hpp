#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <array>
#include <functional>
#include <memory>
#include <vector>

#include "goafem/mesh.hpp"
#include "goafem/quadrature.hpp"

namespace goafem {

// Coefficients of L v = -div(A grad v) + b . grad v + c v. A and c are
// piecewise constant per root element (or globally constant); b is affine,
// so div b = trace of its linear part is available analytically.
struct EllipticCoefficients {
  std::vector<Mat2> A{Mat2::identity()};  // size 1 or one entry per root element
  std::vector<double> c;                  // empty = 0; else size 1 or per root
  bool has_b = false;
  Vec2 b0{0.0, 0.0};
  Mat2 b_lin{};  // b(x) = b0 + b_lin x

  const Mat2& A_at(std::int32_t root) const { return A.size() == 1 ? A[0] : A[root]; }
  double c_at(std::int32_t root) const {
    return c.empty() ? 0.0 : (c.size() == 1 ? c[0] : c[root]);
  }
  Vec2 b_at(const Vec2& x) const { return has_b ? b0 + b_lin * x : Vec2{0.0, 0.0}; }
  double div_b() const { return has_b ? b_lin.trace() : 0.0; }
  bool symmetric() const { return !has_b; }
};

// Load functional f(v) = int f1 v - int f2 . grad v; f1 is a smooth field,
// f2 is piecewise constant per root element (divergence-free by elementwise
// constancy, so its element residual contribution is -div f2 = 0).
struct LoadData {
  std::function<double(Vec2)> f1;  // null = 0
  std::vector<Vec2> f2;            // empty = 0; else size 1 or per root

  Vec2 f2_at(std::int32_t root) const {
    if (f2.empty()) return {0.0, 0.0};
    return f2.size() == 1 ? f2[0] : f2[root];
  }
  bool zero() const { return !f1 && f2.empty(); }
};

// Lagrange space S^p (p in {1,2,3}) on a conforming triangle mesh. Local
// dofs: 3 vertices, then p-1 nodes per edge in local edge order
// (v0,v1),(v1,v2),(v2,v0) — each edge's nodes ordered from the lower global
// vertex id — then the interior node (p=3).
class FESpace {
 public:
  FESpace(const Mesh2& mesh, int degree);

  const Mesh2& mesh() const { return *mesh_; }
  int degree() const { return p_; }
  std::int64_t num_dofs() const { return ndofs_; }
  int local_dofs() const { return nloc_; }
  std::int64_t global_dof(std::int32_t t, int local) const {
    return dofmap_[static_cast<std::size_t>(t) * nloc_ + local];
  }
  bool dof_on_boundary(std::int64_t dof) const { return on_boundary_[dof] != 0; }
  const Vec2& dof_point(std::int64_t dof) const { return dof_point_[dof]; }
  std::int64_t num_boundary_dofs() const { return n_boundary_; }

  // Reference-element shape functions at a reference point (x = lambda1,
  // y = lambda2). Output arrays hold local_dofs() entries.
  static void shape_values(int degree, const Vec2& ref, double* val);
  static void shape_gradients(int degree, const Vec2& ref, Vec2* grad);
  // Reference Hessians as (dxx, dxy, dyy) triples.
  static void shape_hessians(int degree, const Vec2& ref, std::array<double, 3>* hess);
  // Local node positions in reference coordinates.
  static std::vector<Vec2> local_nodes(int degree);

  // Element geometry helpers.
  Vec2 map_to_physical(std::int32_t t, const Vec2& ref) const;
  Vec2 map_to_reference(std::int32_t t, const Vec2& x) const;
  // Columns of the Jacobian are (v1 - v0) and (v2 - v0).
  void jacobian(std::int32_t t, Mat2& j, Mat2& jinv_t, double& det) const;

 private:
  const Mesh2* mesh_;
  int p_;
  int nloc_;
  std::int64_t ndofs_;
  std::int64_t n_boundary_;
  std::vector<std::int64_t> dofmap_;
  std::vector<char> on_boundary_;
  std::vector<Vec2> dof_point_;
};

struct DiscreteFunction {
  const FESpace* space = nullptr;
  Eigen::VectorXd coeff;

  double value(std::int32_t t, const Vec2& ref) const;
  Vec2 gradient(std::int32_t t, const Vec2& ref) const;
  std::array<double, 3> hessian(std::int32_t t, const Vec2& ref) const;
};

// Full Galerkin matrix and load vector over all dofs (no boundary
// elimination): K(i, j) = a(phi_j, phi_i), load(i) = f(phi_i).
struct AssembledSystem {
  Eigen::SparseMatrix<double> K;
  Eigen::VectorXd load;
};

AssembledSystem assemble_bilinear(const FESpace& space, const EllipticCoefficients& coeffs,
                                  const LoadData& load);

// Reduced system on the free (interior) dofs.
struct LinearSystem {
  Eigen::SparseMatrix<double> A;
  Eigen::VectorXd rhs;
  std::vector<std::int64_t> free_dofs;   // free index -> global dof
  Eigen::VectorXd dirichlet;             // full-length boundary values
  bool symmetric = false;
};

// Primal problem a(U, v) = f(v) with U = U0 + dirichlet lifting.
LinearSystem assemble_primal(const FESpace& space, const EllipticCoefficients& coeffs,
                             const LoadData& load, const DiscreteFunction* dirichlet = nullptr);
// Dual problem a(v, Z) = g(v); the matrix is exactly the transpose of the
// primal free-dof matrix.
LinearSystem assemble_dual(const FESpace& space, const EllipticCoefficients& coeffs,
                           const LoadData& dual_load,
                           const DiscreteFunction* dirichlet = nullptr);

// Direct sparse solve with residual verification (relative residual must
// reach 1e-12, one step of iterative refinement allowed); throws
// std::runtime_error with a diagnostic on failure.
DiscreteFunction solve(const LinearSystem& system, const FESpace& space);

// Nodal interpolation of a boundary trace; interior dofs zero. Throws
// std::invalid_argument when the trace is not a piecewise degree-p
// polynomial on the boundary edges (checked by oversampling).
DiscreteFunction lift_dirichlet(const FESpace& space, const std::function<double(Vec2)>& trace);

// Shared-assembly solver for the adaptive loop: builds K once, factorizes
// once (twice for nonsymmetric problems: K_ff and its transpose).
class FemSolver {
 public:
  FemSolver(const FESpace& space, const EllipticCoefficients& coeffs);

  DiscreteFunction solve_primal(const LoadData& load, const DiscreteFunction* dirichlet = nullptr);
  DiscreteFunction solve_dual(const LoadData& dual_load,
                              const DiscreteFunction* dirichlet = nullptr);
  // a(w, v) = v^T K w over the full dof set.
  double bilinear(const DiscreteFunction& w, const DiscreteFunction& v) const;
  // f(v) for an assembled load vector: load . v
  double apply_load(const LoadData& load, const DiscreteFunction& v) const;

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

}  // namespace goafem
