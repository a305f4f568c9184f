#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "goafem/estimators.hpp"
#include "goafem/mesh.hpp"

namespace goafem {

// ---------------------------------------------------------------------------
// Kernel primitives for straight panels (unit-speed parametrization).

// int_{[a,b]} ln|x - y| ds_y, closed form; valid for any x (continuous at
// the segment itself).
double log_potential(const Vec2& x, const Vec2& a, const Vec2& b);

// int_{[a,b]} (x - y) . t / |x - y|^2 ds_y, closed form; principal value
// when x lies on the segment's line inside it (the self-panel case).
double dlog_potential(const Vec2& x, const Vec2& t, const Vec2& a, const Vec2& b);

// ---------------------------------------------------------------------------
// Single-layer operator.

struct LayerOperatorAssembly {
  const BoundaryMesh* mesh = nullptr;
  Eigen::MatrixXd V;  // symmetric, positive definite for diam < 1
};

// Galerkin matrix of the single-layer operator with kernel -(1/2pi) ln|x-y|
// on panelwise constants. Self entries analytic; near pairs (distance below
// three panel lengths) by Gauss quadrature geometrically graded toward the
// closest point; far pairs by plain Gauss; inner integral always analytic.
// Each unordered pair is computed once (exact symmetry by construction).
// Throws std::invalid_argument when diam >= 1 (ellipticity lost).
LayerOperatorAssembly assemble_V(const BoundaryMesh& mesh);

// Solves V x = rhs by dense pivoted LDLT on the Jacobi-equilibrated matrix
// with one step of iterative refinement; verifies the normwise backward
// error (residual against ||V|| ||x|| + ||rhs||) at 1e-10.
Eigen::VectorXd bem_solve(const Eigen::MatrixXd& V, const Eigen::VectorXd& rhs);

// Factorization wrapper so one matrix can serve the primal and dual solves.
class BemFactor {
 public:
  explicit BemFactor(const Eigen::MatrixXd& V);
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

 private:
  const Eigen::MatrixXd* V_;
  Eigen::VectorXd scale_;  // D^{-1/2}
  Eigen::LDLT<Eigen::MatrixXd> ldlt_;
};

// ---------------------------------------------------------------------------
// Dirichlet data: F = (K + 1/2) phi evaluated through the regularized
// representation F(x) = (1/2pi) oint (phi(y) - phi(x)) (x-y).n_y/|x-y|^2 ds_y
// (exact at smooth boundary points under the Calderon-consistent kernel
// normalization). Each edge carries a fixed composite Gauss rule whose layers
// shrink geometrically into both corners, with the data samples cached at
// construction: integrand peaks always sit at scale dist(x, corner), which a
// corner-graded rule resolves with a bounded number of points per layer, and
// a fixed rule cannot be driven into the rounding noise of near-singular
// kernel evaluations the way an adaptive tolerance can.
class DoubleLayerData {
 public:
  // grad_phi is only needed by dFds; pass {} when only F is used. tol sets
  // the relative grading floor of the edge rules (layer widths stop shrinking
  // at tol * edge length), which bounds the corner truncation error.
  DoubleLayerData(std::vector<Vec2> corners, std::function<double(Vec2)> phi,
                  std::function<Vec2(Vec2)> grad_phi = {}, double tol = 1e-13);

  int edge_count() const { return static_cast<int>(corners_.size()); }
  // Polygon edge containing arclength s (edges ordered from corners[0]).
  int edge_of_s(double s) const;
  double total_length() const { return breaks_.back(); }

  // F at a point interior to polygon edge `edge` (never a corner).
  double F(const Vec2& x, int edge) const;
  // Arclength derivative of F at x; t is the unit tangent of the edge.
  double dFds(const Vec2& x, const Vec2& t, int edge) const;
  // (1/2pi) PV oint (x-y).n_y/|x-y|^2 ds_y; equals -1/2 at smooth points.
  double gauss_integral(const Vec2& x, int edge) const;

 private:
  // Fixed quadrature rule on one polygon edge with cached data samples.
  struct EdgeRule {
    Vec2 ne;                      // outward-side normal used by the kernels
    std::vector<Vec2> y;          // node positions
    std::vector<double> w;        // node weights
    std::vector<double> phi_val;  // phi at the nodes
  };

  std::vector<Vec2> corners_;
  std::vector<double> breaks_;  // cumulative arclength at each corner
  std::function<double(Vec2)> phi_;
  std::function<Vec2(Vec2)> grad_phi_;
  double tol_;
  std::vector<EdgeRule> rules_;
};

// int_{T_i} F ds for one panel by adaptive quadrature (handles the
// corner-panel algebraic singularities of F).
double panel_rhs_dirichlet(const BoundaryMesh& mesh, std::int32_t panel,
                           const DoubleLayerData& data, double tol = 1e-12);

// rhs_i = int_{T_i} F ds for every panel. The mesh must carry its
// generating polygon (built by BoundaryMesh::polygon).
Eigen::VectorXd assemble_rhs_dirichlet(const BoundaryMesh& mesh,
                                       const std::function<double(Vec2)>& phi);

// ---------------------------------------------------------------------------
// Weighted-residual estimators.

// Arclength derivative of the data F at an evaluation node of a panel:
// arguments are (panel index, Gauss-node ordinal, point, unit tangent).
// eta_bem evaluates at the nodes of the 4-point Gauss rule in ascending
// order, so per-panel values can be cached by ordinal.
using BoundaryDerivFn =
    std::function<double(std::int32_t, int, const Vec2&, const Vec2&)>;

// Number of Gauss nodes per panel used by eta_bem.
inline constexpr int kEtaBemNodes = 4;

// Parameter in [0,1] of Gauss node `q` of the eta_bem rule.
double eta_bem_node(int q);

// eta(T)^2 = h_T^{1 -+ eps} || d/ds (V U - F) ||_{L2(T)}^2, exponent 1-eps
// for the primal estimator and 1+eps for the dual. The residual derivative
// is evaluated at interior Gauss nodes only; d/ds(V U) uses the analytic
// per-panel antiderivatives (principal value on the self-panel). eps = 0
// reproduces the standard estimator bit-for-bit.
EstimatorField eta_bem(const BoundaryMesh& mesh, const Eigen::VectorXd& U,
                       const BoundaryDerivFn& dFds, double epsilon, bool dual);

// d/ds (V U)(x) for x on panel `panel` with unit tangent t.
double single_layer_deriv(const BoundaryMesh& mesh, const Eigen::VectorXd& U,
                          std::int32_t panel, const Vec2& x, const Vec2& t);

// (V U)(x) pointwise (used by synthetic-data tests).
double single_layer_value(const BoundaryMesh& mesh, const Eigen::VectorXd& U, const Vec2& x);

// ---------------------------------------------------------------------------
// Goal weights on the boundary.

struct BemGoalWeight {
  enum class Kind { ConformingHat, Characteristic };
  Kind kind = Kind::ConformingHat;
  // Support [s_begin, s_end] in arclength; the hat peaks at s_center.
  double s_begin = 0.0;
  double s_end = 0.5;
  double s_center = 0.25;

  double value(double s) const;  // the true weight at arclength s
};

struct WeightInterp {
  std::vector<double> node_value;  // nodal values of the interpolant
  MarkedSet forced;                // transition panels (characteristic kind)
};

// Nodal interpolant of the weight plus the forced-marking set: the panels on
// which the interpolant is non-constant while the true weight is (exactly
// the two transition panels of a characteristic weight whose endpoints are
// mesh nodes). Conforming hats interpolate exactly; forced is empty.
WeightInterp interp_weight(const BoundaryMesh& mesh, const BemGoalWeight& weight);

// int_{T_i} of the interpolant (exact: the interpolant is panelwise affine).
Eigen::VectorXd weight_load(const BoundaryMesh& mesh, const WeightInterp& interp);

// int_{T_i} of the true weight (exact for weights with breakpoints at nodes).
Eigen::VectorXd weight_true_integrals(const BoundaryMesh& mesh, const BemGoalWeight& weight);

// ---------------------------------------------------------------------------
// L-shaped benchmark: rotated L-shape with diam = 1/sqrt(2), perimeter 2,
// reentrant corner at the origin reached at arclength s = 1; the weight
// region is the full first edge s in [0, 1/2] with midpoint z0 at s = 1/4.
struct Lshape {
  static const std::vector<Vec2>& corners();
  static BoundaryMesh initial_mesh();  // 8 panels of length 1/4
  // Harmonic function P = r^{2/3} cos(2 alpha / 3) and its gradient
  // (alpha = atan2(y, x); the branch cut lies in the removed sector).
  static double phi(const Vec2& x);
  static Vec2 grad_phi(const Vec2& x);
  // Exact solution u = dP/dn given the outward normal of the edge at x.
  static double exact_u(const Vec2& x, const Vec2& n);
  // Point and outward normal at arclength s.
  static Vec2 point_at_s(double s);
  static Vec2 normal_at_s(double s);
  // Reference goal value int_Gamma weight * u ds by adaptive quadrature.
  static double goal_reference(const BemGoalWeight& weight, double tol = 1e-12);
};

// u at a boundary point, resolving the containing edge geometrically;
// rejects corner points.
double lshape_exact(const Vec2& point);

}  // namespace goafem
