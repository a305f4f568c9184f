#include "goafem/fem.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace goafem {

namespace {

constexpr double kLambdaGrad[3][2] = {{-1.0, -1.0}, {1.0, 0.0}, {0.0, 1.0}};

inline Vec2 lgrad(int i) { return {kLambdaGrad[i][0], kLambdaGrad[i][1]}; }

// H(lambda_a lambda_b) = Ga Gb^T + Gb Ga^T as (dxx, dxy, dyy).
inline std::array<double, 3> outer2(const Vec2& a, const Vec2& b) {
  return {2.0 * a.x * b.x, a.x * b.y + a.y * b.x, 2.0 * a.y * b.y};
}

inline void axpy3(std::array<double, 3>& acc, double s, const std::array<double, 3>& v) {
  acc[0] += s * v[0];
  acc[1] += s * v[1];
  acc[2] += s * v[2];
}

int local_count(int p) { return (p + 1) * (p + 2) / 2; }

}  // namespace

void FESpace::shape_values(int p, const Vec2& ref, double* val) {
  const double l[3] = {1.0 - ref.x - ref.y, ref.x, ref.y};
  switch (p) {
    case 1:
      for (int i = 0; i < 3; ++i) val[i] = l[i];
      return;
    case 2:
      for (int i = 0; i < 3; ++i) val[i] = l[i] * (2.0 * l[i] - 1.0);
      for (int k = 0; k < 3; ++k) val[3 + k] = 4.0 * l[k] * l[(k + 1) % 3];
      return;
    case 3: {
      for (int i = 0; i < 3; ++i)
        val[i] = 0.5 * l[i] * (3.0 * l[i] - 1.0) * (3.0 * l[i] - 2.0);
      for (int k = 0; k < 3; ++k) {
        double la = l[k], lb = l[(k + 1) % 3];
        val[3 + 2 * k] = 4.5 * la * lb * (3.0 * la - 1.0);
        val[3 + 2 * k + 1] = 4.5 * la * lb * (3.0 * lb - 1.0);
      }
      val[9] = 27.0 * l[0] * l[1] * l[2];
      return;
    }
    default:
      throw std::invalid_argument("FESpace: degree must be 1, 2 or 3");
  }
}

void FESpace::shape_gradients(int p, const Vec2& ref, Vec2* grad) {
  const double l[3] = {1.0 - ref.x - ref.y, ref.x, ref.y};
  switch (p) {
    case 1:
      for (int i = 0; i < 3; ++i) grad[i] = lgrad(i);
      return;
    case 2:
      for (int i = 0; i < 3; ++i) grad[i] = (4.0 * l[i] - 1.0) * lgrad(i);
      for (int k = 0; k < 3; ++k) {
        int a = k, b = (k + 1) % 3;
        grad[3 + k] = 4.0 * (l[b] * lgrad(a) + l[a] * lgrad(b));
      }
      return;
    case 3: {
      for (int i = 0; i < 3; ++i) {
        double li = l[i];
        grad[i] = 0.5 * (27.0 * li * li - 18.0 * li + 2.0) * lgrad(i);
      }
      for (int k = 0; k < 3; ++k) {
        int a = k, b = (k + 1) % 3;
        double la = l[a], lb = l[b];
        grad[3 + 2 * k] = 4.5 * (lb * (6.0 * la - 1.0) * lgrad(a) + la * (3.0 * la - 1.0) * lgrad(b));
        grad[3 + 2 * k + 1] =
            4.5 * (lb * (3.0 * lb - 1.0) * lgrad(a) + la * (6.0 * lb - 1.0) * lgrad(b));
      }
      grad[9] = 27.0 * (l[1] * l[2] * lgrad(0) + l[0] * l[2] * lgrad(1) + l[0] * l[1] * lgrad(2));
      return;
    }
    default:
      throw std::invalid_argument("FESpace: degree must be 1, 2 or 3");
  }
}

void FESpace::shape_hessians(int p, const Vec2& ref, std::array<double, 3>* hess) {
  const double l[3] = {1.0 - ref.x - ref.y, ref.x, ref.y};
  const int n = local_count(p);
  for (int i = 0; i < n; ++i) hess[i] = {0.0, 0.0, 0.0};
  switch (p) {
    case 1:
      return;
    case 2:
      for (int i = 0; i < 3; ++i) axpy3(hess[i], 2.0, outer2(lgrad(i), lgrad(i)));
      for (int k = 0; k < 3; ++k)
        axpy3(hess[3 + k], 4.0, outer2(lgrad(k), lgrad((k + 1) % 3)));
      return;
    case 3: {
      for (int i = 0; i < 3; ++i)
        axpy3(hess[i], 0.5 * (27.0 * l[i] - 9.0), outer2(lgrad(i), lgrad(i)));
      for (int k = 0; k < 3; ++k) {
        int a = k, b = (k + 1) % 3;
        // f = 4.5 la lb (3 la - 1): f_aa = 27 lb, f_ab = 4.5 (6 la - 1), f_bb = 0.
        axpy3(hess[3 + 2 * k], 13.5 * l[b], outer2(lgrad(a), lgrad(a)));
        axpy3(hess[3 + 2 * k], 4.5 * (6.0 * l[a] - 1.0), outer2(lgrad(a), lgrad(b)));
        axpy3(hess[3 + 2 * k + 1], 13.5 * l[a], outer2(lgrad(b), lgrad(b)));
        axpy3(hess[3 + 2 * k + 1], 4.5 * (6.0 * l[b] - 1.0), outer2(lgrad(a), lgrad(b)));
      }
      axpy3(hess[9], 27.0 * l[2], outer2(lgrad(0), lgrad(1)));
      axpy3(hess[9], 27.0 * l[1], outer2(lgrad(0), lgrad(2)));
      axpy3(hess[9], 27.0 * l[0], outer2(lgrad(1), lgrad(2)));
      return;
    }
    default:
      throw std::invalid_argument("FESpace: degree must be 1, 2 or 3");
  }
}

std::vector<Vec2> FESpace::local_nodes(int p) {
  const Vec2 P[3] = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
  std::vector<Vec2> nodes(P, P + 3);
  if (p >= 2) {
    for (int k = 0; k < 3; ++k) {
      const Vec2& a = P[k];
      const Vec2& b = P[(k + 1) % 3];
      for (int j = 1; j < p; ++j) nodes.push_back(a + (b - a) * (static_cast<double>(j) / p));
    }
  }
  if (p == 3) nodes.push_back({1.0 / 3.0, 1.0 / 3.0});
  return nodes;
}

FESpace::FESpace(const Mesh2& mesh, int degree) : mesh_(&mesh), p_(degree) {
  if (degree < 1 || degree > 3) throw std::invalid_argument("FESpace: degree must be 1, 2 or 3");
  nloc_ = local_count(p_);
  const std::int64_t nv = mesh.num_vertices();
  const std::int64_t ne = mesh.num_edges();
  const std::int64_t nt = mesh.num_triangles();
  const int per_edge = p_ - 1;
  const int per_tri = (p_ == 3) ? 1 : 0;
  ndofs_ = nv + ne * per_edge + nt * per_tri;
  dofmap_.resize(static_cast<std::size_t>(nt) * nloc_);
  const std::int64_t edge_base = nv;
  const std::int64_t tri_base = nv + ne * per_edge;

  for (std::int32_t t = 0; t < nt; ++t) {
    const auto& v = mesh.tri(t).v;
    std::int64_t* map = &dofmap_[static_cast<std::size_t>(t) * nloc_];
    for (int k = 0; k < 3; ++k) map[k] = v[k];
    if (p_ >= 2) {
      for (int k = 0; k < 3; ++k) {
        std::int32_t e = mesh.tri_edges(t)[k];
        std::int64_t base = edge_base + static_cast<std::int64_t>(e) * per_edge;
        if (p_ == 2) {
          map[3 + k] = base;
        } else {
          bool forward = v[k] < v[(k + 1) % 3];  // local direction matches a<b storage
          map[3 + 2 * k] = forward ? base : base + 1;
          map[3 + 2 * k + 1] = forward ? base + 1 : base;
        }
      }
    }
    if (per_tri) map[nloc_ - 1] = tri_base + t;
  }

  on_boundary_.assign(ndofs_, 0);
  for (std::int32_t e = 0; e < ne; ++e) {
    if (!mesh.edge_on_boundary(e)) continue;
    on_boundary_[mesh.edge(e)[0]] = 1;
    on_boundary_[mesh.edge(e)[1]] = 1;
    for (int j = 0; j < per_edge; ++j)
      on_boundary_[edge_base + static_cast<std::int64_t>(e) * per_edge + j] = 1;
  }
  n_boundary_ = std::count(on_boundary_.begin(), on_boundary_.end(), char(1));

  dof_point_.resize(ndofs_);
  for (std::int64_t i = 0; i < nv; ++i) dof_point_[i] = mesh.vertex(static_cast<std::int32_t>(i));
  for (std::int32_t e = 0; e < ne; ++e) {
    const Vec2& a = mesh.vertex(mesh.edge(e)[0]);
    const Vec2& b = mesh.vertex(mesh.edge(e)[1]);
    for (int j = 0; j < per_edge; ++j)
      dof_point_[edge_base + static_cast<std::int64_t>(e) * per_edge + j] =
          a + (b - a) * (static_cast<double>(j + 1) / p_);
  }
  if (per_tri)
    for (std::int32_t t = 0; t < nt; ++t) dof_point_[tri_base + t] = mesh.centroid(t);
}

Vec2 FESpace::map_to_physical(std::int32_t t, const Vec2& ref) const {
  const auto& v = mesh_->tri(t).v;
  const Vec2& a = mesh_->vertex(v[0]);
  const Vec2& b = mesh_->vertex(v[1]);
  const Vec2& c = mesh_->vertex(v[2]);
  return a + (b - a) * ref.x + (c - a) * ref.y;
}

Vec2 FESpace::map_to_reference(std::int32_t t, const Vec2& x) const {
  const auto& v = mesh_->tri(t).v;
  const Vec2& a = mesh_->vertex(v[0]);
  Vec2 e1 = mesh_->vertex(v[1]) - a;
  Vec2 e2 = mesh_->vertex(v[2]) - a;
  double det = cross(e1, e2);
  Vec2 d = x - a;
  return {cross(d, e2) / det * 1.0, cross(e1, d) / det};
}

void FESpace::jacobian(std::int32_t t, Mat2& j, Mat2& jinv_t, double& det) const {
  const auto& v = mesh_->tri(t).v;
  const Vec2& a = mesh_->vertex(v[0]);
  Vec2 e1 = mesh_->vertex(v[1]) - a;
  Vec2 e2 = mesh_->vertex(v[2]) - a;
  j = {e1.x, e2.x, e1.y, e2.y};
  det = e1.x * e2.y - e2.x * e1.y;
  // inverse transpose of [[e1.x, e2.x], [e1.y, e2.y]]
  jinv_t = {e2.y / det, -e1.y / det, -e2.x / det, e1.x / det};
}

double DiscreteFunction::value(std::int32_t t, const Vec2& ref) const {
  const int n = space->local_dofs();
  double val[10];
  FESpace::shape_values(space->degree(), ref, val);
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += coeff[space->global_dof(t, i)] * val[i];
  return s;
}

Vec2 DiscreteFunction::gradient(std::int32_t t, const Vec2& ref) const {
  const int n = space->local_dofs();
  Vec2 g[10];
  FESpace::shape_gradients(space->degree(), ref, g);
  Mat2 j, jinv_t;
  double det;
  space->jacobian(t, j, jinv_t, det);
  Vec2 acc{0.0, 0.0};
  for (int i = 0; i < n; ++i) acc += coeff[space->global_dof(t, i)] * g[i];
  return jinv_t * acc;
}

std::array<double, 3> DiscreteFunction::hessian(std::int32_t t, const Vec2& ref) const {
  const int n = space->local_dofs();
  std::array<double, 3> h[10];
  FESpace::shape_hessians(space->degree(), ref, h);
  std::array<double, 3> acc{0.0, 0.0, 0.0};
  for (int i = 0; i < n; ++i) {
    double c = coeff[space->global_dof(t, i)];
    acc[0] += c * h[i][0];
    acc[1] += c * h[i][1];
    acc[2] += c * h[i][2];
  }
  // H_x = Jinv^T H_ref Jinv for the affine map with Jacobian J.
  Mat2 j, it;
  double det;
  space->jacobian(t, j, it, det);
  // it = Jinv^T; rows of Jinv are (it.a00, it.a10), (it.a01, it.a11).
  double m00 = it.a00, m01 = it.a01, m10 = it.a10, m11 = it.a11;
  double hxx = acc[0], hxy = acc[1], hyy = acc[2];
  // Compute M * H * M^T with M = Jinv^T (symmetric result).
  double t00 = m00 * hxx + m01 * hxy;
  double t01 = m00 * hxy + m01 * hyy;
  double t10 = m10 * hxx + m11 * hxy;
  double t11 = m10 * hxy + m11 * hyy;
  return {t00 * m00 + t01 * m01, t00 * m10 + t01 * m11, t10 * m10 + t11 * m11};
}

// ---------------------------------------------------------------------------
// Assembly

namespace {

struct ShapeTable {
  const TriangleRule* rule;
  int nloc;
  std::vector<double> val;  // q * nloc
  std::vector<Vec2> grad;   // q * nloc

  ShapeTable(int p, int quad_degree) {
    rule = &TriangleRule::for_degree(quad_degree);
    nloc = local_count(p);
    const std::size_t nq = rule->points.size();
    val.resize(nq * nloc);
    grad.resize(nq * nloc);
    for (std::size_t q = 0; q < nq; ++q) {
      FESpace::shape_values(p, rule->points[q], &val[q * nloc]);
      FESpace::shape_gradients(p, rule->points[q], &grad[q * nloc]);
    }
  }
};

Eigen::VectorXd assemble_load_vector(const FESpace& space, const LoadData& load) {
  const Mesh2& mesh = space.mesh();
  const int p = space.degree();
  const int nloc = space.local_dofs();
  ShapeTable table(p, 2 * p + 1);
  const std::size_t nq = table.rule->points.size();
  Eigen::VectorXd F = Eigen::VectorXd::Zero(space.num_dofs());
  if (load.zero()) return F;
  std::vector<Vec2> phys_grad(nq * nloc);
  for (std::int32_t t = 0; t < mesh.num_triangles(); ++t) {
    Mat2 j, jinv_t;
    double det;
    space.jacobian(t, j, jinv_t, det);
    Vec2 f2 = load.f2_at(mesh.tri(t).root);
    bool need_grad = !(f2.x == 0.0 && f2.y == 0.0);
    for (std::size_t q = 0; q < nq; ++q) {
      double w = table.rule->weights[q] * det;
      Vec2 x = space.map_to_physical(t, table.rule->points[q]);
      double f1v = load.f1 ? load.f1(x) : 0.0;
      for (int i = 0; i < nloc; ++i) {
        double contrib = f1v * table.val[q * nloc + i];
        if (need_grad) contrib -= dot(f2, jinv_t * table.grad[q * nloc + i]);
        F[space.global_dof(t, i)] += w * contrib;
      }
    }
  }
  return F;
}

Eigen::SparseMatrix<double> assemble_matrix(const FESpace& space,
                                            const EllipticCoefficients& coeffs) {
  const Mesh2& mesh = space.mesh();
  const int p = space.degree();
  const int nloc = space.local_dofs();
  ShapeTable table(p, 2 * p + 1);
  const std::size_t nq = table.rule->points.size();

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(mesh.num_triangles()) * nloc * nloc);
  std::vector<Vec2> g(nloc);
  std::vector<double> kloc(nloc * nloc);
  for (std::int32_t t = 0; t < mesh.num_triangles(); ++t) {
    Mat2 j, jinv_t;
    double det;
    space.jacobian(t, j, jinv_t, det);
    const std::int32_t root = mesh.tri(t).root;
    const Mat2& A = coeffs.A_at(root);
    const double c = coeffs.c_at(root);
    std::fill(kloc.begin(), kloc.end(), 0.0);
    for (std::size_t q = 0; q < nq; ++q) {
      double w = table.rule->weights[q] * det;
      for (int i = 0; i < nloc; ++i) g[i] = jinv_t * table.grad[q * nloc + i];
      const double* N = &table.val[q * nloc];
      Vec2 b{0.0, 0.0};
      if (coeffs.has_b) b = coeffs.b_at(space.map_to_physical(t, table.rule->points[q]));
      for (int jj = 0; jj < nloc; ++jj) {
        Vec2 Agj = A * g[jj];
        double conv = coeffs.has_b ? dot(b, g[jj]) : 0.0;
        for (int ii = 0; ii < nloc; ++ii) {
          double v = dot(Agj, g[ii]);
          if (coeffs.has_b) v += conv * N[ii];
          if (c != 0.0) v += c * N[jj] * N[ii];
          kloc[ii * nloc + jj] += w * v;
        }
      }
    }
    for (int ii = 0; ii < nloc; ++ii)
      for (int jj = 0; jj < nloc; ++jj)
        trips.emplace_back(static_cast<int>(space.global_dof(t, ii)),
                           static_cast<int>(space.global_dof(t, jj)), kloc[ii * nloc + jj]);
  }
  Eigen::SparseMatrix<double> K(space.num_dofs(), space.num_dofs());
  K.setFromTriplets(trips.begin(), trips.end());
  K.makeCompressed();
  return K;
}

LinearSystem reduce_system(const FESpace& space, const Eigen::SparseMatrix<double>& K,
                           const Eigen::VectorXd& load, const DiscreteFunction* dirichlet,
                           bool transpose, bool symmetric) {
  const std::int64_t n = space.num_dofs();
  LinearSystem sys;
  sys.symmetric = symmetric;
  sys.dirichlet = Eigen::VectorXd::Zero(n);
  if (dirichlet) {
    if (dirichlet->coeff.size() != n)
      throw std::invalid_argument("reduce_system: dirichlet vector size mismatch");
    for (std::int64_t i = 0; i < n; ++i)
      if (space.dof_on_boundary(i)) sys.dirichlet[i] = dirichlet->coeff[i];
  }
  std::vector<std::int64_t> free_of(n, -1);
  for (std::int64_t i = 0; i < n; ++i)
    if (!space.dof_on_boundary(i)) {
      free_of[i] = static_cast<std::int64_t>(sys.free_dofs.size());
      sys.free_dofs.push_back(i);
    }
  const std::int64_t nf = static_cast<std::int64_t>(sys.free_dofs.size());

  // rhs = (load - K^(T) * dirichlet) restricted to free dofs.
  Eigen::VectorXd correction;
  if (dirichlet) {
    correction = transpose ? Eigen::VectorXd(K.transpose() * sys.dirichlet)
                           : Eigen::VectorXd(K * sys.dirichlet);
  } else {
    correction = Eigen::VectorXd::Zero(n);
  }
  sys.rhs.resize(nf);
  for (std::int64_t k = 0; k < nf; ++k)
    sys.rhs[k] = load[sys.free_dofs[k]] - correction[sys.free_dofs[k]];

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(K.nonZeros());
  for (int col = 0; col < K.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(K, col); it; ++it) {
      std::int64_t r = it.row(), cidx = it.col();
      std::int64_t fr = free_of[r], fc = free_of[cidx];
      if (fr < 0 || fc < 0) continue;
      if (transpose)
        trips.emplace_back(static_cast<int>(fc), static_cast<int>(fr), it.value());
      else
        trips.emplace_back(static_cast<int>(fr), static_cast<int>(fc), it.value());
    }
  }
  sys.A.resize(nf, nf);
  sys.A.setFromTriplets(trips.begin(), trips.end());
  sys.A.makeCompressed();
  return sys;
}

// Direct solve with residual verification and one refinement step. The
// residual is checked against the normwise backward-error scale
// ||A|| ||x|| + ||b||: on fine meshes the load norm alone can sit far below
// ||A|| ||x||, whose rounding floor every direct solver inherits.
Eigen::VectorXd checked_solve(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& rhs,
                              bool symmetric) {
  if (A.rows() == 0) return Eigen::VectorXd(0);
  const double rhs_norm = rhs.norm();
  const double a_norm = A.norm();
  auto scale = [&](const Eigen::VectorXd& x) {
    return std::max(rhs_norm + a_norm * x.norm(), 1e-300);
  };
  auto verify = [&](const Eigen::VectorXd& x) {
    return (rhs - A * x).norm() <= 1e-12 * scale(x);
  };
  if (symmetric) {
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
    solver.compute(A);
    if (solver.info() != Eigen::Success)
      throw std::runtime_error("solve: symmetric factorization failed (matrix singular?)");
    Eigen::VectorXd x = solver.solve(rhs);
    if (!verify(x)) {
      x += solver.solve(Eigen::VectorXd(rhs - A * x));
      if (!verify(x)) {
        double res = (rhs - A * x).norm() / scale(x);
        throw std::runtime_error("solve: relative residual " + std::to_string(res) +
                                 " exceeds 1e-12 (ill-conditioned system)");
      }
    }
    return x;
  }
  Eigen::SparseLU<Eigen::SparseMatrix<double>> solver;
  solver.compute(A);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("solve: LU factorization failed (matrix singular?)");
  Eigen::VectorXd x = solver.solve(rhs);
  if (!verify(x)) {
    x += solver.solve(Eigen::VectorXd(rhs - A * x));
    if (!verify(x)) {
      double res = (rhs - A * x).norm() / scale(x);
      throw std::runtime_error("solve: relative residual " + std::to_string(res) +
                               " exceeds 1e-12 (ill-conditioned system)");
    }
  }
  return x;
}

DiscreteFunction compose_solution(const FESpace& space, const LinearSystem& sys,
                                  const Eigen::VectorXd& x) {
  DiscreteFunction u;
  u.space = &space;
  u.coeff = sys.dirichlet;
  for (std::size_t k = 0; k < sys.free_dofs.size(); ++k) u.coeff[sys.free_dofs[k]] = x[k];
  return u;
}

}  // namespace

AssembledSystem assemble_bilinear(const FESpace& space, const EllipticCoefficients& coeffs,
                                  const LoadData& load) {
  AssembledSystem out;
  out.K = assemble_matrix(space, coeffs);
  out.load = assemble_load_vector(space, load);
  return out;
}

LinearSystem assemble_primal(const FESpace& space, const EllipticCoefficients& coeffs,
                             const LoadData& load, const DiscreteFunction* dirichlet) {
  Eigen::SparseMatrix<double> K = assemble_matrix(space, coeffs);
  Eigen::VectorXd F = assemble_load_vector(space, load);
  return reduce_system(space, K, F, dirichlet, /*transpose=*/false, coeffs.symmetric());
}

LinearSystem assemble_dual(const FESpace& space, const EllipticCoefficients& coeffs,
                           const LoadData& dual_load, const DiscreteFunction* dirichlet) {
  Eigen::SparseMatrix<double> K = assemble_matrix(space, coeffs);
  Eigen::VectorXd G = assemble_load_vector(space, dual_load);
  return reduce_system(space, K, G, dirichlet, /*transpose=*/true, coeffs.symmetric());
}

DiscreteFunction solve(const LinearSystem& system, const FESpace& space) {
  Eigen::VectorXd x = checked_solve(system.A, system.rhs, system.symmetric);
  return compose_solution(space, system, x);
}

DiscreteFunction lift_dirichlet(const FESpace& space,
                                const std::function<double(Vec2)>& trace) {
  DiscreteFunction w;
  w.space = &space;
  w.coeff = Eigen::VectorXd::Zero(space.num_dofs());
  for (std::int64_t i = 0; i < space.num_dofs(); ++i)
    if (space.dof_on_boundary(i)) w.coeff[i] = trace(space.dof_point(i));

  // Representability: on every boundary edge the trace must coincide with
  // the degree-p interpolant through the edge's nodes.
  const Mesh2& mesh = space.mesh();
  const int p = space.degree();
  const std::int64_t nv = mesh.num_vertices();
  for (std::int32_t e = 0; e < mesh.num_edges(); ++e) {
    if (!mesh.edge_on_boundary(e)) continue;
    const Vec2& a = mesh.vertex(mesh.edge(e)[0]);
    const Vec2& b = mesh.vertex(mesh.edge(e)[1]);
    // Node parameters and values along the edge (from vertex a to b).
    std::vector<double> ts, vals;
    ts.push_back(0.0);
    vals.push_back(w.coeff[mesh.edge(e)[0]]);
    for (int k = 0; k < p - 1; ++k) {
      double t = static_cast<double>(k + 1) / p;
      ts.push_back(t);
      vals.push_back(w.coeff[nv + static_cast<std::int64_t>(e) * (p - 1) + k]);
    }
    ts.push_back(1.0);
    vals.push_back(w.coeff[mesh.edge(e)[1]]);

    double scale = 1e-30;
    for (double v : vals) scale = std::max(scale, std::abs(v));
    for (int s = 0; s < p + 2; ++s) {
      double t = (s + 0.5) / (p + 2);
      // Lagrange interpolation through (ts, vals).
      double interp = 0.0;
      for (std::size_t i = 0; i < ts.size(); ++i) {
        double li = 1.0;
        for (std::size_t j = 0; j < ts.size(); ++j)
          if (j != i) li *= (t - ts[j]) / (ts[i] - ts[j]);
        interp += vals[i] * li;
      }
      double exact = trace(a + (b - a) * t);
      scale = std::max(scale, std::abs(exact));
      if (std::abs(interp - exact) > 1e-9 * scale)
        throw std::invalid_argument(
            "lift_dirichlet: trace is not piecewise polynomial of the space degree on the "
            "boundary mesh");
    }
  }
  return w;
}

// ---------------------------------------------------------------------------
// FemSolver

struct FemSolver::Impl {
  const FESpace* space;
  EllipticCoefficients coeffs;
  Eigen::SparseMatrix<double> K;
};

FemSolver::FemSolver(const FESpace& space, const EllipticCoefficients& coeffs)
    : impl_(std::make_shared<Impl>()) {
  impl_->space = &space;
  impl_->coeffs = coeffs;
  impl_->K = assemble_matrix(space, coeffs);
}

DiscreteFunction FemSolver::solve_primal(const LoadData& load,
                                         const DiscreteFunction* dirichlet) {
  Eigen::VectorXd F = assemble_load_vector(*impl_->space, load);
  LinearSystem sys = reduce_system(*impl_->space, impl_->K, F, dirichlet, false,
                                   impl_->coeffs.symmetric());
  return solve(sys, *impl_->space);
}

DiscreteFunction FemSolver::solve_dual(const LoadData& dual_load,
                                       const DiscreteFunction* dirichlet) {
  Eigen::VectorXd G = assemble_load_vector(*impl_->space, dual_load);
  LinearSystem sys = reduce_system(*impl_->space, impl_->K, G, dirichlet, true,
                                   impl_->coeffs.symmetric());
  return solve(sys, *impl_->space);
}

double FemSolver::bilinear(const DiscreteFunction& w, const DiscreteFunction& v) const {
  return v.coeff.dot(impl_->K * w.coeff);
}

double FemSolver::apply_load(const LoadData& load, const DiscreteFunction& v) const {
  Eigen::VectorXd F = assemble_load_vector(*impl_->space, load);
  return F.dot(v.coeff);
}

}  // namespace goafem
