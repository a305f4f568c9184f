#include "goafem/estimators.hpp"

#include <cmath>
#include <stdexcept>

#include "goafem/quadrature.hpp"

namespace goafem {

namespace {

EstimatorField residual_estimator(const FESpace& space, const EllipticCoefficients& coeffs,
                                  const LoadData& load, const DiscreteFunction& fn, bool dual) {
  const Mesh2& mesh = space.mesh();
  const int p = space.degree();
  if (fn.space != &space) throw std::invalid_argument("estimator: function/space mismatch");

  const double b_sign = dual ? -1.0 : 1.0;
  const double c_shift = dual ? -coeffs.div_b() : 0.0;

  EstimatorField out;
  out.eta2.assign(mesh.num_triangles(), 0.0);

  // Element residual: h_T^2 int_T (L fn - f1)^2.
  const TriangleRule& rule = TriangleRule::for_degree(2 * p + 1);
  for (std::int32_t t = 0; t < mesh.num_triangles(); ++t) {
    const std::int32_t root = mesh.tri(t).root;
    const Mat2& A = coeffs.A_at(root);
    const double c_eff = coeffs.c_at(root) + c_shift;
    Mat2 j, jinv_t;
    double det;
    space.jacobian(t, j, jinv_t, det);
    double acc = 0.0;
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const Vec2& ref = rule.points[q];
      Vec2 x = space.map_to_physical(t, ref);
      std::array<double, 3> h = fn.hessian(t, ref);
      double divAgrad = A.a00 * h[0] + (A.a01 + A.a10) * h[1] + A.a11 * h[2];
      double r = -divAgrad;
      if (coeffs.has_b) r += b_sign * dot(coeffs.b_at(x), fn.gradient(t, ref));
      if (c_eff != 0.0) r += c_eff * fn.value(t, ref);
      if (load.f1) r -= load.f1(x);
      acc += rule.weights[q] * r * r;
    }
    double area = 0.5 * det;
    out.eta2[t] = area * (det * acc);  // h_T^2 = area; det * acc = int_T r^2
  }

  // Edge jumps: full weight h_T int_e [(A grad fn + f2) . n]^2 to both sides.
  const GaussLegendre& g = GaussLegendre::get(p + 1);
  for (std::int32_t e = 0; e < mesh.num_edges(); ++e) {
    if (mesh.edge_on_boundary(e)) continue;
    const std::int32_t t0 = mesh.edge_tris(e)[0];
    const std::int32_t t1 = mesh.edge_tris(e)[1];
    const Vec2& a = mesh.vertex(mesh.edge(e)[0]);
    const Vec2& b = mesh.vertex(mesh.edge(e)[1]);
    Vec2 tang = b - a;
    double len = norm(tang);
    Vec2 n{tang.y / len, -tang.x / len};
    const Mat2& A0 = coeffs.A_at(mesh.tri(t0).root);
    const Mat2& A1 = coeffs.A_at(mesh.tri(t1).root);
    Vec2 f2_0 = load.f2_at(mesh.tri(t0).root);
    Vec2 f2_1 = load.f2_at(mesh.tri(t1).root);
    double acc = 0.0;
    for (int q = 0; q < p + 1; ++q) {
      double s = 0.5 * (g.nodes[q] + 1.0);
      Vec2 x = a + tang * s;
      Vec2 w0 = A0 * fn.gradient(t0, space.map_to_reference(t0, x)) + f2_0;
      Vec2 w1 = A1 * fn.gradient(t1, space.map_to_reference(t1, x)) + f2_1;
      double jump = dot(w0 - w1, n);
      acc += 0.5 * g.weights[q] * jump * jump;
    }
    double integral = len * acc;
    out.eta2[t0] += std::sqrt(mesh.area(t0)) * integral;
    out.eta2[t1] += std::sqrt(mesh.area(t1)) * integral;
  }

  for (double v : out.eta2) out.total2 += v;
  return out;
}

}  // namespace

EstimatorField eta_primal(const FESpace& space, const EllipticCoefficients& coeffs,
                          const LoadData& load, const DiscreteFunction& U) {
  return residual_estimator(space, coeffs, load, U, /*dual=*/false);
}

EstimatorField eta_dual(const FESpace& space, const EllipticCoefficients& coeffs,
                        const LoadData& dual_load, const DiscreteFunction& Z) {
  return residual_estimator(space, coeffs, dual_load, Z, /*dual=*/true);
}

double restrict_sum(const EstimatorField& field, const MarkedSet& subset) {
  double s = 0.0;
  for (std::int32_t i : subset.idx) {
    if (i < 0 || i >= static_cast<std::int32_t>(field.eta2.size()))
      throw std::invalid_argument("restrict_sum: index out of range");
    s += field.eta2[i];
  }
  return s;
}

}  // namespace goafem
