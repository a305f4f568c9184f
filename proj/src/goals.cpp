#include "goafem/goals.hpp"

#include <cmath>

#include "goafem/quadrature.hpp"

namespace goafem {

namespace {

// int load1 * fn - load2 . grad fn over the whole domain.
double apply_functional(const LoadData& load, const DiscreteFunction& fn) {
  const FESpace& space = *fn.space;
  const Mesh2& mesh = space.mesh();
  const int p = space.degree();
  if (load.zero()) return 0.0;
  const TriangleRule& rule = TriangleRule::for_degree(2 * p + 1);
  double acc = 0.0;
  for (std::int32_t t = 0; t < mesh.num_triangles(); ++t) {
    Mat2 j, jinv_t;
    double det;
    space.jacobian(t, j, jinv_t, det);
    Vec2 l2 = load.f2_at(mesh.tri(t).root);
    bool need_grad = !(l2.x == 0.0 && l2.y == 0.0);
    double elem = 0.0;
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const Vec2& ref = rule.points[q];
      double contrib = 0.0;
      if (load.f1) contrib += load.f1(space.map_to_physical(t, ref)) * fn.value(t, ref);
      if (need_grad) contrib -= dot(l2, fn.gradient(t, ref));
      elem += rule.weights[q] * contrib;
    }
    acc += det * elem;
  }
  return acc;
}

}  // namespace

double goal_volume(const DiscreteFunction& U, const LoadData& g) {
  return apply_functional(g, U);
}

double goal_flux(const DiscreteFunction& Z, const LoadData& load) {
  return -apply_functional(load, Z);
}

double goal_error(double value, double reference) { return std::abs(reference - value); }

}  // namespace goafem
