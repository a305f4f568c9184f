#pragma once

#include <functional>

#include "goafem/fem.hpp"

namespace goafem {

// Quantity of interest driving the dual problem.
struct GoalSpec {
  enum class Kind { Volume, Flux };
  Kind kind = Kind::Volume;
  // Volume goal g(v) = int g1 v - g2 . grad v.
  LoadData volume_load;
  // Weighted boundary flux: weight trace on the boundary (must be
  // representable in the trace space of the initial mesh).
  std::function<double(Vec2)> flux_weight;
  bool has_reference = false;
  double reference = 0.0;
};

// g(U) = int g1 U - g2 . grad U with the assembly quadrature (exact for the
// supported data classes).
double goal_volume(const DiscreteFunction& U, const LoadData& g);

// Discrete weighted boundary flux -f(Z), where Z solves the dual problem
// with boundary values equal to the flux weight. When the primal problem
// carries an inhomogeneous Dirichlet lifting w, the caller adds the
// homogenization correction a(w, Z).
double goal_flux(const DiscreteFunction& Z, const LoadData& load);

// |reference - value|.
double goal_error(double value, double reference);

}  // namespace goafem
