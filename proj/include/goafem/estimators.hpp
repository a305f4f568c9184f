#pragma once

#include <vector>

#include "goafem/fem.hpp"
#include "goafem/mesh.hpp"

namespace goafem {

// Squared per-element indicators plus their sum.
struct EstimatorField {
  std::vector<double> eta2;
  double total2 = 0.0;
};

// Residual estimator for the primal problem:
//   eta(T)^2 = h_T^2 || L U - f1 ||_{L2(T)}^2
//            + h_T  sum_{interior edges e of T} || [(A grad U + f2) . n] ||_{L2(e)}^2
// with L V = -div(A grad V) + b . grad V + c V, h_T = area(T)^{1/2}, and the
// full jump weight charged to both adjacent elements. Boundary edges
// contribute nothing (pure Dirichlet). f2 is piecewise constant per root
// element, so -div f2 vanishes elementwise and only enters the jumps.
EstimatorField eta_primal(const FESpace& space, const EllipticCoefficients& coeffs,
                          const LoadData& load, const DiscreteFunction& U);

// Same for the dual (formally adjoint) operator
//   L' V = -div(A grad V) - b . grad V + (c - div b) V
// with dual data (g1, g2) and jump flux (A grad Z + g2) . n.
EstimatorField eta_dual(const FESpace& space, const EllipticCoefficients& coeffs,
                        const LoadData& dual_load, const DiscreteFunction& Z);

// Sum of squared indicators over a subset of elements.
double restrict_sum(const EstimatorField& field, const MarkedSet& subset);

}  // namespace goafem
