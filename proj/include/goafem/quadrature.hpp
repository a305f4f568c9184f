#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "goafem/geometry.hpp"

namespace goafem {

// Gauss-Legendre rule on [-1, 1], exact for polynomials of degree 2n-1.
// Nodes ascending; computed by Newton iteration on Legendre polynomials.
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;

  explicit GaussLegendre(int n);

  // Cached access; rules are immutable once built.
  static const GaussLegendre& get(int n);
};

// Quadrature rule on the reference triangle {(x,y): x,y >= 0, x+y <= 1},
// weights summing to 1/2. Built as a collapsed (Duffy) tensor Gauss rule:
// exact for total degree d when n >= (d+2)/2 points per direction.
struct TriangleRule {
  std::vector<Vec2> points;
  std::vector<double> weights;

  static const TriangleRule& for_degree(int degree);
};

// Integral of f over [a, b] by adaptive Gauss-Legendre bisection. The error
// indicator compares one 15-point evaluation against the sum of two halves;
// recursion stops when they agree within the interval's share of abs_tol.
// max_depth bounds the subdivision depth and max_nodes the total number of
// subdivided intervals; when either budget is exhausted the current estimate
// is returned (the result is then only as accurate as the budget allowed).
double adaptive_gauss(const std::function<double(double)>& f, double a, double b,
                      double abs_tol, int max_depth = 48, std::int64_t max_nodes = 200000);

}  // namespace goafem
