#include "goafem/quadrature.hpp"

#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <stdexcept>

namespace goafem {

GaussLegendre::GaussLegendre(int n) {
  if (n < 1) throw std::invalid_argument("GaussLegendre: n must be >= 1");
  nodes.resize(n);
  weights.resize(n);
  // Newton iteration from the Chebyshev-like initial guess; standard scheme.
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      // Evaluate P_n(x) and P'_n(x) by the three-term recurrence.
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    double w = 2.0 / ((1.0 - x * x) * pp * pp);
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    weights[i] = w;
    weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) nodes[n / 2] = 0.0;
}

const GaussLegendre& GaussLegendre::get(int n) {
  static std::mutex mu;
  static std::map<int, GaussLegendre> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, GaussLegendre(n)).first;
  return it->second;
}

namespace {

TriangleRule build_triangle_rule(int degree) {
  // Duffy map from the unit square: xi = u, eta = v (1 - u), Jacobian (1 - u).
  // A monomial xi^i eta^j with i + j <= d pulls back to degree <= d + 1 in u
  // and <= d in v, so n >= (d + 2) / 2 Gauss points per direction are exact.
  int n = (degree + 3) / 2;
  if (n < 1) n = 1;
  const GaussLegendre& g = GaussLegendre::get(n);
  TriangleRule rule;
  rule.points.reserve(static_cast<std::size_t>(n) * n);
  rule.weights.reserve(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    double u = 0.5 * (g.nodes[i] + 1.0);
    double wu = 0.5 * g.weights[i];
    for (int j = 0; j < n; ++j) {
      double v = 0.5 * (g.nodes[j] + 1.0);
      double wv = 0.5 * g.weights[j];
      rule.points.push_back({u, v * (1.0 - u)});
      rule.weights.push_back(wu * wv * (1.0 - u));
    }
  }
  return rule;
}

}  // namespace

const TriangleRule& TriangleRule::for_degree(int degree) {
  static std::mutex mu;
  static std::map<int, TriangleRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(degree);
  if (it == cache.end()) it = cache.emplace(degree, build_triangle_rule(degree)).first;
  return it->second;
}

namespace {

double gauss15(const std::function<double(double)>& f, double a, double b) {
  const GaussLegendre& g = GaussLegendre::get(15);
  double mid = 0.5 * (a + b);
  double half = 0.5 * (b - a);
  double sum = 0.0;
  for (int i = 0; i < 15; ++i) sum += g.weights[i] * f(mid + half * g.nodes[i]);
  return sum * half;
}

double adaptive_rec(const std::function<double(double)>& f, double a, double b, double whole,
                    double tol, int depth, int max_depth, std::int64_t& nodes_left) {
  double m = 0.5 * (a + b);
  double left = gauss15(f, a, m);
  double right = gauss15(f, m, b);
  double diff = std::abs(left + right - whole);
  if (diff <= tol || depth >= max_depth || --nodes_left <= 0) return left + right;
  return adaptive_rec(f, a, m, left, 0.5 * tol, depth + 1, max_depth, nodes_left) +
         adaptive_rec(f, m, b, right, 0.5 * tol, depth + 1, max_depth, nodes_left);
}

}  // namespace

double adaptive_gauss(const std::function<double(double)>& f, double a, double b, double abs_tol,
                      int max_depth, std::int64_t max_nodes) {
  if (!(b > a)) return 0.0;
  double whole = gauss15(f, a, b);
  std::int64_t nodes_left = max_nodes;
  return adaptive_rec(f, a, b, whole, abs_tol, 0, max_depth, nodes_left);
}

}  // namespace goafem
