#include "goafem/bem.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "goafem/quadrature.hpp"

namespace goafem {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }

struct SegClosest {
  double s = 0.0;  // parameter in [0,1] on the first segment
  double t = 0.0;  // parameter in [0,1] on the second segment
  double dist = 0.0;
};

SegClosest seg_seg_closest(const Vec2& p1, const Vec2& q1, const Vec2& p2, const Vec2& q2) {
  Vec2 d1 = q1 - p1, d2 = q2 - p2, r = p1 - p2;
  double a = dot(d1, d1), e = dot(d2, d2);
  double f = dot(d2, r), c = dot(d1, r), b = dot(d1, d2);
  double denom = a * e - b * b;
  SegClosest out;
  out.s = denom > 1e-14 * a * e ? clamp01((b * f - c * e) / denom) : 0.0;
  double t = (b * out.s + f) / e;
  if (t < 0.0) {
    t = 0.0;
    out.s = clamp01(-c / a);
  } else if (t > 1.0) {
    t = 1.0;
    out.s = clamp01((b - c) / a);
  }
  out.t = t;
  out.dist = norm(p1 + d1 * out.s - (p2 + d2 * t));
  return out;
}

// Integral of f along the segment (arclength measure) by one Gauss rule.
double gauss_segment(const Vec2& a, const Vec2& b, int n,
                     const std::function<double(const Vec2&)>& f) {
  const GaussLegendre& g = GaussLegendre::get(n);
  Vec2 mid = (a + b) * 0.5, half = (b - a) * 0.5;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) acc += g.weights[i] * f(mid + half * g.nodes[i]);
  return acc * 0.5 * norm(b - a);
}

// Integral of f along the segment with geometric grading of the subintervals
// toward arclength parameter c in [0, L] (where the integrand may be nearly
// singular); plain Gauss on each subinterval.
double graded_segment(const Vec2& a, const Vec2& b, double c,
                      const std::function<double(const Vec2&)>& f) {
  const double L = norm(b - a);
  const Vec2 d = (b - a) / L;
  const GaussLegendre& g = GaussLegendre::get(12);
  auto piece = [&](double t0, double t1) {
    double mid = 0.5 * (t0 + t1), half = 0.5 * (t1 - t0), acc = 0.0;
    for (std::size_t i = 0; i < g.nodes.size(); ++i)
      acc += g.weights[i] * f(a + d * (mid + half * g.nodes[i]));
    return acc * half;
  };
  const double q = 0.35;
  double total = 0.0;
  for (int side = 0; side < 2; ++side) {
    double len = side == 0 ? c : L - c;
    if (len <= 0.0) continue;
    int steps = 0;
    double w = len;
    while (w > 1e-10 * L && steps < 64) {
      double w_next = w * q;
      total += side == 0 ? piece(c - w, c - w_next) : piece(c + w_next, c + w);
      w = w_next;
      ++steps;
    }
    if (w > 0.0) total += side == 0 ? piece(c - w, c) : piece(c, c + w);
  }
  return total;
}

// Composite geometrically graded Gauss quadrature of f over [lo, hi] for
// integrands analytic inside the interval but of limited smoothness at one
// endpoint (the polygon-corner behavior of boundary data). Layer widths
// shrink by a fixed ratio toward that endpoint; the innermost layer is
// integrated directly, so no evaluation point gets closer to the endpoint
// than about 1e-11 of the interval length.
double graded_endpoint(const std::function<double(double)>& f, double lo, double hi,
                       bool toward_lo) {
  const GaussLegendre& g = GaussLegendre::get(16);
  auto piece = [&](double t0, double t1) {
    double mid = 0.5 * (t0 + t1), half = 0.5 * (t1 - t0), acc = 0.0;
    for (std::size_t i = 0; i < g.nodes.size(); ++i)
      acc += g.weights[i] * f(mid + half * g.nodes[i]);
    return acc * half;
  };
  const double L = hi - lo;
  const double q = 0.25;
  double acc = 0.0;
  double r = L;  // distance of the current layer's outer boundary from the endpoint
  while (r > 1e-8 * L) {
    double rn = r * q;
    acc += toward_lo ? piece(lo + rn, lo + r) : piece(hi - r, hi - rn);
    r = rn;
  }
  acc += toward_lo ? piece(lo, lo + r) : piece(hi - r, hi);
  return acc;
}

}  // namespace

double log_potential(const Vec2& x, const Vec2& a, const Vec2& b) {
  Vec2 dl = b - a;
  double len = norm(dl);
  Vec2 d = dl / len;
  Vec2 w = x - a;
  double beta = dot(w, d);
  // Perpendicular offset through the cross product: norm2(w) - beta^2 cancels
  // catastrophically for points near the segment's line and the resulting
  // sqrt(eps)-level gamma noise would leak into the atan term below.
  double gamma = std::abs(cross(d, w));
  double gamma2 = gamma * gamma;
  double u0 = -beta, u1 = len - beta;
  if (gamma > 1e-13 * (len + norm(w))) {
    auto phi = [&](double u) {
      return 0.5 * u * std::log(u * u + gamma2) - u + gamma * std::atan(u / gamma);
    };
    return phi(u1) - phi(u0);
  }
  auto phi0 = [](double u) {
    double m = std::abs(u);
    return m < 1e-300 ? 0.0 : u * std::log(m) - u;
  };
  return phi0(u1) - phi0(u0);
}

double dlog_potential(const Vec2& x, const Vec2& t, const Vec2& a, const Vec2& b) {
  Vec2 dl = b - a;
  double len = norm(dl);
  Vec2 d = dl / len;
  Vec2 w = x - a;
  double beta = dot(w, d);
  // gp is the signed perpendicular offset of x; w - d beta = gp * perp(d),
  // both computed cancellation-free (see log_potential).
  double gp = cross(d, w);
  double gamma = std::abs(gp);
  double gamma2 = gp * gp;
  double u0 = -beta, u1 = len - beta;
  double qq = dot(d, t);
  if (gamma > 1e-13 * (len + norm(w))) {
    double pp = gp * cross(d, t);
    return pp / gamma * (std::atan(u1 / gamma) - std::atan(u0 / gamma)) -
           0.5 * qq * (std::log(u1 * u1 + gamma2) - std::log(u0 * u0 + gamma2));
  }
  // Collinear (and the principal value on the self-panel).
  double m0 = std::max(std::abs(u0), 1e-300), m1 = std::max(std::abs(u1), 1e-300);
  return -qq * (std::log(m1) - std::log(m0));
}

LayerOperatorAssembly assemble_V(const BoundaryMesh& mesh) {
  const auto n = static_cast<Eigen::Index>(mesh.num_panels());
  double diam2 = 0.0;
  for (std::int64_t i = 0; i < mesh.num_nodes(); ++i)
    for (std::int64_t j = i + 1; j < mesh.num_nodes(); ++j)
      diam2 = std::max(diam2, norm2(mesh.node(static_cast<std::int32_t>(i)) -
                                    mesh.node(static_cast<std::int32_t>(j))));
  if (!(std::sqrt(diam2) < 1.0))
    throw std::invalid_argument("assemble_V: boundary diameter must be below 1");

  LayerOperatorAssembly out;
  out.mesh = &mesh;
  out.V.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Panel& pi = mesh.panel(static_cast<std::int32_t>(i));
    const Vec2 ai = mesh.node(pi.a), bi = mesh.node(pi.b);
    out.V(i, i) = pi.h * pi.h / kTwoPi * (1.5 - std::log(pi.h));
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const Panel& pj = mesh.panel(static_cast<std::int32_t>(j));
      const Vec2 aj = mesh.node(pj.a), bj = mesh.node(pj.b);
      auto inner = [&](const Vec2& x) { return log_potential(x, aj, bj); };
      SegClosest cp = seg_seg_closest(ai, bi, aj, bj);
      double hmax = std::max(pi.h, pj.h);
      double val;
      if (cp.dist >= 3.0 * hmax)
        val = gauss_segment(ai, bi, cp.dist >= 6.0 * hmax ? 6 : 10, inner);
      else
        val = graded_segment(ai, bi, cp.s * pi.h, inner);
      val *= -1.0 / kTwoPi;
      out.V(i, j) = val;
      out.V(j, i) = val;
    }
  }
  return out;
}

BemFactor::BemFactor(const Eigen::MatrixXd& V) : V_(&V) {
  const Eigen::Index n = V.rows();
  scale_.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(V(i, i) > 0.0)) throw std::runtime_error("bem_solve: non-positive diagonal entry");
    scale_[i] = 1.0 / std::sqrt(V(i, i));
  }
  // Pivoted LDLT instead of plain Cholesky: strongly graded meshes (forced
  // bisection of weight-transition panels every level) push the element-size
  // ratio past 1e12, where rounding makes the equilibrated matrix border on
  // semidefinite although it is positive definite in exact arithmetic.
  Eigen::MatrixXd scaled = scale_.asDiagonal() * V * scale_.asDiagonal();
  ldlt_.compute(scaled);
  if (ldlt_.info() != Eigen::Success)
    throw std::runtime_error("bem_solve: factorization failed");
}

Eigen::VectorXd BemFactor::solve(const Eigen::VectorXd& rhs) const {
  Eigen::VectorXd x = scale_.asDiagonal() * ldlt_.solve(Eigen::VectorXd(scale_.asDiagonal() * rhs));
  Eigen::VectorXd r = rhs - *V_ * x;
  x += scale_.asDiagonal() * ldlt_.solve(Eigen::VectorXd(scale_.asDiagonal() * r));
  r = rhs - *V_ * x;
  // Normwise backward-error bound: the attainable residual of a direct solve
  // scales with ||V|| ||x||, which dwarfs ||rhs|| on ill-conditioned levels.
  double bound = 1e-10 * std::max(rhs.norm() + V_->norm() * x.norm(), 1e-300);
  if (!(r.norm() <= bound))
    throw std::runtime_error("bem_solve: residual above tolerance after refinement");
  return x;
}

Eigen::VectorXd bem_solve(const Eigen::MatrixXd& V, const Eigen::VectorXd& rhs) {
  return BemFactor(V).solve(rhs);
}

// ---------------------------------------------------------------------------

DoubleLayerData::DoubleLayerData(std::vector<Vec2> corners, std::function<double(Vec2)> phi,
                                 std::function<Vec2(Vec2)> grad_phi, double tol)
    : corners_(std::move(corners)), phi_(std::move(phi)), grad_phi_(std::move(grad_phi)), tol_(tol) {
  if (corners_.size() < 3) throw std::invalid_argument("DoubleLayerData: need at least 3 corners");
  breaks_.resize(corners_.size() + 1);
  breaks_[0] = 0.0;
  for (std::size_t i = 0; i < corners_.size(); ++i)
    breaks_[i + 1] = breaks_[i] + norm(corners_[(i + 1) % corners_.size()] - corners_[i]);

  // One fixed composite rule per edge, graded from the midpoint into both
  // corners with ratio q; at distance u from a corner the local layer width
  // is (1-q) u, which keeps the mapped analyticity radius of every kernel
  // x -> (phi(y)-phi(x)) k(x, y(u)) bounded below for evaluation points x on
  // the other edges (their nearest approach to this edge is never interior
  // to a layer, only at a corner). 16-point Gauss per layer then converges
  // geometrically, uniformly in x.
  const GaussLegendre& g = GaussLegendre::get(16);
  const double q = 0.25;
  rules_.resize(corners_.size());
  for (std::size_t e = 0; e < corners_.size(); ++e) {
    const Vec2 c0 = corners_[e];
    const double len = breaks_[e + 1] - breaks_[e];
    const Vec2 te = (corners_[(e + 1) % corners_.size()] - c0) / len;
    EdgeRule& rule = rules_[e];
    rule.ne = Vec2{te.y, -te.x};
    auto add_layer = [&](double t0, double t1) {
      double mid = 0.5 * (t0 + t1), half = 0.5 * (t1 - t0);
      for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        Vec2 y = c0 + te * (mid + half * g.nodes[i]);
        rule.y.push_back(y);
        rule.w.push_back(half * g.weights[i]);
        rule.phi_val.push_back(phi_(y));
      }
    };
    const double floor_len = std::max(tol_, 1e-15) * len;
    for (int side = 0; side < 2; ++side) {
      double r = 0.5 * len;  // current layer's outer distance from the corner
      while (r > floor_len) {
        double rn = r * q;
        if (side == 0)
          add_layer(rn, r);
        else
          add_layer(len - r, len - rn);
        r = rn;
      }
      if (side == 0)
        add_layer(0.0, r);
      else
        add_layer(len - r, len);
    }
  }
}

int DoubleLayerData::edge_of_s(double s) const {
  double perim = breaks_.back();
  s = std::fmod(s, perim);
  if (s < 0.0) s += perim;
  auto it = std::upper_bound(breaks_.begin(), breaks_.end(), s);
  int e = static_cast<int>(it - breaks_.begin()) - 1;
  return std::min(std::max(e, 0), edge_count() - 1);
}

double DoubleLayerData::F(const Vec2& x, int edge) const {
  const double phix = phi_(x);
  double acc = 0.0;
  for (int e = 0; e < edge_count(); ++e) {
    if (e == edge) continue;  // the kernel vanishes on x's own straight edge
    const EdgeRule& rule = rules_[static_cast<std::size_t>(e)];
    double s = 0.0;
    for (std::size_t i = 0; i < rule.y.size(); ++i) {
      Vec2 d = x - rule.y[i];
      s += rule.w[i] * (rule.phi_val[i] - phix) * dot(d, rule.ne) / norm2(d);
    }
    acc += s;
  }
  return acc / kTwoPi;
}

double DoubleLayerData::dFds(const Vec2& x, const Vec2& t, int edge) const {
  if (!grad_phi_) throw std::logic_error("DoubleLayerData: dFds needs grad_phi");
  const double phix = phi_(x);
  double acc = 0.0;
  for (int e = 0; e < edge_count(); ++e) {
    if (e == edge) continue;
    const EdgeRule& rule = rules_[static_cast<std::size_t>(e)];
    double s = 0.0;
    for (std::size_t i = 0; i < rule.y.size(); ++i) {
      Vec2 d = x - rule.y[i];
      double d2 = norm2(d);
      double dk = (dot(t, rule.ne) * d2 - 2.0 * dot(d, rule.ne) * dot(d, t)) / (d2 * d2);
      s += rule.w[i] * (rule.phi_val[i] - phix) * dk;
    }
    acc += s;
  }
  return acc / kTwoPi + 0.5 * dot(grad_phi_(x), t);
}

double DoubleLayerData::gauss_integral(const Vec2& x, int edge) const {
  double acc = 0.0;
  for (int e = 0; e < edge_count(); ++e) {
    if (e == edge) continue;
    const EdgeRule& rule = rules_[static_cast<std::size_t>(e)];
    double s = 0.0;
    for (std::size_t i = 0; i < rule.y.size(); ++i) {
      Vec2 d = x - rule.y[i];
      s += rule.w[i] * dot(d, rule.ne) / norm2(d);
    }
    acc += s;
  }
  return acc / kTwoPi;
}

double panel_rhs_dirichlet(const BoundaryMesh& mesh, std::int32_t panel,
                           const DoubleLayerData& data, double tol) {
  const Panel& p = mesh.panel(panel);
  const Vec2 a = mesh.node(p.a);
  const Vec2 d = mesh.tangent(panel);
  const int edge = data.edge_of_s(p.s0 + 0.5 * p.h);
  auto f = [&](double tau) { return data.F(a + d * tau, edge); };
  auto at_corner = [&](const Vec2& x) {
    for (const Vec2& c : mesh.corners())
      if (norm(x - c) <= 1e-12) return true;
    return false;
  };
  // F is analytic on open polygon edges but only of limited smoothness at
  // corners, where adaptive bisection would both recurse deeply and push
  // evaluation points so close to the corner that every F evaluation becomes
  // expensive in turn. Corner-ending panels therefore use the graded
  // composite rule (corners stay mesh nodes under bisection, so the
  // singularity always sits at a panel endpoint).
  const bool c0 = at_corner(a);
  const bool c1 = at_corner(mesh.node(p.b));
  if (!c0 && !c1) return adaptive_gauss(f, 0.0, p.h, tol);
  const double mid = 0.5 * p.h;
  double acc = c0 ? graded_endpoint(f, 0.0, mid, true) : adaptive_gauss(f, 0.0, mid, 0.5 * tol);
  acc += c1 ? graded_endpoint(f, mid, p.h, false) : adaptive_gauss(f, mid, p.h, 0.5 * tol);
  return acc;
}

Eigen::VectorXd assemble_rhs_dirichlet(const BoundaryMesh& mesh,
                                       const std::function<double(Vec2)>& phi) {
  if (mesh.corners().empty())
    throw std::invalid_argument("assemble_rhs_dirichlet: mesh has no generating polygon");
  DoubleLayerData data(mesh.corners(), phi);
  Eigen::VectorXd rhs(mesh.num_panels());
  for (std::int64_t i = 0; i < mesh.num_panels(); ++i)
    rhs[i] = panel_rhs_dirichlet(mesh, static_cast<std::int32_t>(i), data);
  return rhs;
}

// ---------------------------------------------------------------------------

double single_layer_deriv(const BoundaryMesh& mesh, const Eigen::VectorXd& U,
                          std::int32_t panel, const Vec2& x, const Vec2& t) {
  (void)panel;  // the principal-value form handles the self-panel as written
  double acc = 0.0;
  for (std::int64_t j = 0; j < mesh.num_panels(); ++j) {
    const Panel& pj = mesh.panel(static_cast<std::int32_t>(j));
    acc += U[j] * dlog_potential(x, t, mesh.node(pj.a), mesh.node(pj.b));
  }
  return -acc / kTwoPi;
}

double single_layer_value(const BoundaryMesh& mesh, const Eigen::VectorXd& U, const Vec2& x) {
  double acc = 0.0;
  for (std::int64_t j = 0; j < mesh.num_panels(); ++j) {
    const Panel& pj = mesh.panel(static_cast<std::int32_t>(j));
    acc += U[j] * log_potential(x, mesh.node(pj.a), mesh.node(pj.b));
  }
  return -acc / kTwoPi;
}

double eta_bem_node(int q) { return 0.5 * (GaussLegendre::get(kEtaBemNodes).nodes[q] + 1.0); }

EstimatorField eta_bem(const BoundaryMesh& mesh, const Eigen::VectorXd& U,
                       const BoundaryDerivFn& dFds, double epsilon, bool dual) {
  const auto n = mesh.num_panels();
  if (U.size() != n) throw std::invalid_argument("eta_bem: coefficient size mismatch");
  const GaussLegendre& g = GaussLegendre::get(kEtaBemNodes);
  EstimatorField out;
  out.eta2.resize(static_cast<std::size_t>(n));
  const double expo = dual ? 1.0 + epsilon : 1.0 - epsilon;
  for (std::int32_t p = 0; p < n; ++p) {
    const Panel& pl = mesh.panel(p);
    const Vec2 t = mesh.tangent(p);
    double acc = 0.0;
    for (int q = 0; q < kEtaBemNodes; ++q) {
      double tq = 0.5 * (g.nodes[q] + 1.0);
      Vec2 x = mesh.point(p, tq);
      double r = single_layer_deriv(mesh, U, p, x, t) - dFds(p, q, x, t);
      acc += 0.5 * g.weights[q] * r * r;
    }
    double hw = epsilon == 0.0 ? pl.h : std::pow(pl.h, expo);
    out.eta2[static_cast<std::size_t>(p)] = hw * pl.h * acc;
    out.total2 += out.eta2[static_cast<std::size_t>(p)];
  }
  return out;
}

// ---------------------------------------------------------------------------

double BemGoalWeight::value(double s) const {
  if (kind == Kind::Characteristic) return (s >= s_begin && s <= s_end) ? 1.0 : 0.0;
  if (s <= s_begin || s >= s_end) return 0.0;
  return s <= s_center ? (s - s_begin) / (s_center - s_begin)
                       : (s_end - s) / (s_end - s_center);
}

WeightInterp interp_weight(const BoundaryMesh& mesh, const BemGoalWeight& weight) {
  WeightInterp out;
  out.node_value.resize(static_cast<std::size_t>(mesh.num_nodes()));
  for (std::int32_t i = 0; i < mesh.num_nodes(); ++i)
    out.node_value[static_cast<std::size_t>(i)] = weight.value(mesh.node_s(i));
  if (weight.kind == BemGoalWeight::Kind::Characteristic) {
    for (std::int32_t p = 0; p < mesh.num_panels(); ++p) {
      const Panel& pl = mesh.panel(p);
      if (out.node_value[static_cast<std::size_t>(pl.a)] !=
          out.node_value[static_cast<std::size_t>(pl.b)])
        out.forced.idx.push_back(p);
    }
  }
  return out;
}

Eigen::VectorXd weight_load(const BoundaryMesh& mesh, const WeightInterp& interp) {
  Eigen::VectorXd g(mesh.num_panels());
  for (std::int32_t p = 0; p < mesh.num_panels(); ++p) {
    const Panel& pl = mesh.panel(p);
    g[p] = pl.h * 0.5 *
           (interp.node_value[static_cast<std::size_t>(pl.a)] +
            interp.node_value[static_cast<std::size_t>(pl.b)]);
  }
  return g;
}

Eigen::VectorXd weight_true_integrals(const BoundaryMesh& mesh, const BemGoalWeight& weight) {
  std::vector<double> kinks{weight.s_begin, weight.s_end};
  if (weight.kind == BemGoalWeight::Kind::ConformingHat) kinks.push_back(weight.s_center);
  Eigen::VectorXd g(mesh.num_panels());
  for (std::int32_t p = 0; p < mesh.num_panels(); ++p) {
    const Panel& pl = mesh.panel(p);
    std::vector<double> pts{pl.s0, pl.s0 + pl.h};
    for (double k : kinks)
      if (k > pl.s0 && k < pl.s0 + pl.h) pts.push_back(k);
    std::sort(pts.begin(), pts.end());
    double acc = 0.0;  // midpoint rule, exact on each affine/constant piece
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
      acc += weight.value(0.5 * (pts[i] + pts[i + 1])) * (pts[i + 1] - pts[i]);
    g[p] = acc;
  }
  return g;
}

// ---------------------------------------------------------------------------

const std::vector<Vec2>& Lshape::corners() {
  static const double s8 = std::sqrt(2.0) / 8.0;
  static const std::vector<Vec2> c{{2.0 * s8, 0.0}, {0.0, 2.0 * s8}, {-s8, s8},
                                   {0.0, 0.0},      {-s8, -s8},      {0.0, -2.0 * s8}};
  return c;
}

BoundaryMesh Lshape::initial_mesh() { return BoundaryMesh::polygon(corners(), 0.25); }

double Lshape::phi(const Vec2& x) {
  double r = norm(x);
  if (r == 0.0) return 0.0;
  double alpha = std::atan2(x.y, x.x);
  return std::pow(r, 2.0 / 3.0) * std::cos(2.0 * alpha / 3.0);
}

Vec2 Lshape::grad_phi(const Vec2& x) {
  double r = norm(x);
  if (r == 0.0) throw std::invalid_argument("Lshape::grad_phi: singular at the corner");
  double alpha = std::atan2(x.y, x.x);
  double cr = std::cos(2.0 * alpha / 3.0), sr = std::sin(2.0 * alpha / 3.0);
  double ca = std::cos(alpha), sa = std::sin(alpha);
  double f = 2.0 / 3.0 * std::pow(r, -1.0 / 3.0);
  return {f * (cr * ca + sr * sa), f * (cr * sa - sr * ca)};
}

double Lshape::exact_u(const Vec2& x, const Vec2& n) { return dot(grad_phi(x), n); }

Vec2 Lshape::point_at_s(double s) {
  const auto& c = corners();
  s = std::fmod(s, 2.0);
  if (s < 0.0) s += 2.0;
  for (std::size_t e = 0; e < c.size(); ++e) {
    const Vec2 a = c[e], b = c[(e + 1) % c.size()];
    double len = norm(b - a);
    if (s <= len || e + 1 == c.size()) return a + (b - a) * (s / len);
    s -= len;
  }
  return c[0];
}

Vec2 Lshape::normal_at_s(double s) {
  const auto& c = corners();
  s = std::fmod(s, 2.0);
  if (s < 0.0) s += 2.0;
  for (std::size_t e = 0; e < c.size(); ++e) {
    const Vec2 a = c[e], b = c[(e + 1) % c.size()];
    double len = norm(b - a);
    if (s <= len || e + 1 == c.size()) {
      Vec2 t = (b - a) / len;
      return {t.y, -t.x};
    }
    s -= len;
  }
  return {0.0, 0.0};
}

double Lshape::goal_reference(const BemGoalWeight& weight, double tol) {
  // Split the integration range at polygon corners and weight kinks.
  std::vector<double> pts{weight.s_begin, weight.s_end, weight.s_center};
  const auto& c = corners();
  double acc_len = 0.0;
  for (std::size_t e = 0; e < c.size(); ++e) {
    if (acc_len > weight.s_begin && acc_len < weight.s_end) pts.push_back(acc_len);
    acc_len += norm(c[(e + 1) % c.size()] - c[e]);
  }
  std::sort(pts.begin(), pts.end());
  auto f = [&](double s) {
    return weight.value(s) * exact_u(point_at_s(s), normal_at_s(s));
  };
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    if (pts[i + 1] <= pts[i]) continue;
    acc += adaptive_gauss(f, pts[i], pts[i + 1], tol);
  }
  return acc;
}

double lshape_exact(const Vec2& point) {
  const auto& c = Lshape::corners();
  for (std::size_t e = 0; e < c.size(); ++e) {
    const Vec2 a = c[e], b = c[(e + 1) % c.size()];
    double len = norm(b - a);
    Vec2 t = (b - a) / len;
    double proj = dot(point - a, t);
    double off = std::abs(cross(t, point - a));
    if (off < 1e-12 && proj > 1e-12 && proj < len - 1e-12)
      return Lshape::exact_u(point, {t.y, -t.x});
  }
  throw std::invalid_argument("lshape_exact: point is not interior to a boundary edge");
}

}  // namespace goafem
