#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "goafem/bem.hpp"
#include "goafem/quadrature.hpp"

using namespace goafem;

namespace {

const double kPi = std::acos(-1.0);

std::vector<Vec2> regular_polygon(int n, double radius) {
  std::vector<Vec2> c(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    double a = 2.0 * kPi * k / n;
    c[static_cast<std::size_t>(k)] = {radius * std::cos(a), radius * std::sin(a)};
  }
  return c;
}

// Independent evaluation of a V entry: adaptive outer integration of the
// analytic inner potential.
double v_entry_reference(const BoundaryMesh& m, std::int32_t i, std::int32_t j, double tol) {
  Vec2 a = m.node(m.panel(i).a);
  Vec2 t = m.tangent(i);
  Vec2 ja = m.node(m.panel(j).a);
  Vec2 jb = m.node(m.panel(j).b);
  auto f = [&](double tau) { return log_potential(a + t * tau, ja, jb); };
  return -1.0 / (2.0 * kPi) * adaptive_gauss(f, 0.0, m.panel(i).h, tol);
}

BoundaryMesh uniform_bisect(const BoundaryMesh& m, int times) {
  BoundaryMesh out = m;
  for (int k = 0; k < times; ++k) {
    std::vector<std::int32_t> all(static_cast<std::size_t>(out.num_panels()));
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<std::int32_t>(i);
    out = bisect_1d(out, MarkedSet::of(std::move(all)));
  }
  return out;
}

}  // namespace

TEST_CASE("panel potentials match adaptive quadrature") {
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int rep = 0; rep < 40; ++rep) {
    Vec2 a{u(rng), u(rng)};
    Vec2 b{u(rng), u(rng)};
    double len = norm(b - a);
    if (len < 0.1) continue;
    Vec2 t = (b - a) / len;
    Vec2 x{u(rng), u(rng)};
    double dist = std::abs(cross(t, x - a));
    if (dist < 1e-3) continue;  // off-line points here; on-line cases below

    auto flog = [&](double tau) { return std::log(norm(x - (a + t * tau))); };
    double ref_log = adaptive_gauss(flog, 0.0, len, 1e-13);
    CHECK(log_potential(x, a, b) == doctest::Approx(ref_log).epsilon(1e-11));

    auto fd = [&](double tau) {
      Vec2 d = x - (a + t * tau);
      return dot(d, t) / norm2(d);
    };
    double ref_d = adaptive_gauss(fd, 0.0, len, 1e-13);
    CHECK(dlog_potential(x, t, a, b) == doctest::Approx(ref_d).epsilon(1e-10));
  }
}

TEST_CASE("on-segment potentials: integrable and principal-value branches") {
  Vec2 a{0.2, -0.1};
  Vec2 b{1.0, 0.5};
  double len = norm(b - a);
  Vec2 t = (b - a) / len;
  for (double frac : {0.3, 0.5, 0.82}) {
    double s = frac * len;
    Vec2 x = a + t * s;
    // ln|x-y| is integrable, but evaluating |x-y| within ~1e-9 of the
    // singularity is dominated by rounding noise in the subtraction, so the
    // reference integrates by quadrature only outside a window around s and
    // adds the window's integral of ln|u| in closed form (x is collinear).
    auto flog = [&](double tau) { return std::log(norm(x - (a + t * tau))); };
    const double delta = 1e-6;
    double ref_log = adaptive_gauss(flog, 0.0, s - delta, 1e-13) +
                     adaptive_gauss(flog, s + delta, len, 1e-13) +
                     2.0 * delta * (std::log(delta) - 1.0);
    CHECK(log_potential(x, a, b) == doctest::Approx(ref_log).epsilon(1e-10));
    // The tangential-derivative kernel has the explicit principal value.
    CHECK(dlog_potential(x, t, a, b) ==
          doctest::Approx(std::log(s / (len - s))).epsilon(1e-12));
  }
  // Collinear point beyond the segment end: regular integral.
  Vec2 x_out = a + t * (1.5 * len);
  auto fd = [&](double tau) {
    Vec2 d = x_out - (a + t * tau);
    return dot(d, t) / norm2(d);
  };
  CHECK(dlog_potential(x_out, t, a, b) ==
        doctest::Approx(adaptive_gauss(fd, 0.0, len, 1e-13)).epsilon(1e-10));
}

TEST_CASE("single-layer matrix agrees with independent quadrature on every pair") {
  BoundaryMesh m = uniform_bisect(Lshape::initial_mesh(), 1);  // 16 panels
  LayerOperatorAssembly va = assemble_V(m);
  REQUIRE(va.V.rows() == 16);
  CHECK((va.V - va.V.transpose()).norm() == 0.0);

  double worst = 0.0;
  for (std::int32_t i = 0; i < 16; ++i) {
    for (std::int32_t j = 0; j < 16; ++j) {
      double ref = v_entry_reference(m, i, j, 1e-14);
      double err = std::abs(va.V(i, j) - ref) / std::max(std::abs(ref), 1e-12);
      worst = std::max(worst, err);
    }
  }
  CHECK(worst <= 1e-9);

  // Self entries also match the closed form of the double integral.
  for (std::int32_t i = 0; i < 16; ++i) {
    double h = m.panel(i).h;
    double closed = h * h / (2.0 * kPi) * (1.5 - std::log(h));
    CHECK(va.V(i, i) == doctest::Approx(closed).epsilon(1e-13));
  }

  // Oversized geometry is rejected (ellipticity requires diam < 1).
  CHECK_THROWS_AS(assemble_V(BoundaryMesh::polygon(
                      {{0.0, 0.0}, {1.2, 0.0}, {1.2, 1.2}, {0.0, 1.2}}, 0.6)),
                  std::invalid_argument);
}

TEST_CASE("dense solver reaches the advertised residual") {
  BoundaryMesh m = uniform_bisect(Lshape::initial_mesh(), 2);
  LayerOperatorAssembly va = assemble_V(m);
  Eigen::VectorXd rhs = Eigen::VectorXd::Ones(va.V.rows());
  Eigen::VectorXd x = bem_solve(va.V, rhs);
  CHECK((va.V * x - rhs).norm() <= 1e-10 * rhs.norm());
  BemFactor factor(va.V);
  Eigen::VectorXd x2 = factor.solve(rhs);
  CHECK((x - x2).norm() <= 1e-12 * x.norm());
}

TEST_CASE("circle Fourier modes diagonalize the single-layer operator") {
  const double R = 0.3;
  const int k = 2;
  auto mode_error = [&](int n) {
    BoundaryMesh m = BoundaryMesh::polygon(regular_polygon(n, R), 1e9);
    REQUIRE(m.num_panels() == n);
    LayerOperatorAssembly va = assemble_V(m);
    Eigen::VectorXd U(n), expect(n);
    for (int i = 0; i < n; ++i) {
      Vec2 mid = m.midpoint(i);
      double th = std::atan2(mid.y, mid.x);
      U[i] = std::cos(k * th);
      expect[i] = R / (2.0 * k) * std::cos(k * th);
    }
    Eigen::VectorXd got = va.V * U;
    double err = 0.0;
    for (int i = 0; i < n; ++i)
      err = std::max(err, std::abs(got[i] / m.panel(i).h - expect[i]));
    return err;
  };
  double e64 = mode_error(64);
  double e128 = mode_error(128);
  CHECK(e64 <= 5e-3);
  CHECK(e128 <= 0.35 * e64);  // about second order in 1/n

  // Constant density: V[1] = -R ln R on the circle.
  BoundaryMesh m = BoundaryMesh::polygon(regular_polygon(96, R), 1e9);
  LayerOperatorAssembly va = assemble_V(m);
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(96);
  Eigen::VectorXd got = va.V * ones;
  for (int i = 0; i < 96; ++i)
    CHECK(got[i] / m.panel(i).h == doctest::Approx(-R * std::log(R)).epsilon(2e-3));
}

TEST_CASE("regularized boundary integral reproduces the jump relation") {
  DoubleLayerData data(Lshape::corners(), Lshape::phi, Lshape::grad_phi);
  CHECK(data.total_length() == doctest::Approx(2.0).epsilon(1e-14));
  BoundaryMesh m = Lshape::initial_mesh();
  for (std::int32_t p = 0; p < m.num_panels(); ++p) {
    double smid = m.panel(p).s0 + 0.5 * m.panel(p).h;
    int edge = data.edge_of_s(smid);
    CHECK(data.gauss_integral(m.midpoint(p), edge) == doctest::Approx(-0.5).epsilon(1e-10));
  }
}

TEST_CASE("constant data yields a vanishing right-hand side") {
  BoundaryMesh m = uniform_bisect(Lshape::initial_mesh(), 1);
  Eigen::VectorXd rhs = assemble_rhs_dirichlet(m, [](Vec2) { return 4.2; });
  CHECK(rhs.lpNorm<Eigen::Infinity>() <= 1e-10);
}

TEST_CASE("disk double layer halves a mean-free Fourier mode") {
  const int n = 64;
  const double R = 0.3;
  std::vector<Vec2> corners = regular_polygon(n, R);
  auto phi = [](Vec2 x) { return x.x / norm(x); };  // cos(theta)
  DoubleLayerData data(corners, phi);
  BoundaryMesh m = BoundaryMesh::polygon(corners, 1e9);
  for (int p = 0; p < n; p += 7) {
    Vec2 mid = m.midpoint(p);
    double smid = m.panel(p).s0 + 0.5 * m.panel(p).h;
    double F = data.F(mid, data.edge_of_s(smid));
    CHECK(F == doctest::Approx(0.5 * std::cos(std::atan2(mid.y, mid.x))).epsilon(5e-3));
  }
}

TEST_CASE("dirichlet data and exact flux satisfy the boundary identity") {
  // || V u_h - rhs || / || rhs || with u_h the midpoint sampling of the exact
  // flux must shrink under uniform refinement: both sides are assembled
  // through fully independent code paths. The flux is singular at the
  // reentrant corner, so uniform meshes converge slowly (about h^{2/3}).
  auto rel_gap = [&](int bisections) {
    BoundaryMesh m = uniform_bisect(Lshape::initial_mesh(), bisections);
    LayerOperatorAssembly va = assemble_V(m);
    Eigen::VectorXd dens(m.num_panels());
    for (std::int32_t p = 0; p < m.num_panels(); ++p) dens[p] = lshape_exact(m.midpoint(p));
    Eigen::VectorXd rhs = assemble_rhs_dirichlet(m, Lshape::phi);
    return ((va.V * dens - rhs).norm()) / rhs.norm();
  };
  double g0 = rel_gap(2);
  double g1 = rel_gap(4);
  double g2 = rel_gap(6);
  CHECK(g1 < 0.7 * g0);
  CHECK(g2 < 0.7 * g1);
  CHECK(g2 <= 0.05);
}

TEST_CASE("estimator vanishes when the data derivative matches the solution") {
  BoundaryMesh m = uniform_bisect(Lshape::initial_mesh(), 1);
  Eigen::VectorXd U(m.num_panels());
  for (std::int32_t i = 0; i < m.num_panels(); ++i) U[i] = std::sin(1.0 + i);
  BoundaryDerivFn self = [&](std::int32_t p, int, const Vec2& x, const Vec2& t) {
    return single_layer_deriv(m, U, p, x, t);
  };
  EstimatorField f = eta_bem(m, U, self, 0.3, false);
  CHECK(f.total2 <= 1e-24);
}

TEST_CASE("estimator weights carry the advertised mesh-size exponents") {
  BoundaryMesh m = bisect_1d(Lshape::initial_mesh(), MarkedSet::of({0, 3}));
  Eigen::VectorXd U = Eigen::VectorXd::Zero(m.num_panels());
  BoundaryDerivFn minus_one = [](std::int32_t, int, const Vec2&, const Vec2&) { return -1.0; };

  const double eps = 0.3;
  EstimatorField primal = eta_bem(m, U, minus_one, eps, false);
  EstimatorField dual = eta_bem(m, U, minus_one, eps, true);
  for (std::int32_t i = 0; i < m.num_panels(); ++i) {
    double h = m.panel(i).h;
    CHECK(primal.eta2[static_cast<std::size_t>(i)] ==
          doctest::Approx(std::pow(h, 1.0 - eps) * h).epsilon(1e-13));
    CHECK(dual.eta2[static_cast<std::size_t>(i)] ==
          doctest::Approx(std::pow(h, 1.0 + eps) * h).epsilon(1e-13));
  }

  // eps = 0: primal and dual collapse to the same h^2 weights, bit for bit.
  EstimatorField p0 = eta_bem(m, U, minus_one, 0.0, false);
  EstimatorField d0 = eta_bem(m, U, minus_one, 0.0, true);
  for (std::size_t i = 0; i < p0.eta2.size(); ++i) {
    CHECK(p0.eta2[i] == d0.eta2[i]);
    double h = m.panel(static_cast<std::int32_t>(i)).h;
    CHECK(p0.eta2[i] == doctest::Approx(h * h).epsilon(1e-15));
  }
}

TEST_CASE("goal weights: interpolation, forced panels, exact integrals") {
  BoundaryMesh m = Lshape::initial_mesh();

  BemGoalWeight hat;  // defaults: hat on [0, 1/2] peaking at 1/4
  CHECK(hat.value(0.25) == doctest::Approx(1.0));
  CHECK(hat.value(0.125) == doctest::Approx(0.5));
  CHECK(hat.value(0.6) == 0.0);
  WeightInterp hi = interp_weight(m, hat);
  CHECK(hi.forced.empty());
  Eigen::VectorXd hload = weight_load(m, hi);
  Eigen::VectorXd htrue = weight_true_integrals(m, hat);
  CHECK((hload - htrue).lpNorm<Eigen::Infinity>() <= 1e-15);
  CHECK(htrue.sum() == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(htrue[0] == doctest::Approx(0.125).epsilon(1e-14));
  CHECK(htrue[1] == doctest::Approx(0.125).epsilon(1e-14));

  BemGoalWeight chi;
  chi.kind = BemGoalWeight::Kind::Characteristic;
  CHECK(chi.value(0.0) == 1.0);
  CHECK(chi.value(0.5) == 1.0);
  CHECK(chi.value(0.6) == 0.0);
  WeightInterp ci = interp_weight(m, chi);
  REQUIRE(ci.forced.size() == 2);
  CHECK(ci.forced.contains(2));  // [1/2, 3/4]: weight drops inside
  CHECK(ci.forced.contains(7));  // wraps to s = 0 where the weight is 1
  Eigen::VectorXd ctrue = weight_true_integrals(m, chi);
  CHECK(ctrue.sum() == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(ctrue[2] == 0.0);
  Eigen::VectorXd cload = weight_load(m, ci);
  CHECK(cload[2] == doctest::Approx(0.125).epsilon(1e-14));  // interpolant ramps 1 -> 0

  // Transition panels stay exactly two under refinement of one of them.
  BoundaryMesh r = bisect_1d(m, ci.forced);
  WeightInterp ri = interp_weight(r, chi);
  CHECK(ri.forced.size() == 2);
  Eigen::VectorXd rtrue = weight_true_integrals(r, chi);
  CHECK(rtrue.sum() == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("benchmark geometry: corners, arclength walk, normals") {
  BoundaryMesh m = Lshape::initial_mesh();
  CHECK(m.num_panels() == 8);
  CHECK(m.total_length() == doctest::Approx(2.0).epsilon(1e-14));
  for (std::int32_t p = 0; p < 8; ++p) CHECK(m.panel(p).h == doctest::Approx(0.25).epsilon(1e-14));
  m.audit();

  const std::vector<Vec2>& c = Lshape::corners();
  REQUIRE(c.size() == 6);
  double diam = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i)
    for (std::size_t j = 0; j < c.size(); ++j) diam = std::max(diam, norm(c[i] - c[j]));
  CHECK(diam == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-13));

  Vec2 z0 = Lshape::point_at_s(0.25);
  CHECK(z0.x == doctest::Approx(std::sqrt(2.0) / 8.0).epsilon(1e-13));
  CHECK(z0.y == doctest::Approx(std::sqrt(2.0) / 8.0).epsilon(1e-13));
  Vec2 origin = Lshape::point_at_s(1.0);
  CHECK(std::abs(origin.x) <= 1e-14);
  CHECK(std::abs(origin.y) <= 1e-14);

  Vec2 n0 = Lshape::normal_at_s(0.25);
  CHECK(n0.x == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-13));
  CHECK(n0.y == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-13));

  // Wrap-around consistency.
  Vec2 back = Lshape::point_at_s(2.0);
  CHECK(norm(back - Lshape::point_at_s(0.0)) <= 1e-13);
}

TEST_CASE("benchmark solution: gradient, closed-form values, global balance") {
  // Gradient against finite differences of the potential.
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> u(-0.15, 0.3);
  for (int rep = 0; rep < 25; ++rep) {
    Vec2 x{u(rng), u(rng)};
    if (norm(x) < 0.02) continue;
    if (x.x < 0.0 && std::abs(x.y) < 0.05) continue;  // keep clear of the cut sector
    const double d = 1e-6;
    Vec2 g = Lshape::grad_phi(x);
    double fx = (Lshape::phi({x.x + d, x.y}) - Lshape::phi({x.x - d, x.y})) / (2 * d);
    double fy = (Lshape::phi({x.x, x.y + d}) - Lshape::phi({x.x, x.y - d})) / (2 * d);
    CHECK(g.x == doctest::Approx(fx).epsilon(1e-5));
    CHECK(g.y == doctest::Approx(fy).epsilon(1e-5));
  }

  // At z0 the outward normal is radial: u(z0) = (2/3) r^{-1/3} cos(2a/3)
  // with r = 1/4, a = pi/4, giving 4^{1/3} / sqrt(3).
  Vec2 z0 = Lshape::point_at_s(0.25);
  CHECK(lshape_exact(z0) == doctest::Approx(std::pow(4.0, 1.0 / 3.0) / std::sqrt(3.0))
                                .epsilon(1e-12));

  // On both reentrant edges u = -(2/3) r^{-1/3}.
  for (int k = 1; k <= 6; ++k) {
    double d = 0.1 * std::pow(2.0, -k);
    for (double s : {1.0 - d, 1.0 + d}) {
      Vec2 x = Lshape::point_at_s(s);
      double expect = -(2.0 / 3.0) * std::pow(d, -1.0 / 3.0);
      CHECK(lshape_exact(x) == doctest::Approx(expect).epsilon(1e-10));
    }
  }

  // Symmetry across the corner bisector.
  for (double s : {0.1, 0.3, 0.65, 0.9}) {
    CHECK(lshape_exact(Lshape::point_at_s(s)) ==
          doctest::Approx(lshape_exact(Lshape::point_at_s(2.0 - s))).epsilon(1e-12));
  }

  // The flux of a harmonic function over the closed boundary vanishes. The
  // flux is only defined interior to the edges, so each segment is inset by
  // delta. At the reentrant corner the omitted mass follows the power law
  // u = -(2/3) d^{-1/3} verified above and is restored in closed form; at the
  // convex corners the flux stays bounded, so the omitted mass is restored by
  // the one-sided endpoint values with O(delta^2) error.
  auto flux = [](double s) { return lshape_exact(Lshape::point_at_s(s)); };
  const double delta = 1e-6;
  double total = -2.0 * std::pow(delta, 2.0 / 3.0);
  for (double sc : {0.0, 0.5, 0.75, 1.25, 1.5})
    total += delta * (flux(sc + delta) + flux(sc == 0.0 ? 2.0 - delta : sc - delta));
  double scale = std::abs(total);
  const double breaks[] = {0.0, 0.5, 0.75, 1.0, 1.25, 1.5, 2.0};
  for (int seg = 0; seg < 6; ++seg) {
    double piece = adaptive_gauss(flux, breaks[seg] + delta, breaks[seg + 1] - delta, 1e-11);
    total += piece;
    scale += std::abs(piece);
  }
  CHECK(std::abs(total) <= 1e-8 * std::max(scale, 1.0));

  // Corner points are rejected.
  CHECK_THROWS_AS(lshape_exact(Vec2{0.0, 0.0}), std::invalid_argument);
}

TEST_CASE("goal reference integrates weight times flux") {
  BemGoalWeight hat;
  double ref = Lshape::goal_reference(hat);
  // Independent check: composite Gauss on 64 equal slices of the support.
  const GaussLegendre& g = GaussLegendre::get(12);
  double sum = 0.0;
  for (int k = 0; k < 64; ++k) {
    double a = 0.5 * k / 64.0, b = 0.5 * (k + 1) / 64.0;
    for (std::size_t q = 0; q < g.nodes.size(); ++q) {
      double s = 0.5 * (a + b) + 0.5 * (b - a) * g.nodes[q];
      sum += 0.5 * (b - a) * g.weights[q] * hat.value(s) * lshape_exact(Lshape::point_at_s(s));
    }
  }
  CHECK(ref == doctest::Approx(sum).epsilon(1e-9));

  BemGoalWeight chi;
  chi.kind = BemGoalWeight::Kind::Characteristic;
  double refc = Lshape::goal_reference(chi);
  double sumc = 0.0;
  for (int k = 0; k < 64; ++k) {
    double a = 0.5 * k / 64.0, b = 0.5 * (k + 1) / 64.0;
    for (std::size_t q = 0; q < g.nodes.size(); ++q) {
      double s = 0.5 * (a + b) + 0.5 * (b - a) * g.nodes[q];
      sumc += 0.5 * (b - a) * g.weights[q] * lshape_exact(Lshape::point_at_s(s));
    }
  }
  CHECK(refc == doctest::Approx(sumc).epsilon(1e-9));
}
