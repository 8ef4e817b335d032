#include <doctest.h>

#include <cmath>
#include <numbers>

#include "symmin/field.hpp"
#include "symmin/geometry.hpp"

using namespace symmin;

TEST_CASE("grid nodes are origin-symmetric and trapezoid weights sum to volume") {
  Grid g(Domain::box(2, 1.5), {7, 9});
  CHECK(g.dim() == 2);
  CHECK(g.coord(0, 0) == doctest::Approx(-1.5));
  CHECK(g.coord(0, 6) == doctest::Approx(1.5));
  CHECK(g.coord(0, 3) == doctest::Approx(0.0));

  double total = 0.0;
  for (std::size_t p = 0; p < g.num_nodes(); ++p) total += g.quad_weight(p);
  CHECK(total == doctest::Approx(3.0 * 3.0));
}

TEST_CASE("quadrature converges at second order on a smooth integrand") {
  auto integrate_cos = [](int n) {
    Grid g(Domain::box(2, 1.0), {n, n});
    Vec x(2);
    double s = 0.0;
    for (std::size_t p = 0; p < g.num_nodes(); ++p) {
      g.coords(p, x);
      s += g.quad_weight(p) * std::cos(x[0]) * std::cos(x[1]);
    }
    return s;
  };
  const double exact = 4.0 * std::sin(1.0) * std::sin(1.0);
  double e1 = std::fabs(integrate_cos(11) - exact);
  double e2 = std::fabs(integrate_cos(21) - exact);
  double e3 = std::fabs(integrate_cos(41) - exact);
  double rate12 = std::log2(e1 / e2);
  double rate23 = std::log2(e2 / e3);
  CHECK(rate12 > 1.9);
  CHECK(rate23 > 1.9);
}

TEST_CASE("ball mask zeroes weights outside the ball and approximates its area") {
  Grid g(Domain::ball(2, 1.0), {201, 201});
  Vec x(2);
  double area = 0.0;
  for (std::size_t p = 0; p < g.num_nodes(); ++p) {
    double w = g.quad_weight(p);
    g.coords(p, x);
    if (norm2(x) > 1.0 + 1e-12) CHECK(w == 0.0);
    area += w;
  }
  CHECK(area == doctest::Approx(std::numbers::pi).epsilon(0.02));
}

TEST_CASE("hyperplane reflection is an isometric involution") {
  Hyperplane H(normalized({1.0, 2.0, -0.5}), 0.3);
  Vec x = {0.2, -0.7, 1.1};
  Vec y = reflect_point(x, H);
  Vec z = reflect_point(y, H);
  for (int a = 0; a < 3; ++a) CHECK(z[a] == doctest::Approx(x[a]).epsilon(1e-14));
  CHECK(H.signed_distance(y) == doctest::Approx(-H.signed_distance(x)));

  Hyperplane Hf = H.flipped();
  Vec yf = reflect_point(x, Hf);
  for (int a = 0; a < 3; ++a) CHECK(yf[a] == doctest::Approx(y[a]));
}

TEST_CASE("hyperplane requires a unit normal") {
  CHECK_THROWS_AS(Hyperplane({1.0, 1.0}, 0.0), PreconditionError);
  CHECK_NOTHROW(Hyperplane(normalized({1.0, 1.0}), 0.0));
}

TEST_CASE("affine subspace projection and reflection") {
  // line x = (t, t, 0)/sqrt(2) shifted by (0, 0, 1)
  AffineSubspace V({0.0, 0.0, 1.0}, {normalized({1.0, 1.0, 0.0})});
  Vec x = {1.0, 0.0, 0.0};
  Vec p = project_point(x, V);
  CHECK(p[0] == doctest::Approx(0.5));
  CHECK(p[1] == doctest::Approx(0.5));
  CHECK(p[2] == doctest::Approx(1.0));
  Vec r = reflect_point(x, V);
  // reflection keeps the projection, negates the offset
  CHECK(r[0] == doctest::Approx(0.0));
  CHECK(r[1] == doctest::Approx(1.0));
  CHECK(r[2] == doctest::Approx(2.0));
  Vec rr = reflect_point(r, V);
  for (int a = 0; a < 3; ++a) CHECK(rr[a] == doctest::Approx(x[a]).epsilon(1e-14));
}

TEST_CASE("orbit samples preserve distance to the subspace") {
  AffineSubspace V = AffineSubspace::point({0.5, 0.0, 0.0});
  Vec x = {1.0, 0.7, -0.2};
  double d0 = norm2(x - V.base);
  for (const Vec& y : orbit_samples(x, V, 16)) {
    CHECK(norm2(y - V.base) == doctest::Approx(d0).epsilon(1e-12));
  }
}

TEST_CASE("multilinear sampling reproduces nodal values and is zero outside") {
  Grid g(Domain::box(2, 1.0), {9, 9});
  Field u(g, 1);
  Vec x(2);
  for (std::size_t p = 0; p < g.num_nodes(); ++p) {
    g.coords(p, x);
    u.at(p, 0) = x[0] + 2.0 * x[1];
  }
  for (std::size_t p = 0; p < g.num_nodes(); ++p) {
    g.coords(p, x);
    CHECK(u.sample(x, 0) == doctest::Approx(x[0] + 2.0 * x[1]).epsilon(1e-13));
  }
  // linear functions are reproduced exactly between nodes too
  CHECK(u.sample({0.13, -0.41}, 0) == doctest::Approx(0.13 - 0.82).epsilon(1e-13));
  CHECK(u.sample({5.0, 0.0}, 0) == 0.0);
  CHECK(u.sample({0.0, -5.0}, 0) == 0.0);
}

TEST_CASE("node-aligned reflection permutes values exactly") {
  Grid g(Domain::box(2, 1.0), {9, 9});
  Field u(g, 1);
  Vec x(2);
  for (std::size_t p = 0; p < g.num_nodes(); ++p) {
    g.coords(p, x);
    u.at(p, 0) = std::sin(3.0 * x[0]) + x[1];
  }
  Hyperplane H({1.0, 0.0}, 0.0);
  Field up = reflect_field(u, H, ReflectSide::plus);
  // values on the kept side are untouched bit-for-bit
  std::vector<int> idx(2);
  for (std::size_t p = 0; p < g.num_nodes(); ++p) {
    g.node_multi_index(p, idx);
    g.coords(p, x);
    if (x[0] >= 0.0) CHECK(up.at(p, 0) == u.at(p, 0));
    // mirror node
    std::vector<int> mid = idx;
    mid[0] = g.npts[0] - 1 - idx[0];
    CHECK(up.at(p, 0) == up.at(g.node_index(mid), 0));
  }
  // reflecting again is idempotent
  Field up2 = reflect_field(up, H, ReflectSide::plus);
  CHECK(up2.values == up.values);
}

TEST_CASE("reflection across an off-node plane uses interpolation consistently") {
  Grid g(Domain::box(1, 1.0), {41});
  Field u(g, 1);
  Vec x(1);
  for (std::size_t p = 0; p < g.num_nodes(); ++p) {
    g.coords(p, x);
    u.at(p, 0) = std::exp(-4.0 * x[0] * x[0]) * (1.0 + 0.3 * x[0]);
  }
  Hyperplane H({1.0}, 0.0131);
  Field um = reflect_field(u, H, ReflectSide::minus, 1e-2);
  // mirrored values agree with sampling the source at the reflected point
  for (std::size_t p = 0; p < g.num_nodes(); ++p) {
    g.coords(p, x);
    if (H.signed_distance(x) > 0.0) {
      Vec y = reflect_point(x, H);
      CHECK(um.at(p, 0) == doctest::Approx(u.sample(y, 0)).epsilon(1e-12));
    }
  }
}

TEST_CASE("rotation-invariant domains reject planes missing the origin") {
  Grid g(Domain::ball(2, 1.0), {21, 21});
  Field u(g, 1);
  CHECK_THROWS_AS(reflect_field(u, Hyperplane({1.0, 0.0}, 0.25), ReflectSide::plus),
                  OriginRequired);
  CHECK_NOTHROW(reflect_field(u, Hyperplane({1.0, 0.0}, 0.0), ReflectSide::plus));
}

TEST_CASE("reflection reports clipped support on a box") {
  Grid g(Domain::box(1, 1.0), {41});
  Field u(g, 1);
  Vec x(1);
  for (std::size_t p = 0; p < g.num_nodes(); ++p) {
    g.coords(p, x);
    u.at(p, 0) = 1.0;  // mass everywhere: the shifted mirror must clip
  }
  CHECK_THROWS_AS(reflect_field(u, Hyperplane({1.0}, 0.5), ReflectSide::minus),
                  SupportClipped);
}
