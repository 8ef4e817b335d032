#include <doctest.h>

#include <cmath>

#include "symmin/splitting.hpp"

using namespace symmin;

namespace {

Field off_center_bump(const Grid& g, double cx, double cy, double width = 0.35) {
  Field u(g, 1);
  Vec x(2);
  for (std::size_t p = 0; p < g.num_nodes(); ++p) {
    g.coords(p, x);
    double r2 = (x[0] - cx) * (x[0] - cx) + (x[1] - cy) * (x[1] - cy);
    u.at(p, 0) = std::exp(-r2 / (2.0 * width * width));
  }
  u.apply_mask();
  return u;
}

VariationalProblem mass_problem(Grid g, bool trans_inv) {
  DensitySet d;
  d.F = parse_density("g*g", 1);
  d.G = {parse_density("u1*u1", 1)};
  d.lambda = {1.0};
  return VariationalProblem(std::move(g), std::move(d), 1, trans_inv);
}

}  // namespace

TEST_CASE("scalar zero finding on a synthetic odd map") {
  Vec a = normalized({0.3, -1.1, 0.7});
  std::vector<Vec> evaluated;
  OddMap map;
  map.ambient_dim = 3;
  map.k = 1;
  map.eval = [&](const Vec& v) {
    evaluated.push_back(v);
    return Vec{dot(a, v)};
  };
  ZeroFindOptions opts;
  opts.tol = 1e-10;
  ZeroResult r = find_odd_zero_k1(map, {}, opts);
  CHECK(r.converged);
  CHECK(std::fabs(dot(a, r.v)) <= 1e-10);
  CHECK(std::fabs(norm2(r.v) - 1.0) < 1e-12);
  CHECK(r.evaluations == (long)evaluated.size());

  // oddness is exploited analytically: no antipodal pair is ever evaluated
  for (std::size_t i = 0; i < evaluated.size(); ++i)
    for (std::size_t j = i + 1; j < evaluated.size(); ++j) {
      Vec s = evaluated[i] + evaluated[j];
      CHECK(norm2(s) > 1e-6);
    }
}

TEST_CASE("scalar zero finding respects constraint directions") {
  Vec a = normalized({1.0, 0.5, -0.25});
  OddMap map;
  map.ambient_dim = 3;
  map.k = 1;
  map.eval = [&](const Vec& v) { return Vec{dot(a, v)}; };
  Vec fixed = normalized({0.0, 0.0, 1.0});
  ZeroFindOptions opts;
  opts.tol = 1e-10;
  ZeroResult r = find_odd_zero_k1(map, {fixed}, opts);
  CHECK(r.converged);
  CHECK(std::fabs(dot(a, r.v)) <= 1e-10);
  CHECK(std::fabs(dot(fixed, r.v)) < 1e-12);  // stays in the subsphere
}

TEST_CASE("admissibility bound on the sphere dimension") {
  OddMap map;
  map.ambient_dim = 3;
  map.k = 1;
  map.eval = [](const Vec& v) { return Vec{v[0]}; };
  std::vector<Vec> too_many = {normalized({1.0, 0.0, 0.0}),
                               normalized({0.0, 1.0, 0.0}),
                               normalized({0.0, 0.0, 1.0})};
  CHECK_THROWS_AS(find_odd_zero_k1(map, too_many, ZeroFindOptions{}), Inadmissible);
}

TEST_CASE("simultaneous zeros of a two-component odd map on S^3") {
  Vec a = normalized({0.9, -0.1, 0.4, 0.2});
  Vec b = normalized({-0.2, 0.8, 0.1, -0.5});
  OddMap map;
  map.ambient_dim = 4;
  map.k = 2;
  map.eval = [&](const Vec& v) { return Vec{dot(a, v), dot(b, v)}; };
  ZeroFindOptions opts;
  opts.tol = 1e-9;
  ZeroResult r = find_odd_zero_general(map, {}, opts);
  CHECK(r.converged);
  CHECK(std::fabs(dot(a, r.v)) < 1e-8);
  CHECK(std::fabs(dot(b, r.v)) < 1e-8);
}

TEST_CASE("nonconverged searches return the best candidate") {
  // a map with no zero on the admissible sphere (not odd, abusive on purpose:
  // the finder only sees values, so it reports its best point honestly)
  OddMap map;
  map.ambient_dim = 3;
  map.k = 2;
  map.eval = [](const Vec& v) { return Vec{v[0] * v[0] + 1.0, v[1]}; };
  ZeroFindOptions opts;
  opts.tol = 1e-9;
  opts.scan_points = 100;
  opts.max_newton = 5;
  ZeroResult r = find_odd_zero_general(map, {}, opts);
  CHECK_FALSE(r.converged);
  CHECK(r.norm >= 1.0);
  CHECK(r.v.size() == 3);
}

TEST_CASE("splitting plane through the origin for an off-center bump") {
  Grid g(Domain::box(2, 2.0), {41, 41});
  VariationalProblem P = mass_problem(g, false);
  Field u = off_center_bump(g, 0.5, 0.3);
  ZeroResult r = find_zero_k1(P, u);
  CHECK(r.converged);
  SplitValue sv = half_space_split(P, u, Hyperplane(r.v, 0.0));
  CHECK(sv.plus[0] == doctest::Approx(sv.minus[0]).epsilon(1e-6));
  // the splitting normal is orthogonal to the bump center direction
  Vec c = normalized({0.5, 0.3});
  CHECK(std::fabs(dot(r.v, c)) < 0.05);
}

TEST_CASE("find_zero_k1 requires exactly one constraint") {
  Grid g(Domain::box(2, 2.0), {21, 21});
  DensitySet d;
  d.F = parse_density("g*g", 1);
  d.G = {parse_density("u1", 1), parse_density("u1*u1", 1)};
  d.lambda = {1.0, 1.0};
  VariationalProblem P(g, d, 1, false);
  Field u = off_center_bump(g, 0.0, 0.0);
  CHECK_THROWS_AS(find_zero_k1(P, u), Inadmissible);
}

TEST_CASE("affine plane search recovers the bump center") {
  Grid g(Domain::box(2, 2.0), {41, 41});
  VariationalProblem P = mass_problem(g, true);
  Field u = off_center_bump(g, 0.45, -0.25);
  ZeroResult r = find_affine_zero(P, u);
  CHECK(r.converged);
  // a radial bump is split evenly exactly by planes through its center
  double dist = std::fabs(r.v[0] * 0.45 + r.v[1] * (-0.25) - r.t);
  CHECK(dist < 0.02);
  Vec phi = affine_split_defect(P, u, r.v, r.t);
  CHECK(std::fabs(phi[0]) <= split_tolerance(P, u) * 1.01);
}

TEST_CASE("affine search demands translation invariance and a nonzero target") {
  Grid g(Domain::box(2, 2.0), {21, 21});
  Field u = off_center_bump(g, 0.0, 0.0);
  VariationalProblem fixed = mass_problem(g, false);
  CHECK_THROWS_AS(find_affine_zero(fixed, u), NotTranslationInvariant);

  DensitySet d;
  d.F = parse_density("g*g", 1);
  d.G = {parse_density("u1*u1*u1", 1)};
  d.lambda = {0.0};
  VariationalProblem zero_target(g, d, 1, true);
  CHECK_THROWS_AS(find_affine_zero(zero_target, u), AllLambdaZero);
}

TEST_CASE("orthogonal splitting basis for a radial field") {
  Grid g(Domain::box(2, 2.0), {41, 41});
  VariationalProblem P = mass_problem(g, false);
  Field u = off_center_bump(g, 0.0, 0.0);  // radial about the origin
  std::vector<ZeroResult> basis = orthogonal_split_basis(P, u, 1);
  REQUIRE(basis.size() == 1);
  CHECK(basis[0].converged);

  CHECK_THROWS_AS(orthogonal_split_basis(P, u, 2), PreconditionError);
}

TEST_CASE("orthogonal splitting basis in three dimensions") {
  Grid g(Domain::box(3, 1.5), {25, 25, 25});
  DensitySet d;
  d.F = parse_density("g*g", 1);
  d.G = {parse_density("u1*u1", 1)};
  d.lambda = {1.0};
  VariationalProblem P(g, d, 1, false);
  Field u(g, 1);
  Vec x(3);
  for (std::size_t p = 0; p < g.num_nodes(); ++p) {
    g.coords(p, x);
    double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    u.at(p, 0) = std::exp(-3.0 * r2) * (1.0 + 0.2 * x[0]);
  }
  u.apply_mask();
  std::vector<ZeroResult> basis = orthogonal_split_basis(P, u, 2);
  REQUIRE(basis.size() == 2);
  CHECK(basis[0].converged);
  CHECK(basis[1].converged);
  CHECK(std::fabs(dot(basis[0].v, basis[1].v)) < 1e-10);
}
