#include <doctest.h>

#include <cmath>

#include "symmin/compacton.hpp"

using namespace symmin;

namespace {
const CompactonSpec& reference() {
  static CompactonSpec spec = make_compacton_f(0.5, 1.5, 2.5, 11.5);
  return spec;
}
}  // namespace

TEST_CASE("construction satisfies all three structural conditions") {
  CompactonReport rep = verify_compacton_conditions(reference());
  CHECK(rep.C1);
  CHECK(rep.C2);
  CHECK(rep.C3);
  CHECK(rep.integrable);
  CHECK_FALSE(rep.marginal_alpha);
  CHECK(rep.zeta > 1.0);
  CHECK(rep.zeta < reference().s2);
  CHECK(rep.F_zeta < 0.0);
}

TEST_CASE("f is continuous with matched derivatives at the joins") {
  const CompactonSpec& s = reference();
  const double eps = 1e-7;
  for (double knot : {1.0, s.s1, s.s2}) {
    CHECK(s.f(knot - eps) == doctest::Approx(s.f(knot + eps)).epsilon(1e-5));
    double dl = (s.f(knot) - s.f(knot - eps)) / eps;
    double dr = (s.f(knot + eps) - s.f(knot)) / eps;
    CHECK(dl == doctest::Approx(dr).epsilon(1e-4).scale(1.0));
  }
  CHECK(s.f(1.0) == doctest::Approx(1.0));
  CHECK(s.f(s.s1) == doctest::Approx(-s.delta));
  CHECK(s.f(s.s2) == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("F is the exact antiderivative of f") {
  const CompactonSpec& s = reference();
  // F' == f by high-order numerical differentiation at interior points
  for (double x : {0.3, 0.9, 1.2, 1.7, 2.2, 2.45}) {
    const double h = 1e-6;
    double fd = (s.F(x + h) - s.F(x - h)) / (2.0 * h);
    // the bump piece has quartic terms with O(40) coefficients: the central
    // difference carries ~3e-7 of truncation + cancellation error there
    CHECK(fd == doctest::Approx(s.f(x)).epsilon(2e-6).scale(1.0));
  }
  CHECK(s.F(0.0) == 0.0);
  CHECK(s.F(-3.0) == 0.0);
  CHECK(s.F(s.s2) == doctest::Approx(0.0).epsilon(1e-11).scale(1.0));
  CHECK(s.F(s.s2 + 5.0) == 0.0);
}

TEST_CASE("total integral of f vanishes (compact-support requirement)") {
  const CompactonSpec& s = reference();
  // Simpson on a fine grid over [0, s2]
  const int n = 20000;
  double h = s.s2 / n, acc = s.f(0.0) + s.f(s.s2);
  for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * s.f(i * h);
  CHECK(acc * h / 3.0 == doctest::Approx(0.0).epsilon(1e-6).scale(1.0));
}

TEST_CASE("too-shallow wells are rejected with a depth estimate") {
  try {
    make_compacton_f(0.5, 1.5, 2.5, 0.05);
    FAIL("expected Infeasible");
  } catch (const Infeasible& e) {
    std::string msg = e.what();
    CHECK(msg.find("depth") != std::string::npos);
  }
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(make_compacton_f(0.0, 1.5, 2.5, 2.0), PreconditionError);
  CHECK_THROWS_AS(make_compacton_f(1.0, 1.5, 2.5, 2.0), PreconditionError);
  CHECK_THROWS_AS(make_compacton_f(0.5, 0.9, 2.5, 2.0), PreconditionError);
  CHECK_THROWS_AS(make_compacton_f(0.5, 2.5, 1.5, 2.0), PreconditionError);
  CHECK_THROWS_AS(make_compacton_f(0.5, 1.5, 2.5, -1.0), PreconditionError);
}

TEST_CASE("marginal alpha is reported") {
  CompactonSpec s = make_compacton_f(0.96, 1.5, 2.5, 2.0);
  CompactonReport rep = verify_compacton_conditions(s);
  CHECK(rep.marginal_alpha);
  CHECK(rep.integral_closed_form > 10.0);
}

TEST_CASE("density expression matches the closed-form F pointwise") {
  const CompactonSpec& s = reference();
  ExprPtr e = s.density_F_of_u1();
  for (double x = -1.0; x <= 3.2; x += 0.013) {
    CHECK(eval_density(e, 0.0, {x}, 0.0) ==
          doctest::Approx(s.F(x)).epsilon(1e-12).scale(1.0));
  }
  ExprPtr em = s.density_F_of_minus_u1();
  for (double x = -3.2; x <= 1.0; x += 0.013) {
    CHECK(eval_density(em, 0.0, {x}, 0.0) ==
          doctest::Approx(s.F(-x)).epsilon(1e-12).scale(1.0));
  }
}
