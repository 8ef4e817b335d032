#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "symmin/density.hpp"
#include "symmin/errors.hpp"
#include "symmin/linalg.hpp"

namespace symmin {

namespace detail {

using Poly = std::vector<double>;  // coefficients, ascending

inline Poly poly_mul(const Poly& a, const Poly& b) {
  Poly r(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  return r;
}

inline Poly poly_add(Poly a, const Poly& b) {
  if (b.size() > a.size()) a.resize(b.size(), 0.0);
  for (std::size_t i = 0; i < b.size(); ++i) a[i] += b[i];
  return a;
}

inline Poly poly_scale(Poly a, double s) {
  for (double& c : a) c *= s;
  return a;
}

inline Poly poly_antiderivative(const Poly& a) {
  Poly r(a.size() + 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) r[i + 1] = a[i] / (double)(i + 1);
  return r;
}

inline double poly_integral(const Poly& a, double lo, double hi) {
  Poly A = poly_antiderivative(a);
  return eval_poly(A, hi) - eval_poly(A, lo);
}

/// Cubic through (a, va) with slope da and (b, vb) with slope db, in the
/// monomial basis.
inline Poly hermite_cubic(double a, double va, double da, double b, double vb,
                          double db) {
  std::vector<Vec> M = {
      {1.0, a, a * a, a * a * a},
      {0.0, 1.0, 2.0 * a, 3.0 * a * a},
      {1.0, b, b * b, b * b * b},
      {0.0, 1.0, 2.0 * b, 3.0 * b * b},
  };
  Vec rhs = {va, da, vb, db};
  Vec c = solve_dense(M, rhs);
  return Poly(c.begin(), c.end());
}

}  // namespace detail

/// The constructed non-Lipschitz nonlinearity of the compact-support ground
/// state problem: f(s) = 0 for s <= 0, s^alpha on (0,1], a C^1 polynomial
/// continuation descending to -delta on [1,s1] and returning to 0 on [s1,s2]
/// with a solved bump coefficient so that the antiderivative F vanishes for
/// s >= s2.
struct CompactonSpec {
  double alpha = 0.5;
  double s1 = 1.5;
  double s2 = 2.5;
  double delta = 1.0;
  double bump_coeff = 0.0;     // solved
  detail::Poly f_mid;          // f on [1, s1]
  detail::Poly f_tail;         // f on [s1, s2] (includes the bump)
  detail::Poly F_mid;          // F(s) - F(1) on [1, s1]
  detail::Poly F_tail;         // F(s) - F(1) on [s1, s2]
  double zeta = 0.0;           // argmin of F on [0, s2]
  double F_zeta = 0.0;

  double f(double s) const {
    if (s <= 0.0) return 0.0;
    if (s <= 1.0) return std::pow(s, alpha);
    if (s <= s1) return detail::eval_poly(f_mid, s);
    if (s <= s2) return detail::eval_poly(f_tail, s);
    return 0.0;
  }

  double F(double s) const {
    if (s <= 0.0) return 0.0;
    if (s <= 1.0) return std::pow(s, alpha + 1.0) / (alpha + 1.0);
    double F1 = 1.0 / (alpha + 1.0);
    if (s <= s1) return F1 + detail::eval_poly(F_mid, s);
    if (s <= s2) return F1 + detail::eval_poly(F_tail, s);
    return 0.0;
  }

  /// Density expression for F(arg); arg is typically u1 (or -u1 for the
  /// mirrored constraint).
  ExprPtr density_F(const ExprPtr& arg) const {
    using E = Expr;
    double F1 = 1.0 / (alpha + 1.0);
    ExprPtr clamped =
        E::node(ExprKind::min_op, {arg, E::constant(1.0)});
    ExprPtr head = E::node(
        ExprKind::mul,
        {E::node(ExprKind::pow_op, {E::node(ExprKind::pos, {clamped})}, alpha + 1.0),
         E::constant(F1)});
    auto pw = std::make_shared<E>();
    pw->kind = ExprKind::piecewise;
    pw->kids.push_back(arg);
    pw->breakpoints = {1.0, s1, s2};
    pw->pieces = {{0.0}, F_mid, F_tail, {-F1}};
    return E::node(ExprKind::add, {head, ExprPtr(pw)});
  }

  ExprPtr density_F_of_u1() const { return density_F(Expr::var(ExprKind::var_u, 1)); }
  ExprPtr density_F_of_minus_u1() const {
    return density_F(Expr::node(ExprKind::negate, {Expr::var(ExprKind::var_u, 1)}));
  }
};

struct CompactonReport {
  bool C1 = false;   // f(s) = s^alpha on (0,1]
  bool C2 = false;   // F == 0 beyond s2
  bool C3 = false;   // min F < 0
  double zeta = 0.0;
  double F_zeta = 0.0;
  bool integrable = false;          // int_0^1 F^{-1/2} finite
  double integral_closed_form = 0.0;
  bool marginal_alpha = false;      // alpha >= 0.95: 2/(1-alpha) blowup
};

inline CompactonSpec make_compacton_f(double alpha, double s1, double s2,
                                      double delta) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw PreconditionError("need 0 < alpha < 1");
  if (!(1.0 < s1 && s1 < s2)) throw PreconditionError("need 1 < s1 < s2");
  if (!(delta > 0.0)) throw PreconditionError("need delta > 0");

  using detail::Poly;
  CompactonSpec spec;
  spec.alpha = alpha;
  spec.s1 = s1;
  spec.s2 = s2;
  spec.delta = delta;

  // C^1 joins: f(1) = 1, f'(1) = alpha; f(s1) = -delta, f'(s1) = 0.
  spec.f_mid = detail::hermite_cubic(1.0, 1.0, alpha, s1, -delta, 0.0);
  Poly tail_base = detail::hermite_cubic(s1, -delta, 0.0, s2, 0.0, 0.0);
  // Bump vanishing to first order at both ends; its coefficient is the free
  // degree of freedom fixed by the zero-total-integral requirement (C2).
  Poly bump = detail::poly_mul(detail::poly_mul(Poly{-s1, 1.0}, Poly{-s1, 1.0}),
                               detail::poly_mul(Poly{s2, -1.0}, Poly{s2, -1.0}));

  const double head_area = 1.0 / (alpha + 1.0);  // int_0^1 s^alpha
  auto total_integral = [&](double c) {
    return head_area + detail::poly_integral(spec.f_mid, 1.0, s1) +
           detail::poly_integral(detail::poly_add(tail_base, detail::poly_scale(bump, c)),
                                 s1, s2);
  };
  // total_integral is affine in c; secant iteration lands on the root at once
  // and the loop guards against rounding.
  double c0 = 0.0, c1 = 1.0;
  double t0 = total_integral(c0), t1 = total_integral(c1);
  double c = c0;
  for (int it = 0; it < 50; ++it) {
    if (t1 == t0) throw Infeasible("degenerate bump in compacton construction");
    c = c1 - t1 * (c1 - c0) / (t1 - t0);
    double tc = total_integral(c);
    if (std::fabs(tc) <= 1e-12) break;
    c0 = c1; t0 = t1;
    c1 = c;  t1 = tc;
  }
  if (std::fabs(total_integral(c)) > 1e-12)
    throw Infeasible("could not balance the compacton integral");
  spec.bump_coeff = c;
  spec.f_tail = detail::poly_add(tail_base, detail::poly_scale(bump, c));

  // Exact piecewise antiderivative relative to F(1).
  Poly Fm = detail::poly_antiderivative(spec.f_mid);
  Fm[0] -= detail::eval_poly(Fm, 1.0);
  spec.F_mid = Fm;
  Poly Ft = detail::poly_antiderivative(spec.f_tail);
  Ft[0] += detail::eval_poly(Fm, s1) - detail::eval_poly(Ft, s1);
  spec.F_tail = Ft;

  // C3 witness: scan + local refinement of the minimum of F on [0, s2].
  double best_s = 0.0, best_F = 0.0;
  const int scan = 4000;
  for (int i = 0; i <= scan; ++i) {
    double s = s2 * i / scan;
    double v = spec.F(s);
    if (v < best_F) {
      best_F = v;
      best_s = s;
    }
  }
  {  // golden-section polish around the scan minimum
    double lo = std::max(0.0, best_s - s2 / scan), hi = std::min(s2, best_s + s2 / scan);
    for (int it = 0; it < 80; ++it) {
      double m1 = lo + 0.381966 * (hi - lo), m2 = hi - 0.381966 * (hi - lo);
      if (spec.F(m1) < spec.F(m2)) hi = m2; else lo = m1;
    }
    best_s = 0.5 * (lo + hi);
    best_F = spec.F(best_s);
  }
  spec.zeta = best_s;
  spec.F_zeta = best_F;

  if (best_F >= -1e-9) {
    // Estimate the depth at which the well area just cancels the head area
    // (necessary for F to dip below zero): solve total_integral == 0 with the
    // bump removed, using the affine dependence on delta.
    auto area_no_bump = [&](double d) {
      Poly mid = detail::hermite_cubic(1.0, 1.0, alpha, s1, -d, 0.0);
      Poly tl = detail::hermite_cubic(s1, -d, 0.0, s2, 0.0, 0.0);
      return head_area + detail::poly_integral(mid, 1.0, s1) +
             detail::poly_integral(tl, s1, s2);
    };
    double a0 = area_no_bump(0.0), a1 = area_no_bump(1.0);
    double dmin = (a1 != a0) ? -a0 / (a1 - a0) : 0.0;
    throw Infeasible("delta too small for F to attain negative values; required "
                     "minimum depth is approximately " + std::to_string(dmin));
  }
  return spec;
}

inline CompactonReport verify_compacton_conditions(const CompactonSpec& spec) {
  CompactonReport rep;
  // C1: exact agreement with s^alpha on (0,1].
  rep.C1 = true;
  for (int i = 1; i <= 200; ++i) {
    double s = (double)i / 200;
    if (std::fabs(spec.f(s) - std::pow(s, spec.alpha)) > 1e-14) rep.C1 = false;
  }
  // C2: F vanishes identically beyond s2.
  rep.C2 = true;
  for (int i = 0; i < 100; ++i) {
    double s = spec.s2 + 0.05 * i;
    if (std::fabs(spec.F(s)) > 1e-10) rep.C2 = false;
  }
  // F is continuous at s2 iff the integral balance holds; fold that in.
  double F_left = 1.0 / (spec.alpha + 1.0) + detail::eval_poly(spec.F_tail, spec.s2);
  if (std::fabs(F_left) > 1e-10) rep.C2 = false;
  // C3: negative well with witness.
  rep.zeta = spec.zeta;
  rep.F_zeta = spec.F_zeta;
  rep.C3 = spec.F_zeta < -1e-6;
  // Integrability of int_0^1 F(s)^{-1/2} ds, closed form on the s^alpha head.
  rep.integral_closed_form =
      std::sqrt(spec.alpha + 1.0) * 2.0 / (1.0 - spec.alpha);
  rep.integrable = std::isfinite(rep.integral_closed_form);
  rep.marginal_alpha = spec.alpha >= 0.95;
  return rep;
}

}  // namespace symmin
