#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "symmin/compacton.hpp"
#include "symmin/field.hpp"
#include "symmin/functional.hpp"
#include "symmin/ode.hpp"

namespace symmin {

// ---------------------------------------------------------------------------
// Problem builders

/// Dirichlet energy with one volume constraint int F(u) = -1 on an N-d box:
/// the compact-support ground-state problem. Translation-invariant, so the
/// affine (free-plane) machinery applies.
inline VariationalProblem make_m1(const CompactonSpec& spec, Grid grid) {
  if (grid.dim() < 3)
    throw PreconditionError("the ground-state problem needs N >= 3");
  DensitySet d;
  d.F = Expr::node(ExprKind::mul,
                   {Expr::var(ExprKind::var_g), Expr::var(ExprKind::var_g)});
  d.G = {spec.density_F_of_u1()};
  d.lambda = {-1.0};
  return VariationalProblem(std::move(grid), std::move(d), 1, true);
}

/// Two-constraint variant: additionally int F(-u) = -1, forcing sign-changing
/// minimizers (two bumps of opposite sign).
inline VariationalProblem make_m2(const CompactonSpec& spec, Grid grid) {
  if (grid.dim() < 3)
    throw PreconditionError("the two-bump problem needs N >= 3");
  DensitySet d;
  d.F = Expr::node(ExprKind::mul,
                   {Expr::var(ExprKind::var_g), Expr::var(ExprKind::var_g)});
  d.G = {spec.density_F_of_u1(), spec.density_F_of_minus_u1()};
  d.lambda = {-1.0, -1.0};
  return VariationalProblem(std::move(grid), std::move(d), 1, true);
}

namespace detail {

inline ExprPtr substitute_u(const ExprPtr& e, int from, int to) {
  auto out = std::make_shared<Expr>(*e);
  if (out->kind == ExprKind::var_u && out->var_index == from) out->var_index = to;
  for (ExprPtr& kid : out->kids) kid = substitute_u(kid, from, to);
  return out;
}

}  // namespace detail

/// Vector-valued decoupled problem: the gradient term g*g is kept once (g is
/// the Frobenius norm of the full Jacobian, so it already sums over
/// components) while every u1-dependent constraint is duplicated per
/// component. Used to realize products of scalar minimizers as vector
/// minimizers with k = m * (scalar k) constraints.
inline VariationalProblem make_decoupled(const DensitySet& scalar, Grid grid,
                                         int components, bool trans_inv) {
  if (components < 1) throw PreconditionError("need at least one component");
  DensitySet d;
  d.F = scalar.F;  // must be a pure function of g
  for (const ExprPtr& e : {scalar.F})
    if (uses_var(e, ExprKind::var_u))
      throw PreconditionError("decoupled energy density must depend on g only");
  for (int c = 1; c <= components; ++c)
    for (std::size_t j = 0; j < scalar.G.size(); ++j) {
      d.G.push_back(detail::substitute_u(scalar.G[j], 1, c));
      d.lambda.push_back(scalar.lambda[j]);
    }
  return VariationalProblem(std::move(grid), std::move(d), components, trans_inv);
}

/// 1-D model with a double-well potential and a mass constraint: minimizers
/// are single bumps, point-symmetric about their peak.
inline VariationalProblem make_1d_well(Grid grid, double mass = 0.5) {
  if (grid.dim() != 1) throw PreconditionError("make_1d_well needs a 1-D grid");
  DensitySet d;
  d.F = parse_density("0.5*g*g + u1*u1*(u1 - 1)*(u1 - 1)", 1);
  d.G = {parse_density("u1", 1)};
  d.lambda = {mass};
  return VariationalProblem(std::move(grid), std::move(d), 1, true);
}

// ---------------------------------------------------------------------------
// Radial shooting oracle

/// Radial solution v(r) of v'' + (N-1)/r v' = f(v), v(0) = v0, v'(0) = 0,
/// computed independently of the grid machinery. Compact support: v == 0 for
/// r >= R_support.
struct RadialProfile {
  int N = 0;
  double v0 = 0.0;
  double R_support = 0.0;
  std::vector<double> r;   // increasing, r.front() == 0
  std::vector<double> v;
  std::vector<double> vp;
  double T = 0.0;          // int |grad v|^2 over R^N
  double V = 0.0;          // int F(v) over R^N
  double residual = 0.0;   // max relative ODE residual at interior samples

  double value(double rr) const {
    if (rr <= 0.0) return v.front();
    if (rr >= R_support) return 0.0;
    auto it = std::upper_bound(r.begin(), r.end(), rr);
    std::size_t i = (std::size_t)(it - r.begin());
    if (i == 0) return v.front();
    if (i >= r.size()) return 0.0;
    double t = (rr - r[i - 1]) / (r[i] - r[i - 1]);
    return (1.0 - t) * v[i - 1] + t * v[i];
  }
};

namespace detail {

struct ShootOutcome {
  int sign = 0;          // +1 overshoot (v < 0), -1 undershoot (v turns up)
  double r_stop = 0.0;
  std::vector<double> r, v, vp;
};

inline ShootOutcome shoot_once(const CompactonSpec& spec, int N, double v0,
                               double r_max, double snap_tol,
                               double h_max = 2e-3) {
  ShootOutcome out;
  auto rhs = [&](double r, const Vec& y, Vec& dy) {
    dy[0] = y[1];
    double fric = (r > 1e-12) ? (N - 1) / r * y[1] : 0.0;
    dy[1] = spec.f(y[0]) - fric;
  };
  // series start to step over the coordinate singularity:
  // v = v0 + f(v0) r^2 / (2N)
  const double r0 = 1e-6;
  Vec y = {v0 + spec.f(v0) * r0 * r0 / (2.0 * N), spec.f(v0) * r0 / N};
  out.r.push_back(0.0);
  out.v.push_back(v0);
  out.vp.push_back(0.0);
  auto observer = [&](double r, const Vec& s) {
    out.r.push_back(r);
    out.v.push_back(s[0]);
    out.vp.push_back(s[1]);
    out.r_stop = r;
    if (s[0] < -1e-9) {
      out.sign = +1;
      return true;
    }
    if (std::fabs(s[0]) + std::fabs(s[1]) <= snap_tol) {
      out.sign = 0;  // landed on the compacton within tolerance
      return true;
    }
    if (r > 10.0 * r0 && s[1] > 1e-12 && s[0] > 0.0 && s[0] < v0) {
      out.sign = -1;
      return true;
    }
    return false;
  };
  OdeOptions opts;
  opts.rtol = 1e-11;
  opts.atol = 1e-13;
  opts.h_max = h_max;
  OdeStatus st = integrate_rk45(rhs, r0, std::move(y), r_max, observer, opts);
  if (!st.stopped_by_observer) out.sign = -1;  // never reached zero: undershoot
  return out;
}

}  // namespace detail

/// Shooting construction of the compact-support ground state. Bisects the
/// initial height v0 inside the F < 0 well between an overshoot and an
/// undershoot; the friction term makes the landing H = 0 only approximately
/// attainable, so the tail is snapped to zero once |v| + |v'| falls below
/// `snap_tol`.
inline RadialProfile shoot_ground_state(const CompactonSpec& spec, int N,
                                        double snap_tol = 1e-10,
                                        double r_max = 50.0) {
  if (N < 3) throw PreconditionError("shooting oracle needs N >= 3");
  if (spec.F_zeta >= 0.0) throw NonNegativePotential("F has no negative well");

  // The phase-space picture: the particle starts at rest on the hill -F and
  // must roll down through s = 0 with exactly zero terminal energy. That is
  // only possible from the left flank of the well, between the sign change
  // s_bar of F (in (1, zeta)) and the well bottom zeta: higher starts carry
  // more energy (overshoot), lower starts stall (undershoot).
  double sbar_lo = 1.0, sbar_hi = spec.zeta;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (sbar_lo + sbar_hi);
    (spec.F(mid) > 0.0 ? sbar_lo : sbar_hi) = mid;
  }
  const double sbar = sbar_hi;

  // Launches near the unstable equilibrium zeta linger there until the
  // friction (N-1)/r has decayed, so overshoots only appear for v0
  // exponentially close to zeta; scan geometrically toward it.
  double lo = 0.0, hi = 0.0;  // lo: undershoot, hi: overshoot
  bool have_lo = false, have_hi = false;
  double exact = -1.0;
  const int scan = 44;
  for (int i = 1; i < scan; ++i) {
    double v0 = spec.zeta - (spec.zeta - sbar) * std::pow(0.5, i);
    if (spec.F(v0) >= 0.0) continue;
    detail::ShootOutcome o = detail::shoot_once(spec, N, v0, r_max, snap_tol);
    if (o.sign == 0) {
      exact = v0;
      break;
    }
    if (o.sign < 0) {
      lo = v0;  // keep the highest undershoot seen
      have_lo = true;
    }
    if (o.sign > 0) {
      hi = v0;
      have_hi = true;
    }
    if (have_lo && have_hi) break;
  }
  double v0_star;
  if (exact >= 0.0) {
    v0_star = exact;
  } else {
    if (!(have_lo && have_hi))
      throw NoGroundState("could not bracket the shooting height");
    for (int it = 0; it < 200; ++it) {
      double mid = 0.5 * (lo + hi);
      detail::ShootOutcome o = detail::shoot_once(spec, N, mid, r_max, snap_tol);
      if (o.sign == 0) {
        lo = hi = mid;
        break;
      }
      if (o.sign < 0) lo = mid; else hi = mid;
      if (hi - lo < 1e-15 * std::max(1.0, hi)) break;
    }
    v0_star = 0.5 * (lo + hi);
  }

  // final pass with a fine step cap so the stored samples support the
  // finite-difference residual check below; deeper wells need smaller steps
  RadialProfile prof;
  for (double h_cap = 1e-4;; h_cap *= 0.5) {
    detail::ShootOutcome o =
        detail::shoot_once(spec, N, v0_star, r_max, snap_tol, h_cap);
    prof.N = N;
    prof.v0 = v0_star;
    prof.r = std::move(o.r);
    prof.v = std::move(o.v);
    prof.vp = std::move(o.vp);
    // snap the tail: beyond the stopping radius the profile is identically 0
    prof.R_support = o.r_stop;
    prof.v.back() = 0.0;
    prof.vp.back() = 0.0;

    // ODE residual via 3-point nonuniform differentiation of the stored v'
    double worst = 0.0;
    for (std::size_t i = 2; i + 2 < prof.r.size(); ++i) {
      double hm = prof.r[i] - prof.r[i - 1], hp = prof.r[i + 1] - prof.r[i];
      double vpp = (hm * hm * prof.vp[i + 1] - hp * hp * prof.vp[i - 1] +
                    (hp * hp - hm * hm) * prof.vp[i]) /
                   (hm * hp * (hm + hp));
      double lhs = vpp + (N - 1) / prof.r[i] * prof.vp[i];
      double rel = std::fabs(lhs - spec.f(prof.v[i])) /
                   std::max(1.0, std::fabs(spec.f(prof.v[i])));
      worst = std::max(worst, rel);
    }
    prof.residual = worst;
    if (prof.residual <= 1e-6) break;
    if (h_cap < 2e-5)
      throw NotConverged("shooting profile residual " +
                         std::to_string(prof.residual));
  }

  // radial integrals over R^N: omega = |S^{N-1}|
  const double omega =
      2.0 * std::pow(std::numbers::pi, 0.5 * N) / std::tgamma(0.5 * N);
  KahanSum Tacc, Vacc;
  for (std::size_t i = 0; i + 1 < prof.r.size(); ++i) {
    double h = prof.r[i + 1] - prof.r[i];
    auto cell = [&](const std::vector<double>& q, auto func) {
      double a = func(q[i]) * std::pow(prof.r[i], N - 1);
      double b = func(q[i + 1]) * std::pow(prof.r[i + 1], N - 1);
      return 0.5 * h * (a + b);
    };
    Tacc.add(cell(prof.vp, [](double s) { return s * s; }));
    Vacc.add(cell(prof.v, [&](double s) { return spec.F(s); }));
  }
  prof.T = omega * Tacc.value();
  prof.V = omega * Vacc.value();
  return prof;
}

// ---------------------------------------------------------------------------
// Rescaling to the unit constraint

/// Constants of the ground-state problem obtained from a radial profile:
/// u*(x) = v(s x) with s = (-V(v))^{1/N} satisfies the unit constraint, and
/// I = s^{2-N} T(v) is the constrained infimum. The virial identity forces
/// beta0 = (N-2)/(2N) I to equal s^2.
struct M1Constants {
  double lambda_scale = 0.0;  // s above
  double I = 0.0;
  double beta0 = 0.0;
  double R_support = 0.0;     // support radius of u*
  double pohozaev_rel = 0.0;  // virial defect of the raw profile
  double scale_consistency = 0.0;  // |s^2 - beta0| / beta0
};

inline M1Constants rescale_profile(const RadialProfile& prof) {
  if (prof.V >= 0.0)
    throw NonNegativePotential("profile has nonnegative potential integral");
  M1Constants c;
  const int N = prof.N;
  c.lambda_scale = std::pow(-prof.V, 1.0 / N);
  c.I = std::pow(c.lambda_scale, 2.0 - N) * prof.T;
  c.beta0 = (N - 2) / (2.0 * N) * c.I;
  c.R_support = prof.R_support / c.lambda_scale;
  c.pohozaev_rel = std::fabs((N - 2) * prof.T + 2.0 * N * prof.V) /
                   std::max(std::fabs((N - 2) * prof.T), 1e-300);
  c.scale_consistency =
      std::fabs(c.lambda_scale * c.lambda_scale - c.beta0) / c.beta0;
  if (c.scale_consistency > 1e-3)
    throw NotConverged("rescaling inconsistent with the virial identity");
  return c;
}

// ---------------------------------------------------------------------------
// Field constructors from profiles

/// u(x) = sign * v(s |x - center|) sampled on the grid.
inline Field field_from_profile(const RadialProfile& prof, const Grid& grid,
                                double scale, const Vec& center,
                                double sign = 1.0) {
  const int N = grid.dim();
  if ((int)center.size() != N) throw GridMismatch("center dimension mismatch");
  Field u(grid, 1);
  Vec x(N);
  for (std::size_t p = 0; p < grid.num_nodes(); ++p) {
    grid.coords(p, x);
    double rr = 0.0;
    for (int a = 0; a < N; ++a) rr += (x[a] - center[a]) * (x[a] - center[a]);
    u.at(p, 0) = sign * prof.value(scale * std::sqrt(rr));
  }
  u.apply_mask();
  return u;
}

/// Two-bump candidate u_y(x) = u*(x) - u*(x + y): a positive bump at the
/// origin and a negative one at -y. Requires disjoint supports and both
/// supports inside the domain.
inline Field build_u_y(const RadialProfile& prof, const Grid& grid, double scale,
                       const Vec& y) {
  const int N = grid.dim();
  const double R = prof.R_support / scale;
  double ylen = norm2(y);
  double hmax = 0.0;
  for (double h : grid.h) hmax = std::max(hmax, h);
  if (ylen < 2.0 * R + 2.0 * hmax)
    throw SupportsOverlap("bump separation " + std::to_string(ylen) +
                          " < " + std::to_string(2.0 * R + 2.0 * hmax));
  for (int a = 0; a < N; ++a) {
    if (R > grid.domain.bound(a) || std::fabs(-y[a]) + R > grid.domain.bound(a))
      throw OutOfBox("bump support leaves the domain");
  }
  Field u = field_from_profile(prof, grid, scale, Vec((std::size_t)N, 0.0));
  Vec c2(y.size());
  for (int a = 0; a < N; ++a) c2[a] = -y[a];
  Field neg = field_from_profile(prof, grid, scale, c2, -1.0);
  for (std::size_t i = 0; i < u.values.size(); ++i) u.values[i] += neg.values[i];
  return u;
}

// ---------------------------------------------------------------------------
// 1-D point-symmetry check

struct PointSymmetry1D {
  double peak = 0.0;            // sub-grid peak location (quadratic fit)
  double mirror_defect = 0.0;   // rel L2 distance from the mirrored field
  bool monotone_left = false;   // nondecreasing left of the peak
  bool monotone_right = false;  // nonincreasing right of the peak
};

inline PointSymmetry1D check_1d_symmetry(const Field& u, int component = 0,
                                         double tol = 1e-10) {
  const Grid& g = u.grid;
  if (g.dim() != 1) throw GridMismatch("check_1d_symmetry needs a 1-D field");
  const int n = g.npts[0];
  int imax = 0;
  for (int i = 1; i < n; ++i)
    if (u.at((std::size_t)i, component) > u.at((std::size_t)imax, component))
      imax = i;
  PointSymmetry1D out;
  double x0 = g.coord(0, imax);
  if (imax > 0 && imax < n - 1) {
    double ym = u.at((std::size_t)imax - 1, component);
    double y0 = u.at((std::size_t)imax, component);
    double yp = u.at((std::size_t)imax + 1, component);
    double denom = ym - 2.0 * y0 + yp;
    if (std::fabs(denom) > 1e-300)
      x0 += 0.5 * g.h[0] * (ym - yp) / denom;
  }
  out.peak = x0;
  KahanSum num, den;
  for (int i = 0; i < n; ++i) {
    double x = g.coord(0, i);
    double mirrored = u.sample({2.0 * x0 - x}, component);
    double d = u.at((std::size_t)i, component) - mirrored;
    num.add(d * d);
    den.add(u.at((std::size_t)i, component) * u.at((std::size_t)i, component));
  }
  out.mirror_defect = std::sqrt(num.value() / std::max(den.value(), 1e-300));
  out.monotone_left = out.monotone_right = true;
  for (int i = 1; i <= imax; ++i)
    if (u.at((std::size_t)i, component) <
        u.at((std::size_t)i - 1, component) - tol)
      out.monotone_left = false;
  for (int i = imax + 1; i < n; ++i)
    if (u.at((std::size_t)i, component) >
        u.at((std::size_t)i - 1, component) + tol)
      out.monotone_right = false;
  return out;
}

}  // namespace symmin
