#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <vector>

#include "symmin/functional.hpp"

namespace symmin {

/// A continuous odd map R^n -> R^k restricted to the unit sphere, together
/// with an evaluation counter (the finders exploit oddness analytically and
/// never query antipodal pairs).
struct OddMap {
  int ambient_dim = 0;
  int k = 0;
  std::function<Vec(const Vec&)> eval;
  mutable long evaluations = 0;

  Vec operator()(const Vec& v) const {
    ++evaluations;
    return eval(v);
  }
};

struct ZeroFindOptions {
  double tol = 1e-8;       // absolute, caller pre-scales by constraint mass
  int scan_points = 2000;
  int max_bisect = 60;
  int max_newton = 60;
  int max_retries = 8;
};

struct ZeroResult {
  Vec v;              // unit normal (ambient coordinates)
  double t = 0.0;     // offset, affine searches only
  Vec phi;
  double norm = 0.0;
  bool converged = false;
  int iterations = 0;
  long evaluations = 0;
};

namespace detail {

inline double vec_norm(const Vec& v) { return norm2(v); }

/// Sub-sphere chart: unit vectors in span(basis).
struct SubSphere {
  std::vector<Vec> basis;  // orthonormal, ambient coordinates
  int dim() const { return (int)basis.size() - 1; }  // sphere dimension

  Vec embed(const Vec& z) const {
    Vec v(basis[0].size(), 0.0);
    for (std::size_t i = 0; i < basis.size(); ++i) axpy(z[i], basis[i], v);
    return v;
  }
};

inline SubSphere admissible_subsphere(int N, const std::vector<Vec>& constraint_basis,
                                      int k) {
  std::vector<Vec> ortho;
  for (const Vec& c : constraint_basis) {
    if ((int)c.size() != N)
      throw Inadmissible("constraint vector dimension mismatch");
    Vec v = c;
    for (const Vec& b : ortho) axpy(-dot(v, b), b, v);
    double nv = norm2(v);
    if (nv > 1e-10) {
      for (double& x : v) x /= nv;
      ortho.push_back(std::move(v));
    }
  }
  SubSphere s;
  s.basis = orthonormal_complement(ortho, N);
  if (s.dim() < k)
    throw Inadmissible("admissible sphere dimension " + std::to_string(s.dim()) +
                       " < number of constraints " + std::to_string(k));
  return s;
}

/// Great-circle bisection for a scalar odd map (k = 1). The arc runs from v0
/// to -v0 through w; endpoint values are (phi0, -phi0) by oddness, so a sign
/// change is guaranteed without evaluating at -v0.
inline ZeroResult bisect_arc(const OddMap& map, const Vec& v0, const Vec& w,
                             double phi0, const ZeroFindOptions& opts) {
  ZeroResult res;
  double lo = 0.0, hi = std::numbers::pi;
  double flo = phi0;
  auto point = [&](double th) {
    Vec v = std::cos(th) * v0;
    axpy(std::sin(th), w, v);
    return normalized(std::move(v));
  };
  for (int it = 0; it < opts.max_bisect; ++it) {
    double mid = 0.5 * (lo + hi);
    Vec v = point(mid);
    Vec phi = map(v);
    ++res.iterations;
    if (std::fabs(phi[0]) <= opts.tol) {
      res.v = v;
      res.phi = phi;
      res.norm = std::fabs(phi[0]);
      res.converged = true;
      return res;
    }
    if ((phi[0] > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = phi[0];
    } else {
      hi = mid;
    }
    res.v = v;
    res.phi = phi;
    res.norm = std::fabs(phi[0]);
  }
  return res;
}

/// Quasi-uniform hemisphere scan followed by damped Gauss-Newton in tangent
/// coordinates with a finite-difference Jacobian.
inline ZeroResult scan_newton(const OddMap& map, const SubSphere& sphere, int k,
                              const ZeroFindOptions& opts,
                              const std::function<bool(const Vec&)>& admissible = {}) {
  const int d = sphere.dim();           // sphere dimension
  const int nb = d + 1;                 // chart coordinates
  ZeroResult best;
  best.norm = std::numeric_limits<double>::infinity();

  auto evaluate = [&](const Vec& v) {
    Vec phi = map(v);
    double n = vec_norm(phi);
    if (n < best.norm) {
      best.norm = n;
      best.v = v;
      best.phi = phi;
    }
    return phi;
  };

  std::vector<Vec> pts = detail::unit_sphere_points(nb, 2 * opts.scan_points);
  int used = 0;
  for (const Vec& z : pts) {
    if (used >= opts.scan_points) break;
    // hemisphere only: first nonzero coordinate positive
    double lead = 0.0;
    for (double c : z)
      if (c != 0.0) { lead = c; break; }
    if (lead < 0.0) continue;
    Vec v = sphere.embed(z);
    if (admissible && !admissible(v)) continue;
    ++used;
    evaluate(v);
    if (best.norm <= opts.tol) {
      best.converged = true;
      return best;
    }
  }

  // Gauss-Newton polish from the scan argmin.
  Vec v = best.v;
  Vec phi = best.phi;
  double fnorm = best.norm;
  for (int it = 0; it < opts.max_newton; ++it) {
    ++best.iterations;
    if (fnorm <= opts.tol) break;
    // tangent basis of the subsphere at v
    Vec z(nb);
    for (int i = 0; i < nb; ++i) z[i] = dot(v, sphere.basis[i]);
    std::vector<Vec> tangent = orthonormal_complement({z}, nb);
    // FD Jacobian: J[:, j] = dPhi/dt_j
    const double fd = 1e-6;
    std::vector<Vec> Jcols;
    for (const Vec& tz : tangent) {
      Vec zp = z;
      axpy(fd, tz, zp);
      Vec vp = sphere.embed(normalized(std::move(zp)));
      Vec php = map(vp);
      Vec col(k);
      for (int i = 0; i < k; ++i) col[i] = (php[i] - phi[i]) / fd;
      Jcols.push_back(std::move(col));
    }
    // solve least-squares J dz = -phi via normal equations (d x d)
    const int nt = (int)tangent.size();
    std::vector<Vec> G((std::size_t)nt, Vec(nt, 0.0));
    Vec rhs(nt, 0.0);
    for (int i = 0; i < nt; ++i) {
      for (int j = 0; j <= i; ++j) {
        double s = dot(Jcols[i], Jcols[j]);
        G[i][j] = s;
        G[j][i] = s;
      }
      rhs[i] = -dot(Jcols[i], phi);
    }
    double diag = 0.0;
    for (int i = 0; i < nt; ++i) diag = std::max(diag, G[i][i]);
    for (int i = 0; i < nt; ++i) G[i][i] += 1e-10 * std::max(1.0, diag);
    Vec dz;
    try {
      dz = solve_dense(G, rhs);
    } catch (const DegenerateGram&) {
      break;
    }
    // damped retraction step
    double step = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 20; ++ls) {
      Vec znew = z;
      for (int i = 0; i < nt; ++i) axpy(step * dz[i], tangent[i], znew);
      Vec vnew = sphere.embed(normalized(std::move(znew)));
      if (admissible && !admissible(vnew)) {
        step *= 0.5;
        continue;
      }
      Vec phnew = map(vnew);
      double nnew = vec_norm(phnew);
      if (nnew < best.norm) {
        best.norm = nnew;
        best.v = vnew;
        best.phi = phnew;
      }
      if (nnew < fnorm) {
        v = vnew;
        phi = phnew;
        fnorm = nnew;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
  }
  best.converged = best.norm <= opts.tol;
  return best;
}

}  // namespace detail

/// Intermediate-value zero finding for a scalar odd map on the admissible
/// subsphere.
inline ZeroResult find_odd_zero_k1(const OddMap& map,
                                   const std::vector<Vec>& constraint_basis,
                                   const ZeroFindOptions& opts) {
  if (map.k != 1) throw Inadmissible("find_odd_zero_k1 requires k = 1");
  detail::SubSphere sphere =
      detail::admissible_subsphere(map.ambient_dim, constraint_basis, 1);
  Vec v0 = sphere.basis[0];
  Vec phi0 = map(v0);
  ZeroResult best;
  if (std::fabs(phi0[0]) <= opts.tol) {
    best.v = v0;
    best.phi = phi0;
    best.norm = std::fabs(phi0[0]);
    best.converged = true;
    best.evaluations = map.evaluations;
    return best;
  }
  best.norm = std::numeric_limits<double>::infinity();
  const int nb = (int)sphere.basis.size();
  for (int attempt = 0; attempt < opts.max_retries; ++attempt) {
    // rotate the arc direction through the remaining basis on retries
    Vec w = sphere.basis[1 + attempt % (nb - 1)];
    if (attempt >= nb - 1) {
      double ang = 0.5 * attempt;
      Vec mix = std::cos(ang) * sphere.basis[1];
      axpy(std::sin(ang), sphere.basis[1 + (attempt % (nb - 1))], mix);
      w = mix;
      axpy(-dot(w, v0), v0, w);
      w = normalized(std::move(w));
    }
    ZeroResult r = detail::bisect_arc(map, v0, w, phi0[0], opts);
    if (r.norm < best.norm) best = r;
    if (best.converged) break;
  }
  best.evaluations = map.evaluations;
  if (!best.converged && !std::isfinite(best.norm))
    throw NoSignChange("bisection produced no evaluations");
  return best;
}

inline ZeroResult find_odd_zero_general(const OddMap& map,
                                        const std::vector<Vec>& constraint_basis,
                                        const ZeroFindOptions& opts) {
  detail::SubSphere sphere =
      detail::admissible_subsphere(map.ambient_dim, constraint_basis, map.k);
  ZeroResult r = detail::scan_newton(map, sphere, map.k, opts);
  r.evaluations = map.evaluations;
  return r;
}

// ---------------------------------------------------------------------------
// Problem-facing wrappers

inline double split_tolerance(const VariationalProblem& P, const Field& u) {
  return 1e-8 * std::max(constraint_scale(P, u), 1e-30);
}

inline OddMap make_split_map(const VariationalProblem& P, const Field& u) {
  OddMap map;
  map.ambient_dim = P.grid.dim();
  map.k = P.k();
  map.eval = [&P, &u](const Vec& v) { return split_defect(P, u, v); };
  return map;
}

/// Splitting normal through the origin, k = 1 (great-circle bisection).
inline ZeroResult find_zero_k1(const VariationalProblem& P, const Field& u,
                               const std::vector<Vec>& constraint_basis = {},
                               ZeroFindOptions opts = {}) {
  if (P.k() != 1) throw Inadmissible("find_zero_k1 requires exactly one constraint");
  if (opts.tol == ZeroFindOptions{}.tol) opts.tol = split_tolerance(P, u);
  OddMap map = make_split_map(P, u);
  return find_odd_zero_k1(map, constraint_basis, opts);
}

/// Splitting normal through the origin, general k (scan + Gauss-Newton).
inline ZeroResult find_zero_k_general(const VariationalProblem& P, const Field& u,
                                      const std::vector<Vec>& constraint_basis = {},
                                      ZeroFindOptions opts = {}) {
  if (opts.tol == ZeroFindOptions{}.tol) opts.tol = split_tolerance(P, u);
  OddMap map = make_split_map(P, u);
  return find_odd_zero_general(map, constraint_basis, opts);
}

/// Affine splitting plane (v, t) via the compactified odd map on S^N.
/// Pole caps |y_{N+1}| > 1 - 1e-6 are excluded: zeros cannot occur there
/// when some lambda_j != 0.
inline ZeroResult find_affine_zero(const VariationalProblem& P, const Field& u,
                                   const std::vector<Vec>& constraint_basis = {},
                                   ZeroFindOptions opts = {}) {
  if (!P.translation_invariant)
    throw NotTranslationInvariant("affine splitting needs translation invariance");
  bool any_lambda = false;
  for (double l : P.densities.lambda) any_lambda = any_lambda || l != 0.0;
  if (!any_lambda)
    throw AllLambdaZero("affine zero finding requires some lambda_j != 0");
  if (opts.tol == ZeroFindOptions{}.tol) opts.tol = split_tolerance(P, u);

  const int N = P.grid.dim();
  OddMap map;
  map.ambient_dim = N + 1;
  map.k = P.k();
  map.eval = [&P, &u](const Vec& y) { return compactified_defect(P, u, y); };

  std::vector<Vec> lifted;
  for (const Vec& c : constraint_basis) {
    Vec e(N + 1, 0.0);
    for (int a = 0; a < N; ++a) e[a] = c[a];
    lifted.push_back(std::move(e));
  }
  detail::SubSphere sphere = detail::admissible_subsphere(N + 1, lifted, map.k);
  auto off_poles = [N](const Vec& y) { return std::fabs(y[N]) <= 1.0 - 1e-6; };
  ZeroResult r = detail::scan_newton(map, sphere, map.k, opts, off_poles);
  r.evaluations = map.evaluations;
  // map back to (v, t)
  Vec head(r.v.begin(), r.v.begin() + N);
  double hn = norm2(head);
  for (double& c : head) c /= hn;
  r.t = r.v[N] / (1.0 - std::fabs(r.v[N]));
  r.v = head;
  return r;
}

/// Mutually orthogonal splitting normals (the orthogonal-basis induction):
/// each successive normal is found in the orthogonal complement of the
/// previous ones.
inline std::vector<ZeroResult> orthogonal_split_basis(const VariationalProblem& P,
                                                      const Field& u, int count,
                                                      ZeroFindOptions opts = {}) {
  const int N = P.grid.dim();
  if (count > N - P.k())
    throw PreconditionError("count exceeds the induction bound N - k");
  if (opts.tol == ZeroFindOptions{}.tol) opts.tol = split_tolerance(P, u);
  std::vector<ZeroResult> out;
  std::vector<Vec> fixed;
  for (int i = 0; i < count; ++i) {
    ZeroResult r = (P.k() == 1) ? find_zero_k1(P, u, fixed, opts)
                                : find_zero_k_general(P, u, fixed, opts);
    fixed.push_back(r.v);
    // re-orthonormalize against previous normals (they are orthogonal by
    // construction of the subsphere; this guards rounding)
    Vec& v = fixed.back();
    for (std::size_t j = 0; j + 1 < fixed.size(); ++j) axpy(-dot(v, fixed[j]), fixed[j], v);
    v = normalized(std::move(v));
    r.v = v;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace symmin
