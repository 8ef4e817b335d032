#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "symmin/splitting.hpp"

namespace symmin {

// ---------------------------------------------------------------------------
// Reflection checks

struct ReflectionCheck {
  Field u_plus, u_minus;
  SplitValue split;
  double E = 0.0, E_plus = 0.0, E_minus = 0.0;
  double energy_residual = 0.0;   // |E(u+) + E(u-) - 2E(u)|
  double identity_tol = 0.0;      // discretization bound for the residual
  Vec q_plus, q_minus;            // constraint values of the reflections
  double constraint_error = 0.0;  // max_j |Q_j(u+/-) - lambda_j| / scale
  double mirror_defect = 0.0;     // rel L2 distance of u from its reflection
};

namespace detail {

/// Everything the energy-sum identity can lose is localised to the one-cell
/// slab around the plane, where the fractional side weights and the mirrored
/// stencils disagree with the exact half-space split. Integrating
/// |F| + |dF/dg| g over that slab (for both half fields) bounds the residual.
inline double slab_identity_bound(const VariationalProblem& P, const Field& u,
                                  const Hyperplane& H) {
  const Grid& g = P.grid;
  const int N = g.dim();
  Field gmag = gradient_magnitude(u);
  const double band = normal_cell_size(g, H.normal);
  Vec x(N), uval(P.m);
  KahanSum acc;
  for (std::size_t p = 0; p < g.num_nodes(); ++p) {
    double w = g.quad_weight(p);
    if (w == 0.0) continue;
    g.coords(p, x);
    if (std::fabs(H.signed_distance(x)) > band) continue;
    for (int c = 0; c < P.m; ++c) uval[c] = u.at(p, c);
    double partials[CompiledDensity::kMaxComponents + 1];
    double v = P.compiled_F.eval_jet(g.radius[p], uval.data(), gmag.values[p],
                                     partials, nullptr);
    acc.add(w * (std::fabs(v) + std::fabs(partials[P.m]) * gmag.values[p]));
  }
  return 2.0 * acc.value() + 1e-10 * (1.0 + std::fabs(energy(P, u)));
}

}  // namespace detail

/// Builds both reflections of u about H, verifies that the reflections
/// inherit the constraints, and evaluates the energy-sum identity
/// E(u+) + E(u-) = 2 E(u) against its discretization bound.
/// Throws NotSplitting when H fails to split the constraints.
inline ReflectionCheck reflect_and_compare(const VariationalProblem& P,
                                           const Field& u, const Hyperplane& H,
                                           double split_tol_rel = 1e-6,
                                           double clip_tol = 1e-9) {
  detail::check_grid(P, u);
  double scale = std::max(constraint_scale(P, u), 1e-30);
  Vec diff = detail::split_difference(P, u, H.normal, H.offset);
  double worst = 0.0;
  for (double d : diff) worst = std::max(worst, std::fabs(d));
  if (worst > split_tol_rel * scale)
    throw NotSplitting("plane does not split the constraints: defect " +
                       std::to_string(worst / scale));

  ReflectionCheck chk;
  chk.split = half_space_split(P, u, H);
  chk.u_plus = reflect_field(u, H, ReflectSide::plus, clip_tol);
  chk.u_minus = reflect_field(u, H, ReflectSide::minus, clip_tol);
  chk.E = energy(P, u);
  chk.E_plus = energy(P, chk.u_plus);
  chk.E_minus = energy(P, chk.u_minus);
  chk.energy_residual = std::fabs(chk.E_plus + chk.E_minus - 2.0 * chk.E);
  chk.identity_tol = detail::slab_identity_bound(P, u, H);
  chk.q_plus = constraints(P, chk.u_plus);
  chk.q_minus = constraints(P, chk.u_minus);
  for (int j = 0; j < P.k(); ++j) {
    chk.constraint_error =
        std::max(chk.constraint_error,
                 std::fabs(chk.q_plus[j] - P.densities.lambda[j]) / scale);
    chk.constraint_error =
        std::max(chk.constraint_error,
                 std::fabs(chk.q_minus[j] - P.densities.lambda[j]) / scale);
  }
  KahanSum num, den;
  for (std::size_t i = 0; i < u.values.size(); ++i) {
    double d = u.values[i] - chk.u_plus.values[i];
    num.add(d * d);
    den.add(u.values[i] * u.values[i]);
  }
  chk.mirror_defect = std::sqrt(num.value() / std::max(den.value(), 1e-300));
  return chk;
}

// ---------------------------------------------------------------------------
// Symmetry defects

/// Relative RMS deviation of u from its rotation-orbit averages about the
/// affine subspace V (orbit average over `n` interpolated samples per node).
/// 0 for fields radial about V; fields are zero-extended outside the box.
inline double radial_defect(const Field& u, const AffineSubspace& V, int n = 32) {
  const Grid& g = u.grid;
  const int N = g.dim();
  Vec x(N);
  KahanSum num, den;
  Vec vals((std::size_t)n);
  for (std::size_t p = 0; p < g.num_nodes(); ++p) {
    double w = g.quad_weight(p);
    if (w == 0.0) continue;
    g.coords(p, x);
    std::vector<Vec> orbit = orbit_samples(x, V, n);
    for (int c = 0; c < u.m; ++c) {
      double mean = 0.0;
      for (int i = 0; i < n; ++i) {
        vals[i] = u.sample(orbit[i], c);
        mean += vals[i];
      }
      mean /= n;
      double dev = 0.0;
      for (int i = 0; i < n; ++i) dev += (vals[i] - mean) * (vals[i] - mean);
      num.add(w * dev / n);
      double uc = u.at(p, c);
      den.add(w * uc * uc);
    }
  }
  return std::sqrt(num.value() / std::max(den.value(), 1e-300));
}

/// Normal-derivative criterion: RMS of the finite-difference normal
/// derivative of u over plane sample points, normalized by the RMS in-plane
/// gradient scale. Small values certify reflection symmetry of a solution.
inline double normal_derivative_defect(const Field& u, const Hyperplane& H) {
  const Grid& g = u.grid;
  const int N = g.dim();
  double hmin = g.h[0];
  for (double h : g.h) hmin = std::min(hmin, h);
  const double eps = 0.5 * hmin;
  std::vector<Vec> tangent = orthonormal_complement({H.normal}, N);

  // tangential lattice covering the domain's bounding box
  double bound = 0.0;
  for (int a = 0; a < N; ++a) bound = std::max(bound, g.domain.bound(a));
  const int per_axis = 2 * (int)std::ceil(bound / hmin) + 1;
  std::vector<int> idx((std::size_t)N - 1, 0);
  Vec base = H.offset * H.normal;

  KahanSum num, den;
  bool done = (N == 1);
  if (N == 1) {
    double dn = (u.sample({base[0] + eps}, 0) - u.sample({base[0] - eps}, 0)) /
                (2.0 * eps);
    return std::fabs(dn);
  }
  while (!done) {
    Vec x = base;
    for (int a = 0; a < N - 1; ++a)
      axpy((idx[a] - (per_axis - 1) / 2) * hmin, tangent[a], x);
    if (g.domain.contains(x)) {
      for (int c = 0; c < u.m; ++c) {
        Vec xp = x, xm = x;
        axpy(eps, H.normal, xp);
        axpy(-eps, H.normal, xm);
        double dn = (u.sample(xp, c) - u.sample(xm, c)) / (2.0 * eps);
        num.add(dn * dn);
        // tangential scale at the same point
        for (int a = 0; a < N - 1; ++a) {
          Vec tp = x, tm = x;
          axpy(eps, tangent[a], tp);
          axpy(-eps, tangent[a], tm);
          double dt = (u.sample(tp, c) - u.sample(tm, c)) / (2.0 * eps);
          den.add(dt * dt);
        }
        den.add(dn * dn);
      }
    }
    for (int a = N - 2;; --a) {
      if (a < 0) {
        done = true;
        break;
      }
      if (++idx[a] < per_axis) break;
      idx[a] = 0;
    }
  }
  return std::sqrt(num.value() / std::max(den.value(), 1e-300));
}

// ---------------------------------------------------------------------------
// Full symmetry detection

enum class SymmetryVerdict { radial_about_subspace, symmetric_only, inconclusive };

struct PlaneCheck {
  Hyperplane plane;         // original coordinates
  double zero_norm = 0.0;   // |Phi| at the accepted normal
  bool converged = false;
  double energy_residual = 0.0;
  double identity_tol = 0.0;
  double mirror_defect = 0.0;
  double normal_derivative = 0.0;
};

struct SymmetryOptions {
  double radial_tol = 1e-2;
  double mirror_tol = 1e-2;
  int orbit_samples = 32;
  ZeroFindOptions zero;
};

struct SymmetryReport {
  SymmetryVerdict verdict = SymmetryVerdict::inconclusive;
  AffineSubspace V;
  std::vector<PlaneCheck> planes;
  double radial = 0.0;
  std::string note;
};

/// Symmetry detection for origin-fixed problems: finds N - k mutually
/// orthogonal splitting normals through the origin, checks each reflection,
/// and measures radiality about their orthogonal complement (a k-dimensional
/// subspace through the origin).
inline SymmetryReport detect_subspace_symmetry(const VariationalProblem& P,
                                               const Field& u,
                                               const SymmetryOptions& opts = {}) {
  const int N = P.grid.dim();
  const int k = P.k();
  SymmetryReport rep;
  if (N - k < 1) {
    rep.note = "no admissible sphere: k > N - 1";
    return rep;
  }
  std::vector<ZeroResult> zeros;
  try {
    zeros = orthogonal_split_basis(P, u, N - k, opts.zero);
  } catch (const Error& e) {
    rep.note = std::string("zero finding failed: ") + e.what();
    return rep;
  }
  std::vector<Vec> normals;
  bool all_planes_ok = true;
  for (const ZeroResult& z : zeros) {
    PlaneCheck pc;
    pc.plane = Hyperplane(z.v, 0.0);
    pc.zero_norm = z.norm;
    pc.converged = z.converged;
    if (z.converged) {
      try {
        ReflectionCheck chk = reflect_and_compare(P, u, pc.plane);
        pc.energy_residual = chk.energy_residual;
        pc.identity_tol = chk.identity_tol;
        pc.mirror_defect = chk.mirror_defect;
      } catch (const NotSplitting&) {
        pc.converged = false;
      }
      pc.normal_derivative = normal_derivative_defect(u, pc.plane);
    }
    all_planes_ok = all_planes_ok && pc.converged &&
                    pc.mirror_defect <= opts.mirror_tol;
    normals.push_back(z.v);
    rep.planes.push_back(std::move(pc));
  }
  rep.V = AffineSubspace(Vec((std::size_t)N, 0.0),
                         orthonormal_complement(normals, N));
  rep.radial = radial_defect(u, rep.V, opts.orbit_samples);
  if (rep.radial <= opts.radial_tol)
    rep.verdict = SymmetryVerdict::radial_about_subspace;
  else if (all_planes_ok)
    rep.verdict = SymmetryVerdict::symmetric_only;
  return rep;
}

namespace detail {

inline Field translate_field(const Field& u, const Vec& shift) {
  Field out(u.grid, u.m);
  const int N = u.grid.dim();
  Vec x(N);
  for (std::size_t p = 0; p < u.grid.num_nodes(); ++p) {
    u.grid.coords(p, x);
    Vec y = x;
    for (int a = 0; a < N; ++a) y[a] += shift[a];
    for (int c = 0; c < u.m; ++c) out.at(p, c) = u.sample(y, c);
  }
  out.apply_mask();
  return out;
}

}  // namespace detail

/// Symmetry detection for translation-invariant problems: iterates the
/// compactified affine zero search, re-centering the field after each found
/// plane so later normals can be taken orthogonal to the earlier ones. The
/// resulting N - k + 1 planes intersect in a (k-1)-dimensional affine
/// subspace V, and radiality of u about V is measured.
inline SymmetryReport detect_affine_symmetry(const VariationalProblem& P,
                                             const Field& u,
                                             const SymmetryOptions& opts = {}) {
  const int N = P.grid.dim();
  const int k = P.k();
  SymmetryReport rep;
  if (!P.translation_invariant) {
    rep.note = "problem is not translation-invariant";
    return rep;
  }
  const int count = N - k + 1;
  Field uw = u;
  Vec shift((std::size_t)N, 0.0);  // uw(x) = u(x + shift)
  std::vector<Vec> normals;
  Vec offsets;
  bool all_planes_ok = true;
  for (int i = 0; i < count; ++i) {
    ZeroResult z;
    try {
      z = find_affine_zero(P, uw, normals, opts.zero);
    } catch (const Error& e) {
      rep.note = std::string("affine zero finding failed: ") + e.what();
      return rep;
    }
    // orthogonalize against the earlier normals (guards rounding)
    for (const Vec& m : normals) axpy(-dot(z.v, m), m, z.v);
    z.v = normalized(std::move(z.v));

    PlaneCheck pc;
    // plane in original coordinates: v . (x) = t + v . shift
    pc.plane = Hyperplane(z.v, z.t + dot(z.v, shift));
    pc.zero_norm = z.norm;
    pc.converged = z.converged;
    if (z.converged) {
      try {
        ReflectionCheck chk =
            reflect_and_compare(P, uw, Hyperplane(z.v, z.t));
        pc.energy_residual = chk.energy_residual;
        pc.identity_tol = chk.identity_tol;
        pc.mirror_defect = chk.mirror_defect;
      } catch (const NotSplitting&) {
        pc.converged = false;
      } catch (const SupportClipped& e) {
        pc.converged = false;
        rep.note = std::string("reflection clipped: ") + e.what();
      }
      pc.normal_derivative = normal_derivative_defect(uw, Hyperplane(z.v, z.t));
    }
    all_planes_ok = all_planes_ok && pc.converged &&
                    pc.mirror_defect <= opts.mirror_tol;
    rep.planes.push_back(pc);
    if (!z.converged) {
      rep.note = "affine zero search did not converge";
      return rep;
    }
    normals.push_back(z.v);
    offsets.push_back(pc.plane.offset);
    // re-center: move the plane through the origin for the next round
    Vec delta = z.t * z.v;
    for (int a = 0; a < N; ++a) shift[a] += delta[a];
    uw = detail::translate_field(uw, delta);
  }
  // V = intersection of the planes (orthonormal normals): base point plus the
  // common orthogonal complement.
  Vec base((std::size_t)N, 0.0);
  for (int i = 0; i < count; ++i) axpy(offsets[i], normals[i], base);
  rep.V = AffineSubspace(base, orthonormal_complement(normals, N));
  rep.radial = radial_defect(u, rep.V, opts.orbit_samples);
  if (rep.radial <= opts.radial_tol)
    rep.verdict = SymmetryVerdict::radial_about_subspace;
  else if (all_planes_ok)
    rep.verdict = SymmetryVerdict::symmetric_only;
  return rep;
}

inline SymmetryReport detect_symmetry(const VariationalProblem& P, const Field& u,
                                      const SymmetryOptions& opts = {}) {
  return P.translation_invariant ? detect_affine_symmetry(P, u, opts)
                                 : detect_subspace_symmetry(P, u, opts);
}

}  // namespace symmin
