#pragma once

#include <cmath>
#include <vector>

#include "symmin/compacton.hpp"
#include "symmin/density.hpp"
#include "symmin/field.hpp"

namespace symmin {

/// The minimization problem: domain/grid, densities, constraint targets.
struct VariationalProblem {
  Grid grid;
  DensitySet densities;
  int m = 1;                          // field components
  bool translation_invariant = false; // densities must not reference r
  CompiledDensity compiled_F;
  std::vector<CompiledDensity> compiled_G;

  VariationalProblem() = default;
  VariationalProblem(Grid g, DensitySet d, int components, bool trans_inv)
      : grid(std::move(g)), densities(std::move(d)), m(components),
        translation_invariant(trans_inv) {
    auto check = [&](const ExprPtr& e) {
      if (max_u_index(e) > m)
        throw ArityError("density references more components than declared");
      if (translation_invariant && uses_var(e, ExprKind::var_r))
        throw NotTranslationInvariant("translation-invariant problem may not reference r");
    };
    check(densities.F);
    for (const auto& gj : densities.G) check(gj);
    if (densities.lambda.size() != densities.G.size())
      throw ArityError("constraint target count != constraint count");
    compiled_F = CompiledDensity(densities.F, m);
    for (const auto& gj : densities.G) compiled_G.emplace_back(gj, m);
  }

  int k() const { return densities.k(); }
};

namespace detail {

inline void check_grid(const VariationalProblem& P, const Field& u) {
  if (!u.grid.same_layout(P.grid) || u.m != P.m)
    throw GridMismatch("field does not live on the problem's grid");
}

/// Integrates one density over the grid (deterministic order, compensated).
inline double integrate(const VariationalProblem& P, const Field& u,
                        const CompiledDensity& density, const Field& gmag,
                        bool absolute = false) {
  const Grid& g = P.grid;
  Vec uval(P.m);
  KahanSum sum;
  for (std::size_t p = 0; p < g.num_nodes(); ++p) {
    double w = g.quad_weight(p);
    if (w == 0.0) continue;
    for (int c = 0; c < P.m; ++c) uval[c] = u.at(p, c);
    double v = density.eval(g.radius[p], uval.data(), gmag.values[p]);
    sum.add(absolute ? w * std::fabs(v) : w * v);
  }
  return sum.value();
}

}  // namespace detail

inline double energy(const VariationalProblem& P, const Field& u) {
  detail::check_grid(P, u);
  Field gmag = gradient_magnitude(u);
  return detail::integrate(P, u, P.compiled_F, gmag);
}

inline Vec constraints(const VariationalProblem& P, const Field& u) {
  detail::check_grid(P, u);
  Field gmag = gradient_magnitude(u);
  Vec q(P.k());
  for (int j = 0; j < P.k(); ++j)
    q[j] = detail::integrate(P, u, P.compiled_G[j], gmag);
  return q;
}

/// Total constraint mass sum_j int |G_j| dx; the library's tolerance scale.
inline double constraint_scale(const VariationalProblem& P, const Field& u) {
  detail::check_grid(P, u);
  Field gmag = gradient_magnitude(u);
  double s = 0.0;
  for (int j = 0; j < P.k(); ++j)
    s += detail::integrate(P, u, P.compiled_G[j], gmag, /*absolute=*/true);
  return s;
}

/// Per-constraint integrals over the two open half-spaces of H. Nodes within
/// half a cell of the plane get fractional weights from the signed-distance
/// cut fraction, which makes the split Lipschitz in the plane parameters.
struct SplitValue {
  Vec plus, minus;
};

namespace detail {

/// Cell extent along the plane normal; the transition band of the
/// fractional weights.
inline double normal_cell_size(const Grid& g, const Vec& normal) {
  double s = 0.0;
  for (int a = 0; a < g.dim(); ++a) s += g.h[a] * std::fabs(normal[a]);
  return s;
}

/// Odd side indicator in [-1,1]: +1 fully on the plus side, -1 on the minus
/// side, linear within the transition band. Exactly odd under d -> -d.
inline double side_fraction(double d, double band) {
  double s = 2.0 * d / band;
  if (s > 1.0) return 1.0;
  if (s < -1.0) return -1.0;
  return s;
}

inline void check_plane(const VariationalProblem& P, const Hyperplane& H) {
  if ((int)H.normal.size() != P.grid.dim())
    throw GridMismatch("hyperplane dimension != problem dimension");
  if (P.grid.domain.rotation_invariant() && std::fabs(H.offset) > 1e-12)
    throw OriginRequired("ball/annulus domains require hyperplanes through the origin");
}

/// Phi_j = I_j^+ - I_j^- for the plane {x.v = t}, evaluated as a single
/// compensated sum so that negating (v, t) negates the result bit-for-bit.
inline Vec split_difference(const VariationalProblem& P, const Field& u,
                            const Vec& normal, double offset) {
  const Grid& g = P.grid;
  const int N = g.dim();
  Field gmag = gradient_magnitude(u);
  const double band = normal_cell_size(g, normal);
  Vec x(N), uval(P.m);
  std::vector<KahanSum> sums(P.k());
  for (std::size_t p = 0; p < g.num_nodes(); ++p) {
    double w = g.quad_weight(p);
    if (w == 0.0) continue;
    g.coords(p, x);
    double d = dot(x, normal) - offset;
    double s = side_fraction(d, band);
    for (int c = 0; c < P.m; ++c) uval[c] = u.at(p, c);
    double r = g.radius[p];
    for (int j = 0; j < P.k(); ++j)
      sums[j].add(w * s * P.compiled_G[j].eval(r, uval.data(), gmag.values[p]));
  }
  Vec out(P.k());
  for (int j = 0; j < P.k(); ++j) out[j] = sums[j].value();
  return out;
}

}  // namespace detail

inline SplitValue half_space_split(const VariationalProblem& P, const Field& u,
                                   const Hyperplane& H) {
  detail::check_grid(P, u);
  detail::check_plane(P, H);
  Vec diff = detail::split_difference(P, u, H.normal, H.offset);
  Vec q = constraints(P, u);
  SplitValue sv;
  sv.plus.resize(P.k());
  sv.minus.resize(P.k());
  for (int j = 0; j < P.k(); ++j) {
    sv.plus[j] = 0.5 * (q[j] + diff[j]);
    sv.minus[j] = 0.5 * (q[j] - diff[j]);
  }
  return sv;
}

/// Odd map Phi on S^{N-1}: constraint-split defect of the plane through the
/// origin with unit normal v.
inline Vec split_defect(const VariationalProblem& P, const Field& u, const Vec& v) {
  detail::check_grid(P, u);
  if (std::fabs(norm2(v) - 1.0) > 1e-10)
    throw PreconditionError("split_defect needs a unit normal");
  return detail::split_difference(P, u, v, 0.0);
}

/// Odd map psi-tilde on S^{N-1} x R for translation-invariant problems.
inline Vec affine_split_defect(const VariationalProblem& P, const Field& u,
                               const Vec& v, double t) {
  detail::check_grid(P, u);
  if (!P.translation_invariant)
    throw NotTranslationInvariant("affine splits need a translation-invariant problem");
  if (std::fabs(norm2(v) - 1.0) > 1e-10)
    throw PreconditionError("affine_split_defect needs a unit normal");
  return detail::split_difference(P, u, v, t);
}

/// The compactification of psi-tilde to S^N. Poles map to -lambda / +lambda
/// exactly; elsewhere y = (y', y_{N+1}) maps to the plane with normal
/// y'/|y'| and offset y_{N+1}/(1-|y_{N+1}|).
inline Vec compactified_defect(const VariationalProblem& P, const Field& u,
                               const Vec& y) {
  detail::check_grid(P, u);
  if (!P.translation_invariant)
    throw NotTranslationInvariant("compactified splits need a translation-invariant problem");
  const int N = P.grid.dim();
  if ((int)y.size() != N + 1)
    throw PreconditionError("compactified point must lie on S^N in R^(N+1)");
  if (std::fabs(norm2(y) - 1.0) > 1e-10)
    throw PreconditionError("compactified point must lie on S^N");
  double last = y[N];
  if (std::fabs(last) >= 1.0 - 1e-15) {
    Vec out = P.densities.lambda;
    for (double& v : out) v = (last > 0.0) ? -v : v;
    return out;
  }
  Vec head(y.begin(), y.begin() + N);
  double hn = norm2(head);
  for (double& c : head) c /= hn;
  double t = last / (1.0 - std::fabs(last));
  return detail::split_difference(P, u, head, t);
}

// ---------------------------------------------------------------------------
// First variations

struct FirstVariation {
  Field gradE;                 // continuum-scaled variational derivative
  std::vector<Field> gradQ;    // one per constraint
  bool nondifferentiable = false;
};

namespace detail {

/// Raw discrete gradient of the quadrature sum of one density with respect
/// to nodal values (not weight-scaled). Adjoint of the difference stencils.
inline Field raw_gradient(const VariationalProblem& P, const Field& u,
                          const CompiledDensity& density, const Field& gmag,
                          bool* nondiff = nullptr) {
  const Grid& g = P.grid;
  const int N = g.dim();
  Field grad(g, P.m);
  Vec uval(P.m);
  std::vector<int> idx(N);
  double partials[CompiledDensity::kMaxComponents + 1];
  std::vector<std::size_t> stride((std::size_t)N, 1);
  for (int a = N - 2; a >= 0; --a) stride[a] = stride[a + 1] * g.npts[a + 1];
  for (std::size_t p = 0; p < g.num_nodes(); ++p) {
    double w = g.quad_weight(p);
    if (w == 0.0) continue;
    for (int c = 0; c < P.m; ++c) uval[c] = u.at(p, c);
    double gm = gmag.values[p];
    bool flag = false;
    density.eval_jet(g.radius[p], uval.data(), gm, partials, &flag);
    if (nondiff && flag) *nondiff = true;
    for (int c = 0; c < P.m; ++c) grad.at(p, c) += w * partials[c];
    double fg = partials[P.m];
    if (fg != 0.0) {
      // Chain term through g_p = sqrt(sum_ac (D+^2 + D-^2)/2): scatter
      // w * dF/dg * (D+- / 2 g_p) through each half-difference, which for
      // F = g^2/2 assembles the compact 5/7-point Laplacian.
      double coef = w * fg * (gm > 1e-300 ? 1.0 / gm : 0.0);
      g.node_multi_index(p, idx);
      for (int a = 0; a < N; ++a) {
        const int i = idx[a];
        const int n = g.npts[a];
        const double h = g.h[a];
        const std::size_t s = stride[a];
        for (int c = 0; c < P.m; ++c) {
          double dp, dm;
          half_differences(u, p, a, c, idx, dp, dm);
          if (i > 0 && i < n - 1) {
            double sp = 0.5 * coef * dp / h;
            double sm = 0.5 * coef * dm / h;
            grad.at(p + s, c) += sp;
            grad.at(p, c) += sm - sp;
            grad.at(p - s, c) -= sm;
          } else if (i == 0) {
            double t = coef * dp / (2.0 * h);  // dp == dm == one-sided value
            grad.at(p, c) -= 3.0 * t;
            grad.at(p + s, c) += 4.0 * t;
            grad.at(p + 2 * s, c) -= t;
          } else {
            double t = coef * dp / (2.0 * h);
            grad.at(p, c) += 3.0 * t;
            grad.at(p - s, c) -= 4.0 * t;
            grad.at(p - 2 * s, c) += t;
          }
        }
      }
    }
  }
  // Frozen out-of-domain nodes carry no gradient.
  grad.apply_mask();
  return grad;
}

inline Field weight_rescale(const Grid& g, Field raw) {
  for (std::size_t p = 0; p < g.num_nodes(); ++p) {
    double w = g.quad_weight(p);
    for (int c = 0; c < raw.m; ++c) raw.at(p, c) = w > 0.0 ? raw.at(p, c) / w : 0.0;
  }
  return raw;
}

/// Quadrature-weighted L2 inner product of two fields.
inline double weighted_dot(const Grid& g, const Field& a, const Field& b) {
  KahanSum s;
  for (std::size_t p = 0; p < g.num_nodes(); ++p) {
    double w = g.quad_weight(p);
    if (w == 0.0) continue;
    for (int c = 0; c < a.m; ++c) s.add(w * a.at(p, c) * b.at(p, c));
  }
  return s.value();
}

}  // namespace detail

using detail::weighted_dot;

inline FirstVariation first_variation(const VariationalProblem& P, const Field& u) {
  detail::check_grid(P, u);
  Field gmag = gradient_magnitude(u);
  FirstVariation fv;
  fv.gradE = detail::weight_rescale(
      P.grid, detail::raw_gradient(P, u, P.compiled_F, gmag, &fv.nondifferentiable));
  for (int j = 0; j < P.k(); ++j)
    fv.gradQ.push_back(detail::weight_rescale(
        P.grid,
        detail::raw_gradient(P, u, P.compiled_G[j], gmag, &fv.nondifferentiable)));
  return fv;
}

struct MultiplierFit {
  Vec alpha;
  double relative_residual = 0.0;
};

/// Least-squares fit of gradE + sum_j alpha_j gradQ_j = 0 over the grid.
inline MultiplierFit fit_multipliers(const VariationalProblem& P, const Field& u) {
  if (P.k() < 1) throw PreconditionError("fit_multipliers needs k >= 1");
  FirstVariation fv = first_variation(P, u);
  const int k = P.k();
  std::vector<Vec> G(k, Vec(k, 0.0));
  Vec rhs(k, 0.0);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j <= i; ++j) {
      double v = detail::weighted_dot(P.grid, fv.gradQ[i], fv.gradQ[j]);
      G[i][j] = G[j][i] = v;
    }
    rhs[i] = -detail::weighted_dot(P.grid, fv.gradQ[i], fv.gradE);
  }
  MultiplierFit fit;
  fit.alpha = solve_dense(G, rhs);
  // residual field gradE + sum alpha_j gradQ_j
  Field res = fv.gradE;
  for (int j = 0; j < k; ++j)
    for (std::size_t i = 0; i < res.values.size(); ++i)
      res.values[i] += fit.alpha[j] * fv.gradQ[j].values[i];
  double nE = std::sqrt(detail::weighted_dot(P.grid, fv.gradE, fv.gradE));
  double nR = std::sqrt(detail::weighted_dot(P.grid, res, res));
  fit.relative_residual = nE > 0.0 ? nR / nE : nR;
  return fit;
}

struct PohozaevCheck {
  double defect = 0.0;           // (N-2) T + 2 beta N V
  double relative_defect = 0.0;  // |defect| / ((N-2) T)
  double beta_predicted = 0.0;   // (N-2) T / (-2 N V)
};

/// Scaling identity (N-2) T + 2 beta N V = 0 for solutions of
/// -Delta u + beta f(u) = 0; with V = -1 the predicted multiplier is
/// beta0 = (N-2)/(2N) T.
inline PohozaevCheck pohozaev_defect(double beta, int N, double T, double V) {
  PohozaevCheck c;
  c.defect = (N - 2) * T + 2.0 * beta * N * V;
  c.relative_defect = (N - 2) * T != 0.0 ? std::fabs(c.defect) / ((N - 2) * T) : 0.0;
  c.beta_predicted = V != 0.0 ? (N - 2) * T / (-2.0 * N * V) : 0.0;
  return c;
}

}  // namespace symmin
