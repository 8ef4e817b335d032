#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <ostream>
#include <random>
#include <vector>

#include "symmin/functional.hpp"

namespace symmin {

struct MinimizeOptions {
  double constraint_tol = 1e-8;   // relative, per constraint
  double kkt_tol = 1e-6;          // relative
  int max_outer = 50;
  double penalty_growth = 10.0;
  int inner_cap = 2000;
  unsigned long seed = 0;
  double initial_penalty = 10.0;
  int lbfgs_memory = 8;
  Vec initial_multipliers;  // empty = zeros; warm-start via fit_multipliers
  std::ostream* progress = nullptr;  // line-delimited JSON records
};

struct MinimizeResult {
  Field u;
  double E = 0.0;
  Vec Q;
  Vec multipliers;
  double kkt = 0.0;
  int iterations = 0;       // total inner iterations
  int outer_iterations = 0;
  bool converged = false;
  double support_margin = 0.0;  // box fraction beyond the 1e-6 level set
  double max_second_difference = 0.0;  // discrete smoothness proxy
};

namespace detail {

/// Free degrees of freedom: values at in-domain nodes.
struct DofMap {
  std::vector<std::size_t> nodes;  // in-domain node indices
  int m;

  DofMap(const Grid& g, int components) : m(components) {
    for (std::size_t p = 0; p < g.num_nodes(); ++p)
      if (g.inside[p]) nodes.push_back(p);
  }
  std::size_t size() const { return nodes.size() * (std::size_t)m; }
  void gather(const Field& u, Vec& x) const {
    x.resize(size());
    std::size_t i = 0;
    for (std::size_t p : nodes)
      for (int c = 0; c < m; ++c) x[i++] = u.at(p, c);
  }
  void scatter(const Vec& x, Field& u) const {
    std::size_t i = 0;
    for (std::size_t p : nodes)
      for (int c = 0; c < m; ++c) u.at(p, c) = x[i++];
  }
};

/// Augmented-Lagrangian merit and its raw gradient in dof space.
struct AugLag {
  const VariationalProblem& P;
  const DofMap& dofs;
  Vec alpha;
  double mu;

  double value_and_gradient(const Field& u, Vec& grad_out, Vec* c_out = nullptr) const {
    Field gmag = gradient_magnitude(u);
    double E = detail::integrate(P, u, P.compiled_F, gmag);
    Vec c(P.k());
    for (int j = 0; j < P.k(); ++j)
      c[j] = detail::integrate(P, u, P.compiled_G[j], gmag) - P.densities.lambda[j];
    Field gE = detail::raw_gradient(P, u, P.compiled_F, gmag);
    double L = E;
    for (int j = 0; j < P.k(); ++j) {
      L += alpha[j] * c[j] + 0.5 * mu * c[j] * c[j];
      double w = alpha[j] + mu * c[j];
      if (w != 0.0) {
        Field gQ = detail::raw_gradient(P, u, P.compiled_G[j], gmag);
        for (std::size_t i = 0; i < gE.values.size(); ++i)
          gE.values[i] += w * gQ.values[i];
      }
    }
    dofs.gather(gE, grad_out);
    if (c_out) *c_out = c;
    return L;
  }

  double value(const Field& u, Vec* c_out = nullptr) const {
    Field gmag = gradient_magnitude(u);
    double E = detail::integrate(P, u, P.compiled_F, gmag);
    Vec c(P.k());
    double L = E;
    for (int j = 0; j < P.k(); ++j) {
      c[j] = detail::integrate(P, u, P.compiled_G[j], gmag) - P.densities.lambda[j];
      L += alpha[j] * c[j] + 0.5 * mu * c[j] * c[j];
    }
    if (c_out) *c_out = c;
    return L;
  }
};

/// L-BFGS with Armijo backtracking on the augmented Lagrangian.
/// Returns the number of iterations used.
inline int lbfgs_minimize(const AugLag& L, const DofMap& dofs, Field& u,
                          double grad_tol, int max_iter, int memory,
                          double* final_gnorm = nullptr) {
  Vec x;
  dofs.gather(u, x);
  Vec g;
  double fx = L.value_and_gradient(u, g);
  std::deque<Vec> S, Y;
  std::deque<double> rho;
  int it = 0;
  double gnorm = norm2(g);
  Vec d, xnew, gnew;
  Field utrial = u;
  while (it < max_iter && gnorm > grad_tol) {
    // two-loop recursion
    d = g;
    std::vector<double> a(S.size());
    for (std::size_t i = S.size(); i-- > 0;) {
      a[i] = rho[i] * dot(S[i], d);
      axpy(-a[i], Y[i], d);
    }
    if (!S.empty()) {
      double gamma = dot(S.back(), Y.back()) / dot(Y.back(), Y.back());
      for (double& v : d) v *= gamma;
    }
    for (std::size_t i = 0; i < S.size(); ++i) {
      double b = rho[i] * dot(Y[i], d);
      axpy(a[i] - b, S[i], d);
    }
    for (double& v : d) v = -v;
    double dir = dot(d, g);
    if (dir >= 0.0) {  // not a descent direction: steepest descent restart
      S.clear(); Y.clear(); rho.clear();
      d = g;
      for (double& v : d) v = -v;
      dir = -dot(g, g);
    }
    double step = S.empty() ? std::min(1.0, 1.0 / std::max(1.0, gnorm)) : 1.0;
    double fnew = fx;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      xnew = x;
      axpy(step, d, xnew);
      dofs.scatter(xnew, utrial);
      fnew = L.value(utrial);
      if (fnew <= fx + 1e-4 * step * dir) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    dofs.scatter(xnew, utrial);
    gnew.clear();
    double fchk = L.value_and_gradient(utrial, gnew);
    (void)fchk;
    Vec s = xnew - x;
    Vec yv = gnew - g;
    double sy = dot(s, yv);
    if (sy > 1e-12 * norm2(s) * norm2(yv)) {
      S.push_back(std::move(s));
      Y.push_back(std::move(yv));
      rho.push_back(1.0 / sy);
      if ((int)S.size() > memory) {
        S.pop_front(); Y.pop_front(); rho.pop_front();
      }
    }
    x = std::move(xnew);
    g = std::move(gnew);
    fx = fnew;
    gnorm = norm2(g);
    ++it;
  }
  dofs.scatter(x, u);
  // Merit-decreasing truncation move: compact-support problems are flat on
  // the negative range of a component, where stray sign-flipped tails can
  // stall; accept the clipped iterate only on strict merit decrease.
  {
    Field clipped = u;
    bool changed = false;
    for (double& v : clipped.values)
      if (v < 0.0) { v = 0.0; changed = true; }
    if (changed && L.value(clipped) < fx) {
      u = clipped;
      dofs.gather(u, x);
    } else {
      dofs.scatter(x, u);
    }
  }
  if (final_gnorm) *final_gnorm = gnorm;
  return it;
}

inline double kkt_residual(const VariationalProblem& P, const Field& u,
                           const Vec& alpha) {
  FirstVariation fv = first_variation(P, u);
  Field res = fv.gradE;
  for (int j = 0; j < P.k(); ++j)
    for (std::size_t i = 0; i < res.values.size(); ++i)
      res.values[i] += alpha[j] * fv.gradQ[j].values[i];
  double nE = std::sqrt(weighted_dot(P.grid, fv.gradE, fv.gradE));
  double nR = std::sqrt(weighted_dot(P.grid, res, res));
  return nR / std::max(1.0, nE);
}

inline double support_margin(const Field& u) {
  const Grid& g = u.grid;
  const int N = g.dim();
  Vec x(N);
  double worst = 0.0;
  for (std::size_t p = 0; p < g.num_nodes(); ++p) {
    bool live = false;
    for (int c = 0; c < u.m; ++c) live = live || std::fabs(u.at(p, c)) > 1e-6;
    if (!live) continue;
    g.coords(p, x);
    for (int a = 0; a < N; ++a)
      worst = std::max(worst, std::fabs(x[a]) / g.domain.bound(a));
  }
  return 1.0 - worst;
}

inline double max_second_difference(const Field& u) {
  const Grid& g = u.grid;
  const int N = g.dim();
  double mx = 0.0;
  std::vector<int> idx(N);
  for (std::size_t p = 0; p < g.num_nodes(); ++p) {
    if (!g.inside[p]) continue;
    g.node_multi_index(p, idx);
    for (int a = 0; a < N; ++a) {
      if (idx[a] == 0 || idx[a] == g.npts[a] - 1) continue;
      std::size_t stride = 1;
      for (int b = N - 1; b > a; --b) stride *= g.npts[b];
      for (int c = 0; c < u.m; ++c) {
        double d2 = u.at(p + stride, c) - 2.0 * u.at(p, c) + u.at(p - stride, c);
        mx = std::max(mx, std::fabs(d2));
      }
    }
  }
  return mx;
}

}  // namespace detail

inline MinimizeResult minimize(const VariationalProblem& P, const Field& init,
                               const MinimizeOptions& opts = {}) {
  detail::check_grid(P, init);
  detail::DofMap dofs(P.grid, P.m);
  Field u = init;
  u.apply_mask();

  const int k = P.k();
  Vec alpha0(k, 0.0);
  if (!opts.initial_multipliers.empty()) {
    if ((int)opts.initial_multipliers.size() != k)
      throw PreconditionError("initial_multipliers size != constraint count");
    alpha0 = opts.initial_multipliers;
  }
  detail::AugLag L{P, dofs, alpha0, opts.initial_penalty};
  double omega = 1e-2;         // inner gradient tolerance (scaled below)
  double eta = 1e-2;           // constraint progress threshold
  MinimizeResult result;
  result.u = u;
  int total_inner = 0;
  bool converged = false;
  int outer = 0;

  // gradient scale for the inner stopping rule
  Vec g0;
  L.value_and_gradient(u, g0);
  double gscale = std::max(1.0, norm2(g0));

  for (outer = 0; outer < opts.max_outer; ++outer) {
    double gnorm = 0.0;
    total_inner += detail::lbfgs_minimize(L, dofs, u, omega * gscale,
                                          opts.inner_cap, opts.lbfgs_memory, &gnorm);
    Vec c;
    L.value(u, &c);
    double crel = 0.0;
    for (int j = 0; j < k; ++j)
      crel = std::max(crel, std::fabs(c[j]) /
                                std::max(1.0, std::fabs(P.densities.lambda[j])));
    // first-order multiplier estimate alpha + mu c is the one the KKT test
    // should see; the update itself happens only on constraint progress
    Vec alpha_trial = L.alpha;
    for (int j = 0; j < k; ++j) alpha_trial[j] += L.mu * c[j];
    double kkt = k > 0 ? detail::kkt_residual(P, u, alpha_trial) : gnorm / gscale;
    if (opts.progress) {
      *opts.progress << "{\"outer\":" << outer << ",\"inner_total\":" << total_inner
                     << ",\"constraint_violation\":" << crel << ",\"kkt\":" << kkt
                     << ",\"penalty\":" << L.mu << "}\n";
    }
    if (crel <= std::max(eta, opts.constraint_tol)) {
      L.alpha = alpha_trial;
      if (crel <= opts.constraint_tol && kkt <= opts.kkt_tol) {
        converged = true;
        ++outer;
        break;
      }
      eta = std::max(eta * 0.2, opts.constraint_tol);
      omega = std::max(omega * 0.3, opts.kkt_tol * 1e-2);
    } else {
      L.mu *= opts.penalty_growth;
      omega = std::max(omega * 0.5, opts.kkt_tol * 1e-2);
    }
    if (!std::isfinite(L.value(u)))
      throw DivergentPenalty("merit became non-finite; the energy may be "
                             "unbounded below along feasible directions");
  }

  result.u = u;
  Field gmag = gradient_magnitude(u);
  result.E = detail::integrate(P, u, P.compiled_F, gmag);
  result.Q.resize(k);
  for (int j = 0; j < k; ++j)
    result.Q[j] = detail::integrate(P, u, P.compiled_G[j], gmag);
  result.multipliers = L.alpha;
  result.kkt = k > 0 ? detail::kkt_residual(P, u, L.alpha) : 0.0;
  result.iterations = total_inner;
  result.outer_iterations = outer;
  result.converged = converged;
  result.support_margin = detail::support_margin(u);
  result.max_second_difference = detail::max_second_difference(u);
  return result;
}

/// Newton correction in the span of the constraint gradients until all
/// constraints hold to tolerance; minimal-norm in the quadrature metric.
inline Field restore_constraints(const VariationalProblem& P, const Field& u0,
                                 double tol = 1e-8, int max_steps = 20) {
  if (P.k() < 1) throw PreconditionError("restore_constraints needs k >= 1");
  Field u = u0;
  const int k = P.k();
  for (int step = 0; step < max_steps; ++step) {
    Vec q = constraints(P, u);
    double crel = 0.0;
    for (int j = 0; j < k; ++j)
      crel = std::max(crel, std::fabs(q[j] - P.densities.lambda[j]) /
                                std::max(1.0, std::fabs(P.densities.lambda[j])));
    if (crel <= tol) return u;
    FirstVariation fv = first_variation(P, u);
    std::vector<Vec> G(k, Vec(k, 0.0));
    Vec rhs(k);
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j <= i; ++j)
        G[i][j] = G[j][i] = detail::weighted_dot(P.grid, fv.gradQ[i], fv.gradQ[j]);
      rhs[i] = P.densities.lambda[i] - q[i];
    }
    Vec d = solve_dense(G, rhs);  // throws DegenerateGram when dependent
    for (int j = 0; j < k; ++j)
      for (std::size_t i = 0; i < u.values.size(); ++i)
        u.values[i] += d[j] * fv.gradQ[j].values[i];
    u.apply_mask();
  }
  throw NotConverged("constraint restoration did not reach tolerance");
}

/// Deterministic random bump initialization for multi-start runs.
inline Field random_bump_field(const Grid& g, int m, unsigned long seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-0.5, 0.5);
  std::uniform_real_distribution<double> amp(0.5, 2.0);
  Field u(g, m);
  const int N = g.dim();
  Vec center(N), x(N);
  for (int c = 0; c < m; ++c) {
    for (int a = 0; a < N; ++a) center[a] = unif(rng) * g.domain.bound(a);
    double A = amp(rng) * (rng() % 2 == 0 ? 1.0 : -1.0);
    double width = 0.25 * g.domain.bound(0) * amp(rng);
    for (std::size_t p = 0; p < g.num_nodes(); ++p) {
      g.coords(p, x);
      double r2 = 0.0;
      for (int a = 0; a < N; ++a) r2 += (x[a] - center[a]) * (x[a] - center[a]);
      u.at(p, c) += A * std::exp(-r2 / (2.0 * width * width));
    }
  }
  u.apply_mask();
  return u;
}

/// Rotation/translation-invariant fingerprint: radial moments of |u| about
/// its centroid, used to deduplicate symmetric copies of the same minimizer.
inline Vec symmetry_fingerprint(const Field& u) {
  const Grid& g = u.grid;
  const int N = g.dim();
  Vec x(N), centroid(N, 0.0);
  double mass = 0.0;
  for (std::size_t p = 0; p < g.num_nodes(); ++p) {
    double w = g.quad_weight(p);
    if (w == 0.0) continue;
    double a = 0.0;
    for (int c = 0; c < u.m; ++c) a += std::fabs(u.at(p, c));
    g.coords(p, x);
    mass += w * a;
    for (int d = 0; d < N; ++d) centroid[d] += w * a * x[d];
  }
  if (mass > 0.0)
    for (int d = 0; d < N; ++d) centroid[d] /= mass;
  Vec moments(4, 0.0);
  moments[0] = mass;
  for (std::size_t p = 0; p < g.num_nodes(); ++p) {
    double w = g.quad_weight(p);
    if (w == 0.0) continue;
    double a = 0.0;
    for (int c = 0; c < u.m; ++c) a += std::fabs(u.at(p, c));
    g.coords(p, x);
    double r = 0.0;
    for (int d = 0; d < N; ++d) r += (x[d] - centroid[d]) * (x[d] - centroid[d]);
    r = std::sqrt(r);
    double rp = r;
    for (int q = 1; q <= 3; ++q) {
      moments[q] += w * a * rp;
      rp *= r;
    }
  }
  for (int q = 1; q <= 3; ++q)
    moments[q] = mass > 0.0 ? std::pow(moments[q] / mass, 1.0 / q) : 0.0;
  return moments;
}

/// Independent seeded runs, sorted by energy and deduplicated by energy plus
/// the symmetry-invariant fingerprint.
inline std::vector<MinimizeResult> multi_start(const VariationalProblem& P,
                                               const MinimizeOptions& opts,
                                               int n_starts) {
  if (n_starts < 1) throw PreconditionError("multi_start needs n_starts >= 1");
  std::vector<MinimizeResult> runs;
  for (int i = 0; i < n_starts; ++i) {
    MinimizeOptions o = opts;
    o.seed = opts.seed + (unsigned long)i;
    Field init = random_bump_field(P.grid, P.m, o.seed * 2654435761UL + 1);
    try {
      runs.push_back(minimize(P, init, o));
    } catch (const Error&) {
      // per-run failures are dropped from the list
    }
  }
  std::sort(runs.begin(), runs.end(),
            [](const MinimizeResult& a, const MinimizeResult& b) { return a.E < b.E; });
  std::vector<MinimizeResult> unique;
  std::vector<Vec> prints;
  for (auto& r : runs) {
    Vec fp = symmetry_fingerprint(r.u);
    bool dup = false;
    for (std::size_t i = 0; i < unique.size(); ++i) {
      if (std::fabs(unique[i].E - r.E) > 1e-6 * std::max(1.0, std::fabs(r.E)))
        continue;
      double dist = 0.0;
      for (std::size_t j = 0; j < fp.size(); ++j)
        dist = std::max(dist, std::fabs(fp[j] - prints[i][j]) /
                                  std::max(1.0, std::fabs(prints[i][j])));
      if (dist <= 1e-3) { dup = true; break; }
    }
    if (!dup) {
      prints.push_back(fp);
      unique.push_back(std::move(r));
    }
  }
  return unique;
}

}  // namespace symmin
