#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "symmin/geometry.hpp"

namespace symmin {

/// Grid-sampled vector field u : Omega -> R^m, extended by zero outside the
/// domain mask. Values are stored node-major: values[p*m + c].
struct Field {
  Grid grid;
  int m = 1;
  Vec values;

  Field() = default;
  Field(Grid g, int components)
      : grid(std::move(g)), m(components), values(grid.num_nodes() * components, 0.0) {
    if (m < 1) throw PreconditionError("field needs m >= 1 components");
  }

  double& at(std::size_t p, int c) { return values[p * m + c]; }
  double at(std::size_t p, int c) const { return values[p * m + c]; }

  /// Zeroes values at out-of-domain nodes (the class invariant).
  void apply_mask() {
    for (std::size_t p = 0; p < grid.num_nodes(); ++p)
      if (!grid.inside[p])
        for (int c = 0; c < m; ++c) values[p * m + c] = 0.0;
  }

  /// Multilinear interpolation with extension by zero outside the bounding box.
  double sample(const Vec& x, int c) const {
    const int N = grid.dim();
    double acc = 0.0;
    // Iterate the 2^N cell corners.
    std::vector<int> lo(N);
    Vec frac(N);
    for (int a = 0; a < N; ++a) {
      double s = (x[a] + grid.domain.bound(a)) / grid.h[a];
      if (s < -1.0 || s > grid.npts[a]) return 0.0;
      double fl = std::floor(s);
      lo[a] = (int)fl;
      frac[a] = s - fl;
    }
    const int corners = 1 << N;
    for (int mask = 0; mask < corners; ++mask) {
      double w = 1.0;
      std::size_t p = 0;
      bool valid = true;
      for (int a = 0; a < N; ++a) {
        int bit = (mask >> a) & 1;
        int idx = lo[a] + bit;
        w *= bit ? frac[a] : 1.0 - frac[a];
        if (idx < 0 || idx >= grid.npts[a]) {
          valid = false;  // zero extension
          break;
        }
        p = p * grid.npts[a] + idx;
      }
      // row-major index order must match Grid::node_index (axis 0 outermost)
      if (valid && w != 0.0) {
        // recompute p in canonical order
        std::size_t q = 0;
        for (int a = 0; a < N; ++a) {
          int bit = (mask >> a) & 1;
          q = q * grid.npts[a] + (lo[a] + bit);
        }
        acc += w * values[q * m + c];
      }
    }
    return acc;
  }

  void sample_all(const Vec& x, Vec& out) const {
    out.resize(m);
    for (int c = 0; c < m; ++c) out[c] = sample(x, c);
  }
};

namespace detail {

/// d/dx_a of component c at node p: second-order central in the interior,
/// second-order one-sided at bounding-box edges.
inline double derivative_at(const Field& u, std::size_t p, int a, int c,
                            const std::vector<int>& idx) {
  const Grid& g = u.grid;
  const double h = g.h[a];
  std::size_t stride = 1;
  for (int b = g.dim() - 1; b > a; --b) stride *= g.npts[b];
  const int i = idx[a];
  const int n = g.npts[a];
  auto val = [&](int j) { return u.values[(p + (std::size_t)(j - i) * stride) * u.m + c]; };
  if (i > 0 && i < n - 1) return (val(i + 1) - val(i - 1)) / (2.0 * h);
  if (i == 0) return (-3.0 * val(0) + 4.0 * val(1) - val(2)) / (2.0 * h);
  return (3.0 * val(n - 1) - 4.0 * val(n - 2) + val(n - 3)) / (2.0 * h);
}

/// Forward/backward divided differences of component c at node p along axis
/// a. At bounding-box edges both slots hold the second-order one-sided
/// estimate, so downstream averages stay O(h^2) there.
inline void half_differences(const Field& u, std::size_t p, int a, int c,
                             const std::vector<int>& idx, double& dplus,
                             double& dminus) {
  const Grid& g = u.grid;
  const double h = g.h[a];
  std::size_t stride = 1;
  for (int b = g.dim() - 1; b > a; --b) stride *= g.npts[b];
  const int i = idx[a];
  const int n = g.npts[a];
  auto val = [&](int j) { return u.values[(p + (std::size_t)(j - i) * stride) * u.m + c]; };
  if (i > 0 && i < n - 1) {
    dplus = (val(i + 1) - val(i)) / h;
    dminus = (val(i) - val(i - 1)) / h;
    return;
  }
  double d = (i == 0) ? (-3.0 * val(0) + 4.0 * val(1) - val(2)) / (2.0 * h)
                      : (3.0 * val(n - 1) - 4.0 * val(n - 2) + val(n - 3)) / (2.0 * h);
  dplus = dminus = d;
}

}  // namespace detail

/// Full Jacobian of u at node p, row-major J[c*N + a] = d u_c / d x_a.
inline void jacobian_at(const Field& u, std::size_t p, const std::vector<int>& idx,
                        Vec& J) {
  const int N = u.grid.dim();
  J.resize((std::size_t)u.m * N);
  for (int c = 0; c < u.m; ++c)
    for (int a = 0; a < N; ++a)
      J[(std::size_t)c * N + a] = detail::derivative_at(u, p, a, c, idx);
}

/// |grad u| as a scalar field: Frobenius norm of the full Jacobian
/// (reduces to |grad u| for m = 1). Each squared entry is the mean of the
/// squared forward and backward differences; for F = g^2/2 the adjoint of
/// this form is the compact 5/7-point Laplacian, so the discrete energy has
/// no spurious sub-lattice (checkerboard) null modes, while g itself stays
/// exact on affine fields and second-order accurate on smooth ones.
inline Field gradient_magnitude(const Field& u) {
  Field out(u.grid, 1);
  const int N = u.grid.dim();
  std::vector<int> idx(N);
  for (std::size_t p = 0; p < u.grid.num_nodes(); ++p) {
    if (!u.grid.inside[p]) continue;
    u.grid.node_multi_index(p, idx);
    double s = 0.0;
    for (int c = 0; c < u.m; ++c)
      for (int a = 0; a < N; ++a) {
        double dp, dm;
        detail::half_differences(u, p, a, c, idx, dp, dm);
        s += 0.5 * (dp * dp + dm * dm);
      }
    out.values[p] = std::sqrt(s);
  }
  return out;
}

enum class ReflectSide { plus, minus };

namespace detail {

/// Detects an axis-aligned plane whose mirror maps grid nodes to grid nodes.
/// Returns {axis, true} on success.
inline std::pair<int, bool> node_aligned_axis(const Grid& g, const Hyperplane& H) {
  const int N = g.dim();
  int axis = -1;
  for (int a = 0; a < N; ++a) {
    if (std::fabs(std::fabs(H.normal[a]) - 1.0) <= 1e-12) {
      axis = a;
    } else if (std::fabs(H.normal[a]) > 1e-12) {
      return {-1, false};
    }
  }
  if (axis < 0) return {-1, false};
  // mirror of node x is 2 t' - x where t' = offset * normal[axis]
  double tphys = H.offset * H.normal[axis];
  double k = 2.0 * (tphys + g.domain.bound(axis)) / g.h[axis];
  if (std::fabs(k - std::round(k)) > 1e-9) return {-1, false};
  return {axis, true};
}

}  // namespace detail

/// Reflection (1): keeps u on the chosen closed half-space and replaces the
/// other side by the mirrored values. `clip_tol` bounds the fraction of kept
/// |u|-mass whose mirror image would land outside the box.
inline Field reflect_field(const Field& u, const Hyperplane& H, ReflectSide side,
                           double clip_tol = 1e-9) {
  const Grid& g = u.grid;
  const int N = g.dim();
  if ((int)H.normal.size() != N) throw GridMismatch("hyperplane dimension != field dimension");
  if (g.domain.rotation_invariant() && std::fabs(H.offset) > 1e-12)
    throw OriginRequired("ball/annulus domains require hyperplanes through the origin");
  const double sgn = (side == ReflectSide::plus) ? 1.0 : -1.0;

  Field out(g, u.m);
  Vec x(N);

  auto [axis, aligned] = detail::node_aligned_axis(g, H);
  if (aligned) {
    // Exact index-permutation path.
    double tphys = H.offset * H.normal[axis];
    std::vector<int> idx(N);
    double clipped = 0.0, kept = 0.0;
    for (std::size_t p = 0; p < g.num_nodes(); ++p) {
      g.node_multi_index(p, idx);
      double xa = g.coord(axis, idx[axis]);
      double d = (xa - tphys) * H.normal[axis];
      std::vector<int> src = idx;
      if (sgn * d < 0.0) {
        double mir = 2.0 * tphys - xa;
        int j = (int)std::llround((mir + g.domain.bound(axis)) / g.h[axis]);
        if (j < 0 || j >= g.npts[axis]) {
          for (int c = 0; c < u.m; ++c) out.values[p * u.m + c] = 0.0;
          continue;
        }
        src[axis] = j;
      } else {
        // kept side: does its mirror stay inside the box?
        double mir = 2.0 * tphys - xa;
        if (mir < -g.domain.bound(axis) - 1e-12 || mir > g.domain.bound(axis) + 1e-12)
          for (int c = 0; c < u.m; ++c) clipped += std::fabs(u.at(p, c));
        for (int c = 0; c < u.m; ++c) kept += std::fabs(u.at(p, c));
      }
      std::size_t q = g.node_index(src);
      for (int c = 0; c < u.m; ++c) out.values[p * u.m + c] = u.values[q * u.m + c];
    }
    if (g.domain.kind == DomainKind::box && kept > 0.0 && clipped / kept > clip_tol)
      throw SupportClipped("reflected support exceeds box; clipped mass fraction " +
                           std::to_string(clipped / kept));
    out.apply_mask();
    return out;
  }

  double clipped = 0.0, kept = 0.0;
  for (std::size_t p = 0; p < g.num_nodes(); ++p) {
    g.coords(p, x);
    double d = H.signed_distance(x);
    if (sgn * d >= 0.0) {
      for (int c = 0; c < u.m; ++c) {
        out.values[p * u.m + c] = u.values[p * u.m + c];
        kept += std::fabs(u.values[p * u.m + c]);
      }
      if (g.domain.kind == DomainKind::box) {
        Vec mir = reflect_point(x, H);
        bool in = true;
        for (int a = 0; a < N; ++a)
          if (std::fabs(mir[a]) > g.domain.bound(a) + 1e-12) in = false;
        if (!in)
          for (int c = 0; c < u.m; ++c) clipped += std::fabs(u.values[p * u.m + c]);
      }
    } else {
      Vec mir = reflect_point(x, H);
      for (int c = 0; c < u.m; ++c) out.values[p * u.m + c] = u.sample(mir, c);
    }
  }
  if (g.domain.kind == DomainKind::box && kept > 0.0 && clipped / kept > clip_tol)
    throw SupportClipped("reflected support exceeds box; clipped mass fraction " +
                         std::to_string(clipped / kept));
  out.apply_mask();
  return out;
}

}  // namespace symmin
