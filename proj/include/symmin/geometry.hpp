#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "symmin/errors.hpp"
#include "symmin/linalg.hpp"

namespace symmin {

enum class DomainKind { ball, annulus, box };

/// Rotation-invariant domain centered at the origin (ball/annulus) or an
/// origin-symmetric axis-aligned box truncating R^N.
struct Domain {
  DomainKind kind = DomainKind::box;
  int dim = 1;
  double inner_radius = 0.0;   // annulus only
  double outer_radius = 1.0;   // ball / annulus
  Vec half_extent;             // box only, per axis

  static Domain ball(int N, double R) {
    Domain d;
    d.kind = DomainKind::ball;
    d.dim = N;
    d.outer_radius = R;
    return d;
  }
  static Domain annulus(int N, double r0, double r1) {
    if (!(r0 < r1)) throw PreconditionError("annulus needs inner < outer radius");
    Domain d;
    d.kind = DomainKind::annulus;
    d.dim = N;
    d.inner_radius = r0;
    d.outer_radius = r1;
    return d;
  }
  static Domain box(int N, Vec half) {
    Domain d;
    d.kind = DomainKind::box;
    d.dim = N;
    if ((int)half.size() == 1 && N > 1) half.assign(N, half[0]);
    if ((int)half.size() != N) throw PreconditionError("box half_extent size != N");
    d.half_extent = std::move(half);
    return d;
  }
  static Domain box(int N, double half) { return box(N, Vec{half}); }

  bool rotation_invariant() const { return kind != DomainKind::box; }

  double bound(int axis) const {
    return kind == DomainKind::box ? half_extent[axis] : outer_radius;
  }

  bool contains(const Vec& x) const {
    if (kind == DomainKind::box) {
      for (int a = 0; a < dim; ++a)
        if (std::fabs(x[a]) > half_extent[a]) return false;
      return true;
    }
    double r = norm2(x);
    if (kind == DomainKind::ball) return r <= outer_radius;
    return r >= inner_radius && r <= outer_radius;
  }
};

/// Uniform tensor grid over the domain's bounding box. Node a-coordinate is
/// -bound(a) + i*h[a], so the node set is symmetric about the origin.
struct Grid {
  Domain domain;
  std::vector<int> npts;   // per axis, each >= 3
  Vec h;                   // per-axis spacing
  std::vector<uint8_t> inside;  // node mask, row-major (last axis fastest)
  Vec weights;                  // cached trapezoid quadrature weight per node
  Vec radius;                   // cached |x| per node

  Grid() = default;
  Grid(Domain dom, std::vector<int> counts) : domain(std::move(dom)) {
    const int N = domain.dim;
    if ((int)counts.size() == 1 && N > 1) counts.assign(N, counts[0]);
    if ((int)counts.size() != N) throw PreconditionError("npts size != N");
    for (int c : counts)
      if (c < 3) throw PreconditionError("grid needs >= 3 points per axis");
    npts = std::move(counts);
    h.resize(N);
    for (int a = 0; a < N; ++a) h[a] = 2.0 * domain.bound(a) / (npts[a] - 1);
    inside.resize(num_nodes());
    weights.resize(num_nodes());
    radius.resize(num_nodes());
    Vec x(N);
    for (std::size_t p = 0; p < inside.size(); ++p) {
      coords(p, x);
      inside[p] = domain.contains(x) ? 1 : 0;
      weights[p] = raw_weight(p);
      radius[p] = norm2(x);
    }
  }
  Grid(Domain dom, int count) : Grid(std::move(dom), std::vector<int>{count}) {}

  int dim() const { return domain.dim; }

  std::size_t num_nodes() const {
    std::size_t n = 1;
    for (int c : npts) n *= (std::size_t)c;
    return n;
  }

  double coord(int axis, int index) const {
    return -domain.bound(axis) + h[axis] * index;
  }

  void coords(std::size_t p, Vec& x) const {
    for (int a = dim() - 1; a >= 0; --a) {
      int n = npts[a];
      x[a] = coord(a, (int)(p % n));
      p /= n;
    }
  }

  std::size_t node_index(const std::vector<int>& idx) const {
    std::size_t p = 0;
    for (int a = 0; a < dim(); ++a) p = p * npts[a] + idx[a];
    return p;
  }

  void node_multi_index(std::size_t p, std::vector<int>& idx) const {
    idx.resize(dim());
    for (int a = dim() - 1; a >= 0; --a) {
      idx[a] = (int)(p % npts[a]);
      p /= npts[a];
    }
  }

  /// Trapezoid quadrature weight of node p (product of per-axis weights,
  /// halved at bounding-box edges), zero outside the domain mask.
  double quad_weight(std::size_t p) const { return weights[p]; }

 private:
  double raw_weight(std::size_t p) const {
    if (!inside[p]) return 0.0;
    double w = 1.0;
    std::size_t q = p;
    for (int a = dim() - 1; a >= 0; --a) {
      int i = (int)(q % npts[a]);
      q /= npts[a];
      w *= (i == 0 || i == npts[a] - 1) ? 0.5 * h[a] : h[a];
    }
    return w;
  }

 public:

  bool same_layout(const Grid& o) const {
    return domain.kind == o.domain.kind && domain.dim == o.domain.dim &&
           npts == o.npts && h == o.h;
  }
};

/// Affine hyperplane {x : (x - t v).v = 0} with unit normal v. The positive
/// side is {x.v > t}.
struct Hyperplane {
  Vec normal;
  double offset = 0.0;

  Hyperplane() = default;
  Hyperplane(Vec v, double t) : normal(std::move(v)), offset(t) {
    double n = norm2(normal);
    if (std::fabs(n - 1.0) > 1e-12)
      throw PreconditionError("hyperplane normal must be unit length");
  }

  double signed_distance(const Vec& x) const { return dot(x, normal) - offset; }

  Hyperplane flipped() const {
    Hyperplane f;
    f.normal = normal;
    for (double& c : f.normal) c = -c;
    f.offset = -offset;
    return f;
  }
};

/// Affine subspace: base point plus orthonormal basis (d = 0 is a point).
struct AffineSubspace {
  Vec base;
  std::vector<Vec> basis;

  AffineSubspace() = default;
  AffineSubspace(Vec b, std::vector<Vec> B) : base(std::move(b)), basis(std::move(B)) {
    for (std::size_t i = 0; i < basis.size(); ++i)
      for (std::size_t j = 0; j <= i; ++j) {
        double g = dot(basis[i], basis[j]);
        double want = (i == j) ? 1.0 : 0.0;
        if (std::fabs(g - want) > 1e-12)
          throw PreconditionError("affine subspace basis not orthonormal");
      }
  }

  static AffineSubspace point(Vec p) { return AffineSubspace(std::move(p), {}); }

  int dim() const { return (int)basis.size(); }
  int ambient_dim() const { return (int)base.size(); }
};

inline Vec project_point(const Vec& x, const AffineSubspace& V) {
  Vec p = V.base;
  Vec d = x - V.base;
  for (const Vec& b : V.basis) axpy(dot(d, b), b, p);
  return p;
}

inline Vec reflect_point(const Vec& x, const Hyperplane& H) {
  double d = H.signed_distance(x);
  Vec y = x;
  axpy(-2.0 * d, H.normal, y);
  return y;
}

inline Vec reflect_point(const Vec& x, const AffineSubspace& V) {
  Vec p = project_point(x, V);
  Vec y = 2.0 * p;
  for (std::size_t i = 0; i < y.size(); ++i) y[i] -= x[i];
  return y;
}

namespace detail {

/// Deterministic quasi-uniform points on the unit sphere S^{c-1}.
/// c = 1: {+1,-1}; c = 2: uniform angles; c = 3: Fibonacci spiral;
/// c >= 4: normalized low-discrepancy (Halton-box-Muller) samples.
inline std::vector<Vec> unit_sphere_points(int c, int n) {
  std::vector<Vec> pts;
  pts.reserve(n);
  if (c == 1) {
    for (int i = 0; i < n; ++i) pts.push_back(Vec{i % 2 == 0 ? 1.0 : -1.0});
    return pts;
  }
  if (c == 2) {
    for (int i = 0; i < n; ++i) {
      double th = 2.0 * std::numbers::pi * i / n;
      pts.push_back(Vec{std::cos(th), std::sin(th)});
    }
    return pts;
  }
  if (c == 3) {
    const double ga = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < n; ++i) {
      double z = 1.0 - 2.0 * (i + 0.5) / n;
      double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
      double th = ga * i;
      pts.push_back(Vec{rho * std::cos(th), rho * std::sin(th), z});
    }
    return pts;
  }
  // Halton sequence mapped through inverse-normal-free Box-Muller pairs.
  auto halton = [](int index, int base) {
    double f = 1.0, r = 0.0;
    while (index > 0) {
      f /= base;
      r += f * (index % base);
      index /= base;
    }
    return r;
  };
  static const int primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29};
  for (int i = 0; i < n; ++i) {
    Vec v(c);
    for (int a = 0; a < c; a += 2) {
      double u1 = std::max(halton(i + 1, primes[a % 10]), 1e-12);
      double u2 = halton(i + 1, primes[(a + 1) % 10]);
      double rad = std::sqrt(-2.0 * std::log(u1));
      v[a] = rad * std::cos(2.0 * std::numbers::pi * u2);
      if (a + 1 < c) v[a + 1] = rad * std::sin(2.0 * std::numbers::pi * u2);
    }
    pts.push_back(normalized(std::move(v)));
  }
  return pts;
}

}  // namespace detail

/// Points on the orbit of x under rotations about V: the sphere of radius
/// |x - p_V(x)| in the slice through p_V(x) orthogonal to V.
inline std::vector<Vec> orbit_samples(const Vec& x, const AffineSubspace& V, int n) {
  if (n < 1) throw PreconditionError("orbit_samples needs n >= 1");
  const int N = V.ambient_dim();
  const int codim = N - V.dim();
  if (codim < 1) throw PreconditionError("orbit_samples needs dim(V) <= N-1");
  Vec p = project_point(x, V);
  Vec d = x - p;
  double rad = norm2(d);
  if (rad == 0.0) return std::vector<Vec>((std::size_t)n, x);
  std::vector<Vec> normal_basis = orthonormal_complement(V.basis, N);
  std::vector<Vec> sphere = detail::unit_sphere_points(codim, n);
  std::vector<Vec> out;
  out.reserve(n);
  for (const Vec& s : sphere) {
    Vec y = p;
    for (int a = 0; a < codim; ++a) axpy(rad * s[a], normal_basis[a], y);
    out.push_back(std::move(y));
  }
  return out;
}

}  // namespace symmin
