#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "symmin/errors.hpp"
#include "symmin/linalg.hpp"

namespace symmin {

/// Adaptive Dormand-Prince 5(4) integrator. Accepted steps are reported to an
/// optional observer, which may stop the integration early.
struct OdeOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  double h_init = 1e-4;
  double h_min = 1e-14;
  double h_max = 0.1;
  long max_steps = 2000000;
};

struct OdeStatus {
  double t_final = 0.0;
  Vec y_final;
  long steps = 0;
  bool stopped_by_observer = false;
};

inline OdeStatus integrate_rk45(
    const std::function<void(double, const Vec&, Vec&)>& rhs, double t0,
    Vec y0, double t_end,
    const std::function<bool(double, const Vec&)>& observer = {},
    const OdeOptions& opts = {}) {
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                          a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                          a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;

  const std::size_t n = y0.size();
  Vec k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n);
  double t = t0;
  double h = std::min(opts.h_init, opts.h_max);
  OdeStatus st;
  rhs(t, y0, k1);
  if (observer && observer(t, y0)) {
    st.t_final = t;
    st.y_final = std::move(y0);
    st.stopped_by_observer = true;
    return st;
  }
  while (t < t_end) {
    if (t + h > t_end) h = t_end - t;
    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y0[i] + h * a21 * k1[i];
    rhs(t + c2 * h, ytmp, k2);
    for (std::size_t i = 0; i < n; ++i)
      ytmp[i] = y0[i] + h * (a31 * k1[i] + a32 * k2[i]);
    rhs(t + c3 * h, ytmp, k3);
    for (std::size_t i = 0; i < n; ++i)
      ytmp[i] = y0[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    rhs(t + c4 * h, ytmp, k4);
    for (std::size_t i = 0; i < n; ++i)
      ytmp[i] = y0[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    rhs(t + c5 * h, ytmp, k5);
    for (std::size_t i = 0; i < n; ++i)
      ytmp[i] = y0[i] +
                h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] +
                     a65 * k5[i]);
    rhs(t + h, ytmp, k6);
    for (std::size_t i = 0; i < n; ++i)
      ynew[i] = y0[i] +
                h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    rhs(t + h, ynew, k7);

    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                      e6 * k6[i] + e7 * k7[i]);
      double sc = opts.atol + opts.rtol * std::max(std::fabs(y0[i]), std::fabs(ynew[i]));
      err = std::max(err, std::fabs(e) / sc);
    }
    if (err <= 1.0) {
      t += h;
      y0 = ynew;
      k1 = k7;  // FSAL
      if (observer && observer(t, y0)) {
        st.stopped_by_observer = true;
        break;
      }
    }
    double fac = 0.9 * std::pow(std::max(err, 1e-16), -0.2);
    h *= std::min(5.0, std::max(0.2, fac));
    h = std::min(h, opts.h_max);
    if (h < opts.h_min) throw NotConverged("ode step size underflow");
    if (++st.steps > opts.max_steps) throw NotConverged("ode step budget exceeded");
  }
  st.t_final = t;
  st.y_final = std::move(y0);
  return st;
}

}  // namespace symmin
