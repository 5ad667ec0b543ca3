#pragma once

// Embedded Dormand-Prince 5(4) integrator over fixed-size Eigen states.

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Core>

#include "reeb/error.hpp"

namespace reeb {

struct OdeOptions {
  double atol = 1e-10;
  double rtol = 1e-10;
  double h_max = std::numeric_limits<double>::infinity();
  double h_min = 1e-14;
  long max_steps = 10'000'000;
};

/// Integrates y' = f(y) from t0 to t1 (either direction). `post` runs on every
/// accepted state, e.g. to project back onto an invariant manifold. `h` carries
/// the step size between calls; pass 0 to let the integrator pick one.
template <int Dim, typename Rhs, typename Post>
Eigen::Matrix<double, Dim, 1> integrate_dp45(Rhs&& f, Eigen::Matrix<double, Dim, 1> y, double t0,
                                              double t1, const OdeOptions& opt, Post&& post,
                                              double& h) {
  using Vec = Eigen::Matrix<double, Dim, 1>;
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                   a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                   a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                   b6 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                   e6 = 22.0 / 525, e7 = -1.0 / 40;
  (void)c2, (void)c3, (void)c4, (void)c5;

  const double span = t1 - t0;
  if (span == 0.0) return y;
  const double dir = span > 0 ? 1.0 : -1.0;
  double t = t0;
  double step = std::abs(h) > 0 ? std::abs(h) : std::min(1e-2 * std::abs(span), opt.h_max);
  step = std::min(step, opt.h_max);

  Vec k1 = f(y);
  long steps = 0;
  while (dir * (t1 - t) > 0) {
    if (++steps > opt.max_steps) throw ConvergenceError("integrator: step budget exhausted");
    bool last = false;
    const double proposed = step;
    if (step >= std::abs(t1 - t)) {
      step = std::abs(t1 - t);
      last = true;
    }
    const double hs = dir * step;
    const Vec k2 = f((y + hs * a21 * k1).eval());
    const Vec k3 = f((y + hs * (a31 * k1 + a32 * k2)).eval());
    const Vec k4 = f((y + hs * (a41 * k1 + a42 * k2 + a43 * k3)).eval());
    const Vec k5 = f((y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4)).eval());
    const Vec k6 = f((y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5)).eval());
    const Vec y5 = y + hs * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const Vec k7 = f(y5);
    const Vec err = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const Vec scale = (opt.atol + opt.rtol * y.cwiseAbs().cwiseMax(y5.cwiseAbs()).array()).matrix();
    const double en = std::sqrt((err.cwiseQuotient(scale)).squaredNorm() / Dim);

    if (en <= 1.0 || step <= opt.h_min) {
      if (en > 1.0 && step <= opt.h_min) throw ConvergenceError("integrator: step size underflow");
      t = last ? t1 : t + hs;
      y = y5;
      post(y);
      k1 = f(y);
      const double fac = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
      if (!last) step = std::min(step * fac, opt.h_max);
      else h = std::min(std::max(proposed, step * fac), opt.h_max);
    } else {
      step = std::max(step * std::clamp(0.9 * std::pow(en, -0.2), 0.1, 0.9), opt.h_min);
    }
  }
  return y;
}

}  // namespace reeb
