#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "reeb/filling.hpp"
#include "reeb/surface.hpp"

namespace fixtures {

using reeb::Vec2d;
using reeb::Vec4d;
using Jac = Eigen::Matrix<double, 4, 2>;

inline constexpr double kPi = std::numbers::pi;

/// F = |z1|^2 + |z2|^2 / 2 + 0.1 x1^2 x2^2. Convex near Sigma, keeps both axis circles
/// as orbits (periods pi and 2 pi) but has a non-quadratic linearized flow.
inline reeb::StarShapedSurface perturbed_ellipsoid() {
  return reeb::StarShapedSurface::implicit_polynomial(
      reeb::Polynomial4::parse("x1^2 + y1^2 + 0.5*x2^2 + 0.5*y2^2 + 0.1*x1^2*x2^2"));
}

/// Same surface from the value alone (finite-difference derivatives).
inline reeb::StarShapedSurface perturbed_ellipsoid_fd() {
  return reeb::StarShapedSurface::generic([](const Vec4d& p) {
    return p(0) * p(0) + p(1) * p(1) + 0.5 * (p(2) * p(2) + p(3) * p(3)) + 0.1 * p(0) * p(0) * p(2) * p(2);
  });
}

inline Vec4d random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Vec4d v(g(rng), g(rng), g(rng), g(rng));
  return v.normalized();
}

/// w -> (conj w, w^2) with w = z - c: a single anti-holomorphic complex point at z = c.
inline reeb::ImmersedDisc anti_holomorphic_disc(int n_r = 48, int n_theta = 192) {
  const Vec2d c(0.3, 0.2);
  return reeb::planar_map_disc(
      [c](const Vec2d& z) {
        const std::complex<double> w(z(0) - c(0), z(1) - c(1));
        const std::complex<double> w2 = w * w;
        return Vec4d(w.real(), -w.imag(), w2.real(), w2.imag());
      },
      [c](const Vec2d& z) {
        const double a = z(0) - c(0), b = z(1) - c(1);
        Jac j;
        j << 1, 0, 0, -1, 2 * a, -2 * b, 2 * b, 2 * a;
        return j;
      },
      n_r, n_theta);
}

/// (x, y) -> (x^2 - a^2, x (x^2 - a^2), y, sign x y) with a = 1/2: one transverse double
/// point, (a, 0) ~ (-a, 0), whose orientation determinant is 16 sign a^4.
inline reeb::ImmersedDisc double_point_disc(int sign, int n_r = 48, int n_theta = 192) {
  const double a = 0.5;
  const double s = sign;
  return reeb::planar_map_disc(
      [a, s](const Vec2d& z) {
        const double x = z(0), y = z(1);
        return Vec4d(x * x - a * a, x * (x * x - a * a), y, s * x * y);
      },
      [a, s](const Vec2d& z) {
        const double x = z(0), y = z(1);
        Jac j;
        j << 2 * x, 0, 3 * x * x - a * a, 0, 0, 1, s * y, s * x;
        return j;
      },
      n_r, n_theta);
}

}  // namespace fixtures
