#include "reeb/spline.hpp"

#include <cmath>

namespace reeb {

PeriodicSpline::PeriodicSpline(std::vector<Vec4d> points, double period)
    : points_(std::move(points)), period_(period) {
  const std::size_t n = points_.size();
  if (n < 4) throw DomainError("PeriodicSpline: need at least 4 points");
  if (!(period > 0.0)) throw DomainError("PeriodicSpline: period must be positive");
  h_ = period / static_cast<double>(n);

  // Cyclic system M_{i-1} + 4 M_i + M_{i+1} = 6 (P_{i+1} - 2 P_i + P_{i-1}) / h^2,
  // solved by the Thomas algorithm with a Sherman-Morrison correction.
  std::vector<Vec4d> rhs(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec4d& prev = points_[(i + n - 1) % n];
    const Vec4d& next = points_[(i + 1) % n];
    rhs[i] = 6.0 * (next - 2.0 * points_[i] + prev) / (h_ * h_);
  }
  const double gamma = -4.0;
  std::vector<double> diag(n, 4.0);
  diag[0] -= gamma;
  diag[n - 1] -= 1.0 / gamma;

  auto solve = [&](std::vector<Vec4d> d) {
    std::vector<double> c(n), b = diag;
    c[0] = 1.0 / b[0];
    d[0] /= b[0];
    for (std::size_t i = 1; i < n; ++i) {
      const double m = b[i] - c[i - 1];
      c[i] = 1.0 / m;
      d[i] = (d[i] - d[i - 1]) / m;
    }
    for (std::size_t i = n - 1; i-- > 0;) d[i] -= c[i] * d[i + 1];
    return d;
  };

  const std::vector<Vec4d> y = solve(rhs);
  std::vector<Vec4d> u(n, Vec4d::Zero());
  u[0].setConstant(gamma);
  u[n - 1].setConstant(1.0);
  const std::vector<Vec4d> z = solve(u);
  // v = (1, 0, ..., 0, 1/gamma); the correction is componentwise identical.
  const double vz = z[0](0) + z[n - 1](0) / gamma;
  second_.resize(n);
  const Vec4d vy = y[0] + y[n - 1] / gamma;
  for (std::size_t i = 0; i < n; ++i)
    second_[i] = y[i] - (vy.array() / (1.0 + vz)).matrix().cwiseProduct(z[i]);
}

std::size_t PeriodicSpline::locate(double t, double& local) const {
  double w = std::fmod(t, period_);
  if (w < 0) w += period_;
  std::size_t i = static_cast<std::size_t>(w / h_);
  if (i >= points_.size()) i = points_.size() - 1;
  local = w - static_cast<double>(i) * h_;
  return i;
}

Vec4d PeriodicSpline::value(double t) const {
  double x;
  const std::size_t i = locate(t, x);
  const std::size_t j = (i + 1) % points_.size();
  const double a = (h_ - x) / h_, b = x / h_;
  return a * points_[i] + b * points_[j] +
         ((a * a * a - a) * second_[i] + (b * b * b - b) * second_[j]) * (h_ * h_ / 6.0);
}

Vec4d PeriodicSpline::derivative(double t) const {
  double x;
  const std::size_t i = locate(t, x);
  const std::size_t j = (i + 1) % points_.size();
  const double a = (h_ - x) / h_, b = x / h_;
  return (points_[j] - points_[i]) / h_ +
         (-(3 * a * a - 1) * second_[i] + (3 * b * b - 1) * second_[j]) * (h_ / 6.0);
}

Vec4d PeriodicSpline::second_derivative(double t) const {
  double x;
  const std::size_t i = locate(t, x);
  const std::size_t j = (i + 1) % points_.size();
  const double a = (h_ - x) / h_, b = x / h_;
  return a * second_[i] + b * second_[j];
}

}  // namespace reeb
