#pragma once

#include <algorithm>
#include <array>
#include <functional>

#include <Eigen/Core>

namespace reeb {

template <int Dim>
struct MinimizeResult {
  Eigen::Matrix<double, Dim, 1> x;
  double value = 0.0;
  int iterations = 0;
};

/// Nelder-Mead downhill simplex. Small fixed dimensions only.
template <int Dim>
MinimizeResult<Dim> nelder_mead(const std::function<double(const Eigen::Matrix<double, Dim, 1>&)>& f,
                                const Eigen::Matrix<double, Dim, 1>& x0, double step,
                                int max_iterations = 400, double ftol = 1e-15) {
  using Vec = Eigen::Matrix<double, Dim, 1>;
  std::array<Vec, Dim + 1> pts;
  std::array<double, Dim + 1> vals;
  pts[0] = x0;
  for (int i = 0; i < Dim; ++i) {
    pts[i + 1] = x0;
    pts[i + 1](i) += step;
  }
  for (int i = 0; i <= Dim; ++i) vals[i] = f(pts[i]);

  int it = 0;
  for (; it < max_iterations; ++it) {
    std::array<int, Dim + 1> order;
    for (int i = 0; i <= Dim; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) { return vals[a] < vals[b]; });
    std::array<Vec, Dim + 1> p2;
    std::array<double, Dim + 1> v2;
    for (int i = 0; i <= Dim; ++i) {
      p2[i] = pts[order[i]];
      v2[i] = vals[order[i]];
    }
    pts = p2;
    vals = v2;
    if (std::abs(vals[Dim] - vals[0]) <= ftol * (1.0 + std::abs(vals[0])) &&
        (pts[Dim] - pts[0]).norm() < 1e-10)
      break;

    Vec centroid = Vec::Zero();
    for (int i = 0; i < Dim; ++i) centroid += pts[i];
    centroid /= Dim;
    const Vec reflected = centroid + (centroid - pts[Dim]);
    const double fr = f(reflected);
    if (fr < vals[0]) {
      const Vec expanded = centroid + 2.0 * (centroid - pts[Dim]);
      const double fe = f(expanded);
      if (fe < fr) {
        pts[Dim] = expanded;
        vals[Dim] = fe;
      } else {
        pts[Dim] = reflected;
        vals[Dim] = fr;
      }
      continue;
    }
    if (fr < vals[Dim - 1]) {
      pts[Dim] = reflected;
      vals[Dim] = fr;
      continue;
    }
    const Vec contracted = centroid + 0.5 * (pts[Dim] - centroid);
    const double fc = f(contracted);
    if (fc < vals[Dim]) {
      pts[Dim] = contracted;
      vals[Dim] = fc;
      continue;
    }
    for (int i = 1; i <= Dim; ++i) {
      pts[i] = pts[0] + 0.5 * (pts[i] - pts[0]);
      vals[i] = f(pts[i]);
    }
  }
  int best = 0;
  for (int i = 1; i <= Dim; ++i)
    if (vals[i] < vals[best]) best = i;
  return {pts[best], vals[best], it};
}

}  // namespace reeb
