#pragma once

#include <vector>

#include "reeb/core4.hpp"

namespace reeb {

/// Periodic C^2 cubic spline through uniformly spaced points of R^4 on [0, period).
class PeriodicSpline {
 public:
  PeriodicSpline(std::vector<Vec4d> points, double period);

  Vec4d value(double t) const;
  Vec4d derivative(double t) const;
  Vec4d second_derivative(double t) const;

  std::size_t size() const { return points_.size(); }
  double period() const { return period_; }

 private:
  // Index of the knot interval containing t (wrapped) and the local offset in [0, h).
  std::size_t locate(double t, double& local) const;

  std::vector<Vec4d> points_;
  std::vector<Vec4d> second_;  // second derivatives at the knots
  double period_;
  double h_;
};

}  // namespace reeb
