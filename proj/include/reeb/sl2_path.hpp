#pragma once

#include <vector>

#include <Eigen/Core>

namespace reeb {

/// Sampled path t -> Phi(t) in SL(2, R) with Phi(times[0]) = Id.
struct SL2Path {
  std::vector<double> times;
  std::vector<Eigen::Matrix2d> matrices;
  /// Largest |det - 1| removed by renormalization while the path was built.
  double max_det_correction = 0.0;

  std::size_t size() const { return times.size(); }
};

}  // namespace reeb
