#pragma once

// Rotation numbers and the Maslov index of sampled paths in SL(2, R).

#include <vector>

#include <Eigen/Core>

#include "reeb/dynamics.hpp"
#include "reeb/sl2_path.hpp"

namespace reeb {

/// Total angle swept by Phi(t) X / |Phi(t) X| along the path.
double rotation(const SL2Path& path, const Eigen::Vector2d& x);

struct RotationReport {
  std::vector<double> directions;  // angle of X_j
  std::vector<double> rotations;   // rot(Phi, X_j)
  double rot_min = 0.0;
  double rot_max = 0.0;

  double spread() const { return rot_max - rot_min; }
};

/// Rotations over n_dirs equispaced directions of the half circle (X and -X agree).
RotationReport rotation_report(const SL2Path& path, int n_dirs);

struct MaslovResult {
  int index = 0;
  bool degenerate = false;
  double rot_min = 0.0;
  double rot_max = 0.0;
  int n_dirs = 0;
  /// Degenerate branch: angle of a direction whose rotation is within tol of 2 p pi,
  /// or NaN if the branch was selected because 2 p pi lies inside [rot_min, rot_max].
  double witness_direction = 0.0;
  /// Both odd neighbours of a degenerate index; equal to {index, index} otherwise.
  int candidate_low = 0;
  int candidate_high = 0;
};

inline constexpr double kDegeneracyTolerance = 1e-5;

MaslovResult maslov_index(const SL2Path& path, int n_dirs = 64, double tol = kDegeneracyTolerance);

/// t -> exp(t J S) on [0, 1] with J the rotation by pi/2. Requires S symmetric, |S| < 2 pi.
SL2Path exp_js_path(const Eigen::Matrix2d& s, int n_steps = 256);

/// Pointwise product t -> A(t) B(t) of two paths sampled at the same times.
SL2Path product(const SL2Path& a, const SL2Path& b);

/// Pointwise inverse t -> Phi(t)^{-1}.
SL2Path inverse(const SL2Path& path);

/// Concatenation of k counterclockwise turns R(2 pi k s), s in [0, 1], followed by the path.
SL2Path prepend_loops(const SL2Path& path, int k);

/// Splits every interval into `factor` pieces; new matrices are linear interpolants
/// rescaled to determinant one.
SL2Path refine(const SL2Path& path, int factor);

struct CurvatureRotation {
  double value = 0.0;
  double coarse = 0.0;  // same quadrature on every other sample
};

/// Integral of phi (II(JN, JN) + II(M~, M~)) along the orbit, where M~ is the
/// normalized image of the transported pi M under the projection onto span_C(M).
CurvatureRotation rotation_via_curvature(const PeriodicOrbit& orbit, const SL2Path& path);

}  // namespace reeb
