#pragma once

// Transverse knots on a star-shaped surface: orientation check, self-linking number,
// total curvature and Milnor crookedness.

#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "reeb/dynamics.hpp"
#include "reeb/spline.hpp"
#include "reeb/surface.hpp"

namespace reeb {

/// Closed curve t -> gamma(t) on Sigma, t in [0, 2 pi].
class TransverseKnot {
 public:
  using CurveFn = std::function<Vec4d(double)>;

  /// Exact parametrization with its first two derivatives.
  static TransverseKnot analytic(StarShapedSurface surface, CurveFn gamma, CurveFn d_gamma,
                                 CurveFn dd_gamma, std::string name);
  /// Uniform samples at t_i = 2 pi i / n (the closing point is not repeated),
  /// interpolated by a periodic cubic spline.
  static TransverseKnot from_samples(StarShapedSurface surface, std::vector<Vec4d> samples,
                                     std::string name);

  Vec4d position(double t) const;
  Vec4d derivative(double t) const;
  Vec4d second_derivative(double t) const;

  const StarShapedSurface& surface() const { return surface_; }
  const std::string& name() const { return name_; }
  /// Sample count of the underlying data, 0 for analytic knots.
  std::size_t sample_count() const { return spline_ ? spline_->size() : 0; }

  /// The same curve traversed backwards.
  TransverseKnot reversed() const;
  /// t -> gamma(sigma(t)) for an orientation-preserving diffeomorphism sigma of [0, 2 pi].
  TransverseKnot reparametrized(std::function<double(double)> sigma,
                                std::function<double(double)> d_sigma,
                                std::function<double(double)> dd_sigma) const;

 private:
  TransverseKnot(StarShapedSurface surface, std::string name)
      : surface_(std::move(surface)), name_(std::move(name)) {}

  StarShapedSurface surface_;
  std::string name_;
  CurveFn gamma_, d_gamma_, dd_gamma_;
  std::shared_ptr<const PeriodicSpline> spline_;
};

/// Hopf fiber t -> (e^{it}, 0) on the round sphere.
TransverseKnot hopf_fiber();
/// (a e^{ipt}, b e^{iqt}) with a^2 = r1^2 / 2, b^2 = r2^2 / 2 on ellipsoid(r1, r2).
/// A Reeb orbit when r2^2 / r1^2 = p / q.
TransverseKnot torus_orbit_knot(int p, int q, double r1, double r2);
/// A periodic orbit traversed once, reparametrized to [0, 2 pi].
TransverseKnot knot_from_orbit(const PeriodicOrbit& orbit);
/// Reads t,x1,y1,x2,y2 rows (optional header) with uniform t over one period.
TransverseKnot read_knot_csv(std::istream& is, StarShapedSurface surface, std::string name);

/// min over samples of lambda(gamma') / |gamma'|; positive iff canonically oriented.
double check_transverse(const TransverseKnot& knot, int n_samples = 4096);
/// Smallest distance between samples whose parameters differ by more than 0.1.
double embedding_margin(const TransverseKnot& knot, int n_samples = 2048);

struct LinkingOptions {
  double epsilon = 1e-2;
  int n_quad = 512;
  int max_quad = 16384;
  int n_poles = 32;
  bool check_half_epsilon = true;
};

struct LinkingComputation {
  double epsilon = 0.0;
  Vec4d pole;
  double pole_distance = 0.0;
  double raw = 0.0;
  int value = 0;
  double residual = 0.0;
  int n_quad = 0;
  double min_separation = 0.0;  // knot to pushoff
  double raw_half_epsilon = 0.0;
  int value_half_epsilon = 0;
};

/// Gauss linking integral of two closed curves in R^3 sampled uniformly (n points each).
double gauss_linking(const std::vector<Vec3d>& a, const std::vector<Vec3d>& b);

/// Linking number of the knot with its pushoff along the global section pi M.
LinkingComputation self_linking(const TransverseKnot& knot, const LinkingOptions& options = {});
/// Same computation with an explicitly chosen pole on S^3.
LinkingComputation self_linking_with_pole(const TransverseKnot& knot, const Vec4d& pole,
                                          const LinkingOptions& options = {});

struct CurvatureIntegral {
  double value = 0.0;
  int n_nodes = 0;
  double refinement_delta = 0.0;
};

CurvatureIntegral total_curvature(const TransverseKnot& knot);

struct Crookedness {
  int minima = 0;
  int maxima = 0;
  bool degenerate = false;
};

Crookedness crookedness(const TransverseKnot& knot, const Vec4d& v, int n_samples = 4096);

struct FillingDirection {
  Vec4d direction;
  bool found = false;
  int minima = 0;
  /// |minima - 1| + |maxima - 1| of the reported direction; 0 on success.
  int defect = 0;
  double t_min = 0.0;  // parameter of the minimum of <gamma, v>
  double t_max = 0.0;
  double conditioning = 0.0;  // smaller second difference at the two critical samples
};

FillingDirection find_filling_direction(const TransverseKnot& knot, int n_dirs = 256,
                                        int n_samples = 4096);

}  // namespace reeb
