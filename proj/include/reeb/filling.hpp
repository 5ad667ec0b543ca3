#pragma once

// Sampled disc fillings of transverse knots and their self-intersection data.

#include <functional>
#include <iosfwd>
#include <utility>
#include <vector>

#include "reeb/knot.hpp"

namespace reeb {

/// Parameter domains:
///   Polar: (u, v) = (r, theta) in [0, 1] x [0, 2 pi), periodic in theta.
///   Chord: (u, v) = (s, t) in [0, 1] x [0, pi]; the segment from gamma1(t) (s = 0) to
///          gamma2(t) (s = 1). Disc coordinates (cos t, (2 s - 1) sin t).
/// In both cases (d/du, d/dv) is the standard orientation of the unit disc.
enum class DiscKind { Polar, Chord };

class ImmersedDisc {
 public:
  using MapFn = std::function<Vec4d(double u, double v)>;
  using PartialsFn = std::function<std::pair<Vec4d, Vec4d>(double u, double v)>;
  /// Boundary point (u, v) -> parameter of the boundary knot.
  using BoundaryFn = std::function<double(double u, double v)>;

  ImmersedDisc(DiscKind kind, int n_u, int n_v, MapFn map, PartialsFn partials,
               BoundaryFn boundary_parameter = {});

  DiscKind kind() const { return kind_; }
  int n_u() const { return n_u_; }
  int n_v() const { return n_v_; }
  /// Node counts along each axis (the periodic polar axis has no repeated node).
  int nodes_u() const { return n_u_ + 1; }
  int nodes_v() const { return kind_ == DiscKind::Polar ? n_v_ : n_v_ + 1; }
  double u_at(int i) const;
  double v_at(int j) const;
  double v_period() const;

  Vec4d map(double u, double v) const { return map_(u, v); }
  std::pair<Vec4d, Vec4d> partials(double u, double v) const { return partials_(u, v); }
  Vec2d disc_coordinates(double u, double v) const;
  /// Clamps u into [0, 1] and v into its range (wrapping the polar angle).
  void clamp(double& u, double& v) const;

  const Vec4d& f(int i, int j) const { return f_[index(i, j)]; }
  const Vec4d& fu(int i, int j) const { return fu_[index(i, j)]; }
  const Vec4d& fv(int i, int j) const { return fv_[index(i, j)]; }
  /// Rows that collapse to a point (r = 0, or t in {0, pi}).
  bool collapsed(int i, int j) const;
  bool on_boundary(int i, int j) const;
  double boundary_parameter(double u, double v) const;
  bool has_boundary_parameter() const { return static_cast<bool>(boundary_); }

  /// Same maps on a grid refined by `factor` in both directions.
  ImmersedDisc refined(int factor) const;

 private:
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(nodes_v()) + static_cast<std::size_t>(j);
  }

  DiscKind kind_;
  int n_u_, n_v_;
  MapFn map_;
  PartialsFn partials_;
  BoundaryFn boundary_;
  std::vector<Vec4d> f_, fu_, fv_;
};

inline constexpr int kDefaultRadialNodes = 96;
inline constexpr int kDefaultAngularNodes = 384;

/// Polar disc from a map of the unit disc g(x, y) and its 4x2 Jacobian.
ImmersedDisc planar_map_disc(std::function<Vec4d(const Vec2d&)> g,
                             std::function<Eigen::Matrix<double, 4, 2>(const Vec2d&)> jacobian,
                             int n_r = kDefaultRadialNodes, int n_theta = kDefaultAngularNodes);
/// z -> (radius z, 0); `reversed` conjugates z, reversing the orientation.
ImmersedDisc flat_disc(double radius = 1.0, bool reversed = false, int n_r = kDefaultRadialNodes,
                       int n_theta = kDefaultAngularNodes);

struct FillingOptions {
  int n_r = kDefaultRadialNodes;
  int n_theta = kDefaultAngularNodes;
  /// Allows fillings over surfaces that are not builtin quadrics.
  bool assume_convex = false;
};

/// Chords between the arcs gamma2 = [t_a -> t_b] (forward) and gamma1 = [t_a -> t_b]
/// (backward), both reparametrized proportionally to arc length on [0, pi].
ImmersedDisc linear_filling(const TransverseKnot& knot, double t_a, double t_b,
                            const FillingOptions& options = {});
/// Parameter-antipodal split points 0 and pi.
ImmersedDisc linear_filling(const TransverseKnot& knot, const FillingOptions& options = {});

struct EmbeddedFilling {
  ImmersedDisc disc;
  double injectivity_margin = 0.0;
};

/// Level-set chords of the height <., v> between its minimum at t_min and maximum at
/// t_max. Throws VerificationError if the injectivity scan fails.
EmbeddedFilling embedded_filling(const TransverseKnot& knot, const Vec4d& v, double t_min,
                                 double t_max, const FillingOptions& options = {});
EmbeddedFilling embedded_filling(const TransverseKnot& knot, const FillingDirection& direction,
                                 const FillingOptions& options = {});

inline constexpr double kInjectivityThreshold = 1e-5;

/// Smallest distance between non-adjacent, non-collapsed grid nodes, capped at 1e-3.
double injectivity_margin(const ImmersedDisc& disc);
/// Largest |f(boundary node) - knot(parameter)|.
double boundary_error(const ImmersedDisc& disc, const TransverseKnot& knot);
/// Largest F over the grid.
double max_surface_value(const ImmersedDisc& disc, const StarShapedSurface& surface);
/// Smallest singular value of (f_u, f_v) over non-collapsed nodes.
double immersion_margin(const ImmersedDisc& disc);

/// min over non-collapsed nodes of omega0(f_u, f_v) / (|f_u| |f_v|).
double symplectic_check(const ImmersedDisc& disc);

/// Distance of the tangent plane from a complex line, in [0, 1].
double complex_defect(const Vec4d& fu, const Vec4d& fv);

struct ComplexPoint {
  double u = 0.0, v = 0.0;
  Vec4d point;
  double defect = 0.0;
  bool holomorphic = true;
  bool whole_disc = false;
};

std::vector<ComplexPoint> complex_points(const ImmersedDisc& disc);
int anti_holomorphic_count(const std::vector<ComplexPoint>& points);

struct IntersectionRecord {
  Vec2d params_p, params_q;
  Vec4d point;
  int sign = 0;
  double residual = 0.0;
  double determinant = 0.0;  // normalized by the four tangent lengths
};

struct TangentialIndex {
  int value = 0;
  std::vector<IntersectionRecord> records;
  std::size_t candidate_pairs = 0;
};

TangentialIndex tangential_index(const ImmersedDisc& disc, double tol = 1e-6);

struct Theorem1Report {
  int lk = 0;
  int tan = 0;
  double symplectic_min = 0.0;
  int anti_holomorphic = 0;
  int intersection_number = 0;  // lk + 1
  bool pass = false;
  LinkingComputation linking;
  TangentialIndex index;
};

/// lk(gamma) = 2 tan(f) - 1 for a symplectic filling f of the knot.
Theorem1Report verify_theorem1(const TransverseKnot& knot, const ImmersedDisc& disc,
                               const LinkingOptions& linking = {}, double tol = 1e-6);

struct SelfIntersectionNumber {
  int value = 0;  // lk + 1
  int lk = 0;
  bool cross_checked = false;
  int twice_tan = 0;
};

/// lk + 1; with a symplectic filling also compared against 2 tan(f) (VerificationError
/// on mismatch).
SelfIntersectionNumber self_intersection_number(const TransverseKnot& knot,
                                                const ImmersedDisc* filling = nullptr,
                                                const LinkingOptions& linking = {});

/// Columns r, theta (polar coordinates of the disc point), x1, y1, x2, y2.
void write_disc_csv(std::ostream& os, const ImmersedDisc& disc);

}  // namespace reeb
