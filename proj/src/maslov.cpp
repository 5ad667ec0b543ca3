#include "reeb/maslov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Eigenvalues>

namespace reeb {

namespace {

constexpr double kPi = std::numbers::pi;

Mat2d rotation_matrix(double a) {
  Mat2d r;
  r << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
  return r;
}

double simpson(const std::vector<double>& f, double dt) {
  const std::size_t n = f.size() - 1;
  double sum = f.front() + f.back();
  for (std::size_t i = 1; i < n; ++i) sum += (i % 2 == 1 ? 4.0 : 2.0) * f[i];
  return sum * dt / 3.0;
}

}  // namespace

double rotation(const SL2Path& path, const Eigen::Vector2d& x) {
  if (path.size() < 2) throw DomainError("rotation: path needs at least two samples");
  double total = 0.0;
  Eigen::Vector2d prev = path.matrices.front() * x;
  for (std::size_t i = 1; i < path.size(); ++i) {
    const Eigen::Vector2d cur = path.matrices[i] * x;
    // Signed angle from prev to cur.
    const double d = std::atan2(prev(0) * cur(1) - prev(1) * cur(0), prev.dot(cur));
    if (std::abs(d) >= kPi / 2)
      throw ConvergenceError("rotation: sampling too coarse (angular jump >= pi/2)");
    total += d;
    prev = cur;
  }
  return total;
}

RotationReport rotation_report(const SL2Path& path, int n_dirs) {
  if (n_dirs < 1) throw DomainError("rotation_report: n_dirs must be positive");
  RotationReport rep;
  rep.rot_min = std::numeric_limits<double>::infinity();
  rep.rot_max = -rep.rot_min;
  for (int j = 0; j < n_dirs; ++j) {
    const double a = kPi * j / n_dirs;
    const double r = rotation(path, Eigen::Vector2d(std::cos(a), std::sin(a)));
    rep.directions.push_back(a);
    rep.rotations.push_back(r);
    rep.rot_min = std::min(rep.rot_min, r);
    rep.rot_max = std::max(rep.rot_max, r);
  }
  return rep;
}

MaslovResult maslov_index(const SL2Path& path, int n_dirs, double tol) {
  if (!(tol > 0.0)) throw DomainError("maslov_index: tolerance must be positive");
  RotationReport rep = rotation_report(path, n_dirs);
  while (n_dirs < 4096) {
    RotationReport finer = rotation_report(path, 2 * n_dirs);
    const bool stable = std::abs(finer.rot_min - rep.rot_min) < 1e-6 &&
                        std::abs(finer.rot_max - rep.rot_max) < 1e-6;
    rep = std::move(finer);
    n_dirs *= 2;
    if (stable) break;
  }
  if (rep.spread() >= kPi + 1e-6)
    throw VerificationError("maslov_index: rotation spread >= pi, inconsistent path");

  MaslovResult res;
  res.rot_min = rep.rot_min;
  res.rot_max = rep.rot_max;
  res.n_dirs = n_dirs;
  res.witness_direction = std::numeric_limits<double>::quiet_NaN();

  for (std::size_t j = 0; j < rep.rotations.size(); ++j) {
    const double p = std::round(rep.rotations[j] / (2 * kPi));
    if (std::abs(rep.rotations[j] - 2 * kPi * p) <= tol) {
      res.degenerate = true;
      res.index = 2 * static_cast<int>(p);
      res.witness_direction = rep.directions[j];
      break;
    }
  }
  if (!res.degenerate) {
    const double p = std::ceil(rep.rot_min / (2 * kPi));
    if (2 * kPi * p <= rep.rot_max) {
      res.degenerate = true;
      res.index = 2 * static_cast<int>(p);
    }
  }
  if (res.degenerate) {
    res.candidate_low = res.index - 1;
    res.candidate_high = res.index + 1;
  } else {
    res.index = 2 * static_cast<int>(std::floor(rep.rot_min / (2 * kPi))) + 1;
    res.candidate_low = res.candidate_high = res.index;
  }
  return res;
}

SL2Path exp_js_path(const Eigen::Matrix2d& s, int n_steps) {
  if (n_steps < 1) throw DomainError("exp_js_path: n_steps must be positive");
  if (std::abs(s(0, 1) - s(1, 0)) > 1e-12) throw DomainError("exp_js_path: S must be symmetric");
  const Eigen::SelfAdjointEigenSolver<Mat2d> eig(s);
  if (!(eig.eigenvalues().cwiseAbs().maxCoeff() < 2 * kPi))
    throw DomainError("exp_js_path: |S| must be below 2 pi");

  Mat2d j;
  j << 0, -1, 1, 0;
  const Mat2d a = j * s;
  // a is traceless, so a^2 = -det(a) Id.
  const double d = a.determinant();
  SL2Path path;
  for (int i = 0; i <= n_steps; ++i) {
    const double t = static_cast<double>(i) / n_steps;
    double c, sn;
    if (d > 0) {
      const double w = std::sqrt(d);
      c = std::cos(w * t);
      sn = std::sin(w * t) / w;
    } else if (d < 0) {
      const double k = std::sqrt(-d);
      c = std::cosh(k * t);
      sn = std::sinh(k * t) / k;
    } else {
      c = 1.0;
      sn = t;
    }
    path.times.push_back(t);
    path.matrices.push_back(c * Mat2d::Identity() + sn * a);
  }
  return path;
}

SL2Path product(const SL2Path& a, const SL2Path& b) {
  if (a.size() != b.size()) throw DomainError("product: paths have different sample counts");
  SL2Path out = a;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a.times[i] - b.times[i]) > 1e-12) throw DomainError("product: sample times differ");
    out.matrices[i] = a.matrices[i] * b.matrices[i];
  }
  out.max_det_correction = std::max(a.max_det_correction, b.max_det_correction);
  return out;
}

SL2Path inverse(const SL2Path& path) {
  SL2Path out = path;
  for (Mat2d& m : out.matrices) {
    // Inverse of a 2x2 matrix with det 1 is its adjugate; divide to stay exact otherwise.
    Mat2d adj;
    adj << m(1, 1), -m(0, 1), -m(1, 0), m(0, 0);
    m = adj / m.determinant();
  }
  return out;
}

SL2Path prepend_loops(const SL2Path& path, int k) {
  if (path.size() < 1) throw DomainError("prepend_loops: empty path");
  SL2Path out;
  const int n = std::max(1, 32 * std::abs(k));
  for (int i = 0; i < n; ++i) {
    const double s = static_cast<double>(i) / n;
    out.times.push_back(s);
    out.matrices.push_back(rotation_matrix(2 * kPi * k * s));
  }
  const double shift = 1.0 - path.times.front();
  for (std::size_t i = 0; i < path.size(); ++i) {
    out.times.push_back(path.times[i] + shift);
    out.matrices.push_back(path.matrices[i]);
  }
  out.max_det_correction = path.max_det_correction;
  return out;
}

SL2Path refine(const SL2Path& path, int factor) {
  if (factor < 1) throw DomainError("refine: factor must be positive");
  SL2Path out;
  out.max_det_correction = path.max_det_correction;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    for (int k = 0; k < factor; ++k) {
      const double s = static_cast<double>(k) / factor;
      Mat2d m = (1 - s) * path.matrices[i] + s * path.matrices[i + 1];
      const double det = m.determinant();
      if (!(det > 0.0)) throw ConvergenceError("refine: interpolant leaves GL+(2, R)");
      out.times.push_back((1 - s) * path.times[i] + s * path.times[i + 1]);
      out.matrices.push_back(m / std::sqrt(det));
    }
  }
  out.times.push_back(path.times.back());
  out.matrices.push_back(path.matrices.back());
  return out;
}

CurvatureRotation rotation_via_curvature(const PeriodicOrbit& orbit, const SL2Path& path) {
  const std::size_t n = orbit.samples.size() - 1;
  if (path.size() != orbit.samples.size())
    throw DomainError("rotation_via_curvature: path and orbit sample counts differ");
  if (n < 4 || n % 4 != 0)
    throw DomainError("rotation_via_curvature: sample intervals must be a multiple of 4");

  std::vector<double> f(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    const Vec4d& p = orbit.samples[i].p;
    const ShapeOperator so = shape_operator(orbit.surface, p);
    const ContactFrame frame = contact_frame(orbit.surface, p);
    const Eigen::Vector2d col = path.matrices[i].col(0);
    const Vec4d mt = (col(0) * frame.m + col(1) * frame.jm) / col.norm();
    const Vec4d jn = j_mul(frame.normal);
    f[i] = frame.phi * (so.second_fundamental_form(jn, jn) + so.second_fundamental_form(mt, mt));
  }
  std::vector<double> half;
  for (std::size_t i = 0; i <= n; i += 2) half.push_back(f[i]);
  const double dt = orbit.period / static_cast<double>(n);
  CurvatureRotation out;
  out.value = simpson(f, dt);
  out.coarse = simpson(half, 2 * dt);
  if (std::abs(out.value - out.coarse) > 1e-4)
    throw ConvergenceError("rotation_via_curvature: Richardson disagreement above 1e-4");
  return out;
}

}  // namespace reeb
