#include "reeb/filling.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <ostream>
#include <tuple>
#include <unordered_map>

#include <Eigen/LU>
#include <Eigen/QR>

#include "reeb/optimize.hpp"
#include "reeb/parallel.hpp"

namespace reeb {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * kPi;

double wrap_2pi(double t) {
  double w = std::fmod(t, kTwoPi);
  return w < 0 ? w + kTwoPi : w;
}

// Forward span from a to b in (0, 2 pi).
double forward_span(double a, double b) {
  const double d = wrap_2pi(b - a);
  return d;
}

// ---------------------------------------------------------------------------
// Arc reparametrizations t(tau), tau in [0, pi], of the arc t0 + dir * sigma,
// sigma in [0, span].

struct ArcPoint {
  double t;
  double dt;  // dt / dtau
};

class ArcLengthParam {
 public:
  ArcLengthParam(std::shared_ptr<const TransverseKnot> knot, double t0, double dir, double span,
                 int panels = 1024)
      : knot_(std::move(knot)), t0_(t0), dir_(dir), span_(span), panels_(panels) {
    cum_.assign(panels + 1, 0.0);
    const double h = span / panels;
    for (int k = 0; k < panels; ++k) cum_[k + 1] = cum_[k] + integral(k * h, (k + 1) * h);
    length_ = cum_.back();
  }

  double length() const { return length_; }

  ArcPoint operator()(double tau) const {
    const double target = length_ * std::clamp(tau, 0.0, kPi) / kPi;
    const double h = span_ / panels_;
    int k = static_cast<int>(std::upper_bound(cum_.begin(), cum_.end(), target) - cum_.begin()) - 1;
    k = std::clamp(k, 0, panels_ - 1);
    const double lo = k * h, hi = (k + 1) * h;
    double sigma = lo + (target - cum_[k]) / speed(lo);
    sigma = std::clamp(sigma, lo, hi);
    for (int it = 0; it < 30; ++it) {
      const double g = cum_[k] + integral(lo, sigma) - target;
      const double step = g / speed(sigma);
      sigma = std::clamp(sigma - step, lo, hi);
      if (std::abs(step) < 1e-16 * std::max(1.0, span_)) break;
    }
    return {t0_ + dir_ * sigma, dir_ * (length_ / kPi) / speed(sigma)};
  }

 private:
  double speed(double sigma) const { return knot_->derivative(t0_ + dir_ * sigma).norm(); }

  double integral(double a, double b) const {
    static constexpr std::array<double, 5> x = {0.0, -0.5384693101056831, 0.5384693101056831,
                                                -0.9061798459386640, 0.9061798459386640};
    static constexpr std::array<double, 5> w = {0.5688888888888889, 0.4786286704993665,
                                                0.4786286704993665, 0.2369268850561891,
                                                0.2369268850561891};
    const double m = 0.5 * (a + b), r = 0.5 * (b - a);
    double s = 0.0;
    for (int i = 0; i < 5; ++i) s += w[i] * speed(m + r * x[i]);
    return s * r;
  }

  std::shared_ptr<const TransverseKnot> knot_;
  double t0_, dir_, span_;
  int panels_;
  std::vector<double> cum_;
  double length_ = 0.0;
};

class HeightParam {
 public:
  HeightParam(std::shared_ptr<const TransverseKnot> knot, const Vec4d& v, double t0, double dir,
              double span)
      : knot_(std::move(knot)), v_(v), t0_(t0), dir_(dir), span_(span) {
    h0_ = height(0.0);
    h1_ = height(span_);
    if (!(h1_ > h0_)) throw DomainError("embedded_filling: height does not increase along the arc");
    constexpr int n = 4096;
    double prev = h0_;
    for (int i = 1; i <= n; ++i) {
      const double h = height(span_ * i / n);
      if (h < prev - 1e-14 * std::max(1.0, std::abs(h)))
        throw DomainError("embedded_filling: height is not monotone on an arc");
      prev = h;
    }
    kappa0_ = knot_->second_derivative(t0_).dot(v_);
    kappa1_ = -knot_->second_derivative(t0_ + dir_ * span_).dot(v_);
    if (!(kappa0_ > 0.0 && kappa1_ > 0.0))
      throw DomainError("embedded_filling: critical points of the height are degenerate");
  }

  ArcPoint operator()(double tau) const {
    tau = std::clamp(tau, 0.0, kPi);
    const double dh = h1_ - h0_;
    const double target = h0_ + dh * (1.0 - std::cos(tau)) / 2.0;
    double lo = 0.0, hi = span_;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, span_); ++it) {
      const double mid = 0.5 * (lo + hi);
      if (height(mid) < target) lo = mid; else hi = mid;
    }
    const double sigma = 0.5 * (lo + hi);
    double dsigma;
    if (tau < 1e-6) {
      dsigma = std::sqrt(dh / (2.0 * kappa0_));
    } else if (kPi - tau < 1e-6) {
      dsigma = std::sqrt(dh / (2.0 * kappa1_));
    } else {
      dsigma = (dh * std::sin(tau) / 2.0) / (dir_ * knot_->derivative(t0_ + dir_ * sigma).dot(v_));
    }
    return {t0_ + dir_ * sigma, dir_ * dsigma};
  }

 private:
  double height(double sigma) const { return knot_->position(t0_ + dir_ * sigma).dot(v_); }

  std::shared_ptr<const TransverseKnot> knot_;
  Vec4d v_;
  double t0_, dir_, span_;
  double h0_ = 0.0, h1_ = 0.0, kappa0_ = 0.0, kappa1_ = 0.0;
};

using ArcFn = std::function<ArcPoint(double)>;

// Chord disc f(s, t) = (1 - s) gamma(arc1(t)) + s gamma(arc2(t)).
ImmersedDisc chord_disc(std::shared_ptr<const TransverseKnot> knot, ArcFn arc1, ArcFn arc2,
                        int n_s, int n_t) {
  auto map = [knot, arc1, arc2](double s, double t) {
    return Vec4d((1 - s) * knot->position(arc1(t).t) + s * knot->position(arc2(t).t));
  };
  auto partials = [knot, arc1, arc2](double s, double t) {
    const ArcPoint a = arc1(t), b = arc2(t);
    const Vec4d g1 = knot->position(a.t), g2 = knot->position(b.t);
    const Vec4d d1 = knot->derivative(a.t) * a.dt, d2 = knot->derivative(b.t) * b.dt;
    return std::pair<Vec4d, Vec4d>(g2 - g1, (1 - s) * d1 + s * d2);
  };
  auto boundary = [arc1, arc2](double s, double t) {
    return wrap_2pi(s < 0.5 ? arc1(t).t : arc2(t).t);
  };
  return ImmersedDisc(DiscKind::Chord, n_s, n_t, map, partials, boundary);
}

void require_convex(const TransverseKnot& knot, const FillingOptions& opt) {
  if (!knot.surface().is_quadratic_builtin() && !opt.assume_convex)
    throw DomainError("filling: surface convexity must be asserted for non-builtin surfaces");
  if (opt.n_r < 2 || opt.n_theta < 4) throw DomainError("filling: grid too small");
}

// ---------------------------------------------------------------------------
// Hashing of 4-d integer cells.

using CellKey = std::array<long long, 4>;

struct CellKeyHash {
  std::size_t operator()(const CellKey& k) const {
    std::size_t h = 1469598103934665603ull;
    for (long long c : k) {
      h ^= static_cast<std::size_t>(c) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return h;
  }
};

CellKey cell_of(const Vec4d& p, double size) {
  return {static_cast<long long>(std::floor(p(0) / size)), static_cast<long long>(std::floor(p(1) / size)),
          static_cast<long long>(std::floor(p(2) / size)), static_cast<long long>(std::floor(p(3) / size))};
}

int cyclic_distance(int a, int b, int period) {
  const int d = std::abs(a - b);
  return period > 0 ? std::min(d, period - d) : d;
}

}  // namespace

// ---------------------------------------------------------------------------

ImmersedDisc::ImmersedDisc(DiscKind kind, int n_u, int n_v, MapFn map, PartialsFn partials,
                           BoundaryFn boundary_parameter)
    : kind_(kind), n_u_(n_u), n_v_(n_v), map_(std::move(map)), partials_(std::move(partials)),
      boundary_(std::move(boundary_parameter)) {
  if (n_u < 2 || n_v < 4) throw DomainError("ImmersedDisc: grid too small");
  if (!map_ || !partials_) throw DomainError("ImmersedDisc: map and partials are required");
  const std::size_t total = static_cast<std::size_t>(nodes_u()) * static_cast<std::size_t>(nodes_v());
  f_.resize(total);
  fu_.resize(total);
  fv_.resize(total);
  parallel_chunks(static_cast<std::size_t>(nodes_u()), 4, [&](std::size_t, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i)
      for (int j = 0; j < nodes_v(); ++j) {
        const double u = u_at(static_cast<int>(i)), v = v_at(j);
        const std::size_t k = index(static_cast<int>(i), j);
        f_[k] = map_(u, v);
        const auto d = partials_(u, v);
        fu_[k] = d.first;
        fv_[k] = d.second;
      }
  });
}

double ImmersedDisc::u_at(int i) const { return static_cast<double>(i) / n_u_; }

double ImmersedDisc::v_at(int j) const {
  return (kind_ == DiscKind::Polar ? kTwoPi : kPi) * static_cast<double>(j) / n_v_;
}

double ImmersedDisc::v_period() const { return kind_ == DiscKind::Polar ? kTwoPi : 0.0; }

Vec2d ImmersedDisc::disc_coordinates(double u, double v) const {
  if (kind_ == DiscKind::Polar) return {u * std::cos(v), u * std::sin(v)};
  return {std::cos(v), (2 * u - 1) * std::sin(v)};
}

void ImmersedDisc::clamp(double& u, double& v) const {
  u = std::clamp(u, 0.0, 1.0);
  v = kind_ == DiscKind::Polar ? wrap_2pi(v) : std::clamp(v, 0.0, kPi);
}

bool ImmersedDisc::collapsed(int i, int j) const {
  return kind_ == DiscKind::Polar ? i == 0 : (j == 0 || j == n_v_);
}

bool ImmersedDisc::on_boundary(int i, int) const {
  return kind_ == DiscKind::Polar ? i == n_u_ : (i == 0 || i == n_u_);
}

double ImmersedDisc::boundary_parameter(double u, double v) const {
  if (!boundary_) throw DomainError("ImmersedDisc: no boundary parametrization");
  return boundary_(u, v);
}

ImmersedDisc ImmersedDisc::refined(int factor) const {
  if (factor < 1) throw DomainError("ImmersedDisc::refined: factor must be positive");
  return ImmersedDisc(kind_, n_u_ * factor, n_v_ * factor, map_, partials_, boundary_);
}

ImmersedDisc planar_map_disc(std::function<Vec4d(const Vec2d&)> g,
                             std::function<Eigen::Matrix<double, 4, 2>(const Vec2d&)> jacobian,
                             int n_r, int n_theta) {
  auto map = [g](double r, double th) { return g(Vec2d(r * std::cos(th), r * std::sin(th))); };
  auto partials = [jacobian](double r, double th) {
    const double c = std::cos(th), s = std::sin(th);
    const Eigen::Matrix<double, 4, 2> jac = jacobian(Vec2d(r * c, r * s));
    return std::pair<Vec4d, Vec4d>(jac * Vec2d(c, s), jac * Vec2d(-r * s, r * c));
  };
  auto boundary = [](double, double th) { return wrap_2pi(th); };
  return ImmersedDisc(DiscKind::Polar, n_r, n_theta, map, partials, boundary);
}

ImmersedDisc flat_disc(double radius, bool reversed, int n_r, int n_theta) {
  if (!(radius > 0)) throw DomainError("flat_disc: radius must be positive");
  const double sy = reversed ? -radius : radius;
  return planar_map_disc([=](const Vec2d& z) { return Vec4d(radius * z(0), sy * z(1), 0, 0); },
                         [=](const Vec2d&) {
                           Eigen::Matrix<double, 4, 2> j = Eigen::Matrix<double, 4, 2>::Zero();
                           j(0, 0) = radius;
                           j(1, 1) = sy;
                           return j;
                         },
                         n_r, n_theta);
}

ImmersedDisc linear_filling(const TransverseKnot& knot, double t_a, double t_b,
                            const FillingOptions& opt) {
  require_convex(knot, opt);
  t_a = wrap_2pi(t_a);
  t_b = wrap_2pi(t_b);
  const double fwd = forward_span(t_a, t_b);
  if (fwd < 1e-3 || kTwoPi - fwd < 1e-3) throw DomainError("linear_filling: split points too close");
  auto k = std::make_shared<const TransverseKnot>(knot);
  auto arc2 = std::make_shared<const ArcLengthParam>(k, t_a, 1.0, fwd);
  auto arc1 = std::make_shared<const ArcLengthParam>(k, t_a, -1.0, kTwoPi - fwd);
  const double ratio = std::max(arc1->length(), arc2->length()) / std::min(arc1->length(), arc2->length());
  if (ratio > 20.0) throw DomainError("linear_filling: arc-length ratio of the split exceeds 20");
  return chord_disc(
      k, [arc1](double t) { return (*arc1)(t); }, [arc2](double t) { return (*arc2)(t); }, opt.n_r,
      opt.n_theta);
}

ImmersedDisc linear_filling(const TransverseKnot& knot, const FillingOptions& opt) {
  return linear_filling(knot, 0.0, kPi, opt);
}

EmbeddedFilling embedded_filling(const TransverseKnot& knot, const Vec4d& v, double t_min,
                                 double t_max, const FillingOptions& opt) {
  require_convex(knot, opt);
  if (std::abs(v.norm() - 1.0) > 1e-9) throw DomainError("embedded_filling: direction must be a unit vector");
  t_min = wrap_2pi(t_min);
  t_max = wrap_2pi(t_max);
  const double fwd = forward_span(t_min, t_max);
  if (fwd < 1e-3 || kTwoPi - fwd < 1e-3) throw DomainError("embedded_filling: critical points coincide");
  auto k = std::make_shared<const TransverseKnot>(knot);
  auto arc2 = std::make_shared<const HeightParam>(k, v, t_min, 1.0, fwd);
  auto arc1 = std::make_shared<const HeightParam>(k, v, t_min, -1.0, kTwoPi - fwd);
  EmbeddedFilling out{chord_disc(
                          k, [arc1](double t) { return (*arc1)(t); },
                          [arc2](double t) { return (*arc2)(t); }, opt.n_r, opt.n_theta),
                      0.0};
  out.injectivity_margin = injectivity_margin(out.disc);
  if (!(out.injectivity_margin > kInjectivityThreshold))
    throw VerificationError("embedded_filling: injectivity scan failed");
  return out;
}

EmbeddedFilling embedded_filling(const TransverseKnot& knot, const FillingDirection& direction,
                                 const FillingOptions& opt) {
  if (!direction.found) throw DomainError("embedded_filling: no admissible height direction");
  return embedded_filling(knot, direction.direction, direction.t_min, direction.t_max, opt);
}

double injectivity_margin(const ImmersedDisc& disc) {
  constexpr double cap = 1e-3;
  const int nu = disc.nodes_u(), nv = disc.nodes_v();
  const int period = disc.kind() == DiscKind::Polar ? nv : 0;
  std::unordered_map<CellKey, std::vector<int>, CellKeyHash> buckets;
  for (int i = 0; i < nu; ++i)
    for (int j = 0; j < nv; ++j)
      if (!disc.collapsed(i, j)) buckets[cell_of(disc.f(i, j), cap)].push_back(i * nv + j);

  double best = cap;
  for (const auto& [key, ids] : buckets) {
    for (int d = 0; d < 81; ++d) {
      CellKey other = key;
      int code = d;
      for (int c = 0; c < 4; ++c) {
        other[c] += code % 3 - 1;
        code /= 3;
      }
      const auto it = buckets.find(other);
      if (it == buckets.end()) continue;
      for (int a : ids)
        for (int b : it->second) {
          if (b <= a) continue;
          const int ia = a / nv, ja = a % nv, ib = b / nv, jb = b % nv;
          if (std::max(std::abs(ia - ib), cyclic_distance(ja, jb, period)) < 2) continue;
          best = std::min(best, (disc.f(ia, ja) - disc.f(ib, jb)).norm());
        }
    }
  }
  return best;
}

double boundary_error(const ImmersedDisc& disc, const TransverseKnot& knot) {
  double err = 0.0;
  for (int i = 0; i < disc.nodes_u(); ++i)
    for (int j = 0; j < disc.nodes_v(); ++j) {
      if (!disc.on_boundary(i, j)) continue;
      const double t = disc.boundary_parameter(disc.u_at(i), disc.v_at(j));
      err = std::max(err, (disc.f(i, j) - knot.position(t)).norm());
    }
  return err;
}

double max_surface_value(const ImmersedDisc& disc, const StarShapedSurface& surface) {
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < disc.nodes_u(); ++i)
    for (int j = 0; j < disc.nodes_v(); ++j) best = std::max(best, surface.value(disc.f(i, j)));
  return best;
}

double immersion_margin(const ImmersedDisc& disc) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < disc.nodes_u(); ++i)
    for (int j = 0; j < disc.nodes_v(); ++j) {
      if (disc.collapsed(i, j)) continue;
      const Vec4d& a = disc.fu(i, j);
      const Vec4d& b = disc.fv(i, j);
      const double p = a.squaredNorm(), q = b.squaredNorm(), r = a.dot(b);
      const double lmin = 0.5 * (p + q) - std::sqrt(0.25 * (p - q) * (p - q) + r * r);
      best = std::min(best, std::sqrt(std::max(lmin, 0.0)));
    }
  return best;
}

double symplectic_check(const ImmersedDisc& disc) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < disc.nodes_u(); ++i)
    for (int j = 0; j < disc.nodes_v(); ++j) {
      if (disc.collapsed(i, j)) continue;
      const Vec4d& a = disc.fu(i, j);
      const Vec4d& b = disc.fv(i, j);
      best = std::min(best, omega0(a, b) / (a.norm() * b.norm()));
    }
  return best;
}

double complex_defect(const Vec4d& fu, const Vec4d& fv) {
  const Vec4d e1 = fu.normalized();
  Vec4d e2 = fv - fv.dot(e1) * e1;
  const double n2 = e2.norm();
  if (!(n2 > 0.0)) return 1.0;
  e2 /= n2;
  const Vec4d w = j_mul(e1);
  return (w - w.dot(e1) * e1 - w.dot(e2) * e2).norm();
}

std::vector<ComplexPoint> complex_points(const ImmersedDisc& disc) {
  const int nu = disc.nodes_u(), nv = disc.nodes_v();
  const int period = disc.kind() == DiscKind::Polar ? nv : 0;
  std::vector<double> d(static_cast<std::size_t>(nu) * nv, std::numeric_limits<double>::infinity());
  double worst = 0.0;
  int positive = 0, total = 0;
  for (int i = 0; i < nu; ++i)
    for (int j = 0; j < nv; ++j) {
      if (disc.collapsed(i, j)) continue;
      const double v = complex_defect(disc.fu(i, j), disc.fv(i, j));
      d[static_cast<std::size_t>(i) * nv + j] = v;
      worst = std::max(worst, v);
      positive += omega0(disc.fu(i, j), disc.fv(i, j)) > 0;
      ++total;
    }

  std::vector<ComplexPoint> out;
  if (worst < 1e-8) {
    ComplexPoint cp;
    cp.u = disc.kind() == DiscKind::Polar ? 0.0 : 0.5;
    cp.v = disc.kind() == DiscKind::Polar ? 0.0 : kPi / 2;
    cp.point = disc.map(cp.u, cp.v);
    cp.defect = worst;
    cp.holomorphic = 2 * positive >= total;
    cp.whole_disc = true;
    out.push_back(cp);
    return out;
  }

  const double du = 1.0 / disc.n_u(), dv = disc.v_at(1);
  auto objective = [&](const Eigen::Vector2d& x) {
    double u = x(0), v = x(1);
    disc.clamp(u, v);
    const double penalty = (Eigen::Vector2d(u, v) - x).norm();
    if (disc.kind() == DiscKind::Polar && u < 1e-9) return 1.0 + penalty;
    const auto [a, b] = disc.partials(u, v);
    return complex_defect(a, b) + penalty;
  };

  for (int i = 0; i < nu; ++i)
    for (int j = 0; j < nv; ++j) {
      const double here = d[static_cast<std::size_t>(i) * nv + j];
      if (!(here < 0.05)) continue;
      bool is_min = true;
      for (int a = -1; a <= 1 && is_min; ++a)
        for (int b = -1; b <= 1; ++b) {
          if (a == 0 && b == 0) continue;
          const int ii = i + a;
          int jj = j + b;
          if (ii < 0 || ii >= nu) continue;
          if (period > 0) jj = (jj + period) % period;
          else if (jj < 0 || jj >= nv) continue;
          if (d[static_cast<std::size_t>(ii) * nv + jj] < here) {
            is_min = false;
            break;
          }
        }
      if (!is_min) continue;
      const auto res = nelder_mead<2>(objective, Eigen::Vector2d(disc.u_at(i), disc.v_at(j)),
                                      0.5 * std::min(du, dv), 800, 1e-18);
      if (!(res.value < 1e-7)) continue;
      double u = res.x(0), v = res.x(1);
      disc.clamp(u, v);
      const Vec2d c = disc.disc_coordinates(u, v);
      bool dup = false;
      for (const ComplexPoint& q : out)
        if ((disc.disc_coordinates(q.u, q.v) - c).norm() < 1e-4) dup = true;
      if (dup) continue;
      const auto [a, b] = disc.partials(u, v);
      ComplexPoint cp;
      cp.u = u;
      cp.v = v;
      cp.point = disc.map(u, v);
      cp.defect = res.value;
      cp.holomorphic = omega0(a, b) > 0;
      out.push_back(cp);
    }
  return out;
}

int anti_holomorphic_count(const std::vector<ComplexPoint>& points) {
  return static_cast<int>(std::count_if(points.begin(), points.end(),
                                        [](const ComplexPoint& p) { return !p.holomorphic; }));
}

TangentialIndex tangential_index(const ImmersedDisc& disc, double tol) {
  if (!(tol > 0.0)) throw DomainError("tangential_index: tolerance must be positive");
  const int nv = disc.nodes_v();
  const bool polar = disc.kind() == DiscKind::Polar;
  const int cells_u = disc.n_u(), cells_v = disc.n_v();
  const int n_cells = cells_u * cells_v;
  auto node_j = [&](int j) { return polar ? j % nv : j; };

  struct Cell {
    Vec4d lo, hi;
    Vec2d center_disc;
    double u0, v0;
  };
  std::vector<Cell> cells(n_cells);
  double disc_diam = 0.0, mean_extent = 0.0;
  for (int i = 0; i < cells_u; ++i)
    for (int j = 0; j < cells_v; ++j) {
      Cell& c = cells[i * cells_v + j];
      const std::array<Vec4d, 4> corners = {disc.f(i, node_j(j)), disc.f(i + 1, node_j(j)),
                                            disc.f(i, node_j(j + 1)), disc.f(i + 1, node_j(j + 1))};
      c.lo = corners[0];
      c.hi = corners[0];
      double edge = 0.0;
      for (const Vec4d& p : corners) {
        c.lo = c.lo.cwiseMin(p);
        c.hi = c.hi.cwiseMax(p);
      }
      edge = std::max({(corners[0] - corners[1]).norm(), (corners[0] - corners[2]).norm(),
                       (corners[3] - corners[1]).norm(), (corners[3] - corners[2]).norm()});
      // Bulge allowance for the curvature of the map inside the cell.
      const double pad = edge * edge + 1e-12;
      c.lo.array() -= pad;
      c.hi.array() += pad;
      c.u0 = disc.u_at(i);
      c.v0 = disc.v_at(j);
      const Vec2d a = disc.disc_coordinates(c.u0, c.v0);
      const Vec2d b = disc.disc_coordinates(disc.u_at(i + 1), disc.v_at(j + 1));
      const Vec2d e = disc.disc_coordinates(disc.u_at(i + 1), c.v0);
      const Vec2d g = disc.disc_coordinates(c.u0, disc.v_at(j + 1));
      c.center_disc = disc.disc_coordinates(c.u0 + 0.5 / cells_u, c.v0 + 0.5 * disc.v_at(1));
      disc_diam = std::max({disc_diam, (a - b).norm(), (e - g).norm()});
      mean_extent += (c.hi - c.lo).maxCoeff();
    }
  mean_extent /= n_cells;
  const double exclusion = 2.0 * disc_diam;

  // Broad phase.
  const double bucket = std::max(mean_extent, 1e-9);
  std::unordered_map<CellKey, std::vector<int>, CellKeyHash> buckets;
  for (int c = 0; c < n_cells; ++c) {
    const CellKey lo = cell_of(cells[c].lo, bucket), hi = cell_of(cells[c].hi, bucket);
    long long span = 1;
    for (int k = 0; k < 4; ++k) span *= hi[k] - lo[k] + 1;
    if (span > 4096) throw ConvergenceError("tangential_index: cell too large for the spatial hash, refine the grid");
    CellKey k = lo;
    for (k[0] = lo[0]; k[0] <= hi[0]; ++k[0])
      for (k[1] = lo[1]; k[1] <= hi[1]; ++k[1])
        for (k[2] = lo[2]; k[2] <= hi[2]; ++k[2])
          for (k[3] = lo[3]; k[3] <= hi[3]; ++k[3]) buckets[k].push_back(c);
  }
  std::vector<std::uint64_t> pairs;
  for (const auto& entry : buckets) {
    const std::vector<int>& ids = entry.second;
    for (std::size_t x = 0; x < ids.size(); ++x)
      for (std::size_t y = x + 1; y < ids.size(); ++y) {
        const int a = std::min(ids[x], ids[y]), b = std::max(ids[x], ids[y]);
        const Cell &ca = cells[a], &cb = cells[b];
        if ((ca.hi.array() < cb.lo.array()).any() || (cb.hi.array() < ca.lo.array()).any()) continue;
        if (std::abs(a / cells_v - b / cells_v) <= 1 &&
            cyclic_distance(a % cells_v, b % cells_v, polar ? cells_v : 0) <= 1)
          continue;
        if ((ca.center_disc - cb.center_disc).norm() <= exclusion) continue;
        pairs.push_back(static_cast<std::uint64_t>(a) * static_cast<std::uint64_t>(n_cells) +
                        static_cast<std::uint64_t>(b));
      }
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

  // Narrow phase: Newton on f(p) = f(q) from the cell centers.
  const double du = 1.0 / cells_u, dv = disc.v_at(1);
  constexpr std::size_t chunk = 256;
  std::vector<std::vector<IntersectionRecord>> found((pairs.size() + chunk - 1) / chunk);
  parallel_chunks(pairs.size(), chunk, [&](std::size_t ci, std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      const int a = static_cast<int>(pairs[k] / static_cast<std::uint64_t>(n_cells));
      const int b = static_cast<int>(pairs[k] % static_cast<std::uint64_t>(n_cells));
      Eigen::Vector4d x(cells[a].u0 + 0.5 * du, cells[a].v0 + 0.5 * dv, cells[b].u0 + 0.5 * du,
                        cells[b].v0 + 0.5 * dv);
      Vec4d residual;
      bool ok = false;
      for (int it = 0; it < 40; ++it) {
        const Vec4d fp = disc.map(x(0), x(1)), fq = disc.map(x(2), x(3));
        residual = fp - fq;
        if (residual.norm() < 1e-14) {
          ok = true;
          break;
        }
        const auto [pu, pv] = disc.partials(x(0), x(1));
        const auto [qu, qv] = disc.partials(x(2), x(3));
        Mat4d jac;
        jac << pu, pv, -qu, -qv;
        const Eigen::FullPivLU<Mat4d> lu(jac);
        // Minimum-norm step when the sheets are tangent, so the determinant test below still sees the point.
        Eigen::Vector4d step =
            lu.isInvertible() ? Eigen::Vector4d(lu.solve(-residual)) : Eigen::Vector4d(jac.completeOrthogonalDecomposition().solve(-residual));
        const double scale = std::max(std::abs(step(0)) / du, std::abs(step(1)) / dv);
        const double scale2 = std::max(std::abs(step(2)) / du, std::abs(step(3)) / dv);
        const double limit = std::max(scale, scale2);
        if (limit > 2.0) step *= 2.0 / limit;
        x += step;
        disc.clamp(x(0), x(1));
        disc.clamp(x(2), x(3));
        if (step.norm() < 1e-15) {
          ok = residual.norm() < 1e-9;
          break;
        }
      }
      if (!ok) {
        residual = disc.map(x(0), x(1)) - disc.map(x(2), x(3));
        if (!(residual.norm() < 1e-9)) continue;
      }
      const Vec2d cp = disc.disc_coordinates(x(0), x(1)), cq = disc.disc_coordinates(x(2), x(3));
      if ((cp - cq).norm() <= 0.5 * exclusion) continue;
      // Stay near the seeding cells so each double point is attributed locally.
      if ((cp - cells[a].center_disc).norm() > 2 * disc_diam ||
          (cq - cells[b].center_disc).norm() > 2 * disc_diam)
        continue;
      const auto [pu, pv] = disc.partials(x(0), x(1));
      const auto [qu, qv] = disc.partials(x(2), x(3));
      const double norms = pu.norm() * pv.norm() * qu.norm() * qv.norm();
      IntersectionRecord rec;
      rec.params_p = Vec2d(x(0), x(1));
      rec.params_q = Vec2d(x(2), x(3));
      rec.point = 0.5 * (disc.map(x(0), x(1)) + disc.map(x(2), x(3)));
      rec.residual = residual.norm();
      rec.determinant = det4<double>(pu, pv, qu, qv) / norms;
      rec.sign = rec.determinant > 0 ? 1 : -1;
      if (std::abs(rec.determinant) < tol)
        throw DomainError(
            "tangential_index: non-transverse self-intersection, perturb the grid or the split points");
      found[ci].push_back(rec);
    }
  });

  TangentialIndex out;
  out.candidate_pairs = pairs.size();
  for (const auto& list : found)
    for (IntersectionRecord rec : list) {
      // Canonical order of the two sheets.
      const Vec2d cp = disc.disc_coordinates(rec.params_p(0), rec.params_p(1));
      const Vec2d cq = disc.disc_coordinates(rec.params_q(0), rec.params_q(1));
      if (std::make_pair(cq(0), cq(1)) < std::make_pair(cp(0), cp(1))) std::swap(rec.params_p, rec.params_q);
      bool merged = false;
      for (const IntersectionRecord& other : out.records) {
        const double dp = (disc.disc_coordinates(other.params_p(0), other.params_p(1)) -
                           disc.disc_coordinates(rec.params_p(0), rec.params_p(1)))
                              .norm();
        const double dq = (disc.disc_coordinates(other.params_q(0), other.params_q(1)) -
                           disc.disc_coordinates(rec.params_q(0), rec.params_q(1)))
                              .norm();
        if (dp < 1e-6 && dq < 1e-6) {
          if (other.sign != rec.sign)
            throw DomainError("tangential_index: duplicate double point with conflicting signs");
          merged = true;
          break;
        }
        if ((other.point - rec.point).norm() < 1e-6)
          throw DomainError("tangential_index: more than two sheets meet at one point");
      }
      if (!merged) out.records.push_back(rec);
    }
  std::sort(out.records.begin(), out.records.end(), [](const IntersectionRecord& a, const IntersectionRecord& b) {
    return std::make_tuple(a.params_p(0), a.params_p(1)) < std::make_tuple(b.params_p(0), b.params_p(1));
  });
  for (const IntersectionRecord& r : out.records) out.value += r.sign;
  return out;
}

Theorem1Report verify_theorem1(const TransverseKnot& knot, const ImmersedDisc& disc,
                               const LinkingOptions& linking, double tol) {
  Theorem1Report rep;
  rep.symplectic_min = symplectic_check(disc);
  if (!(rep.symplectic_min > 0.0)) throw DomainError("verify_theorem1: the filling is not symplectic");
  if (!(check_transverse(knot) > 0.0)) throw DomainError("verify_theorem1: knot is not transverse");
  rep.linking = self_linking(knot, linking);
  rep.lk = rep.linking.value;
  rep.index = tangential_index(disc, tol);
  rep.tan = rep.index.value;
  rep.anti_holomorphic = anti_holomorphic_count(complex_points(disc));
  rep.intersection_number = rep.lk + 1;
  rep.pass = rep.lk == 2 * rep.tan - 1 && rep.anti_holomorphic == 0;
  return rep;
}

SelfIntersectionNumber self_intersection_number(const TransverseKnot& knot, const ImmersedDisc* filling,
                                                const LinkingOptions& linking) {
  SelfIntersectionNumber out;
  out.lk = self_linking(knot, linking).value;
  out.value = out.lk + 1;
  if (filling) {
    if (!(symplectic_check(*filling) > 0.0))
      throw DomainError("self_intersection_number: the filling is not symplectic");
    out.twice_tan = 2 * tangential_index(*filling).value;
    out.cross_checked = true;
    if (out.twice_tan != out.value)
      throw VerificationError("self_intersection_number: lk + 1 differs from 2 tan of the filling");
  }
  return out;
}

void write_disc_csv(std::ostream& os, const ImmersedDisc& disc) {
  os.precision(17);
  os << "r,theta,x1,y1,x2,y2\n";
  for (int i = 0; i < disc.nodes_u(); ++i)
    for (int j = 0; j < disc.nodes_v(); ++j) {
      const Vec2d c = disc.disc_coordinates(disc.u_at(i), disc.v_at(j));
      const Vec4d& p = disc.f(i, j);
      os << c.norm() << ',' << wrap_2pi(std::atan2(c(1), c(0))) << ',' << p(0) << ',' << p(1) << ','
         << p(2) << ',' << p(3) << '\n';
    }
}

}  // namespace reeb
