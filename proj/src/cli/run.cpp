#include "reeb/cli/run.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <optional>
#include <random>

#include <Eigen/Eigenvalues>

#include "reeb/dynamics.hpp"
#include "reeb/error.hpp"
#include "reeb/filling.hpp"
#include "reeb/knot.hpp"

namespace reeb::cli {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr double kPi = std::numbers::pi;
constexpr double kBoundaryTolerance = 1e-6;
constexpr double kInsideTolerance = 1e-9;

json vec(const Vec4d& v) { return json::array({v(0), v(1), v(2), v(3)}); }
json vec(const Vec2d& v) { return json::array({v(0), v(1)}); }

json numerics_block(const Numerics& n) {
  return {{"flow_tol", n.flow_tol},         {"orbit_samples", n.orbit_samples},
          {"n_dirs", n.n_dirs},             {"degeneracy_tol", n.degeneracy_tol},
          {"pinching_samples", n.pinching_samples}, {"n_quad", n.n_quad},
          {"epsilon", n.epsilon},           {"n_poles", n.n_poles},
          {"n_r", n.n_r},                   {"n_theta", n.n_theta},
          {"filling_dirs", n.filling_dirs}, {"transverse_tol", n.transverse_tol},
          {"axiom_paths", n.axiom_paths},   {"axiom_matrices", n.axiom_matrices},
          {"seed", n.seed}};
}

/// Per-run state: the verdict under construction and where dumps go.
class Runner {
 public:
  Runner(const RunConfig& cfg, const RunOptions& opt) : cfg_(cfg), opt_(opt) {
    if (!opt.json_only) {
      dump_dir_ = opt.dump_dir.empty() ? cfg.output.dump_dir : opt.dump_dir;
    }
  }

  json& verdict() { return verdict_; }
  json& checks() { return checks_; }

  void execute() {
    switch (cfg_.task.name) {
      case Task::SurfacePinching: return surface_pinching();
      case Task::OrbitFind: return orbit_find();
      case Task::OrbitMaslov: return orbit_maslov();
      case Task::KnotSl: return knot_sl();
      case Task::KnotCurvature: return knot_curvature();
      case Task::FillLinear: return fill(false);
      case Task::FillEmbedded: return fill(true);
      case Task::VerifyThm1: return verify_thm1();
      case Task::VerifyThm2: return verify_thm2();
      case Task::MaslovAxioms: return maslov_axioms();
    }
  }

 private:
  const Numerics& num() const { return cfg_.numerics; }

  StarShapedSurface surface() const { return make_surface(cfg_.surface); }

  OrbitOptions orbit_options() const {
    OrbitOptions o;
    o.tol = num().flow_tol;
    o.n_samples = num().orbit_samples;
    return o;
  }

  LinkingOptions linking_options() const {
    LinkingOptions o;
    o.epsilon = num().epsilon;
    o.n_quad = num().n_quad;
    o.n_poles = num().n_poles;
    return o;
  }

  FillingOptions filling_options(const StarShapedSurface& s) const {
    FillingOptions o;
    o.n_r = num().n_r;
    o.n_theta = num().n_theta;
    o.assume_convex = !s.is_quadratic_builtin() && strictly_convex(s);
    return o;
  }

  bool strictly_convex(const StarShapedSurface& s) const {
    for (const Vec4d& q : sphere_lattice(num().pinching_samples))
      if (!(principal_curvatures(s, project_radial(s, q)).curvatures(2) > 0.0)) return false;
    return true;
  }

  PeriodicOrbit orbit(const StarShapedSurface& s) {
    Vec4d guess(cfg_.task.guess[0], cfg_.task.guess[1], cfg_.task.guess[2], cfg_.task.guess[3]);
    double period = cfg_.task.period;
    if (cfg_.task.orbit != "guess" && s.is_quadratic_builtin()) {
      const bool first = (s.r1() <= s.r2()) == (cfg_.task.orbit == "short");
      guess = first ? Vec4d(s.r1(), 0, 0, 0) : Vec4d(0, 0, s.r2(), 0);
      period = kPi * (first ? s.r1() * s.r1() : s.r2() * s.r2());
    } else if (cfg_.task.orbit != "guess") {
      throw DomainError("task.orbit=" + cfg_.task.orbit + " needs a builtin surface; use orbit=guess");
    }
    PeriodicOrbit o = find_periodic_orbit(s, guess, period, orbit_options());
    verdict_["orbit"] = {{"selection", cfg_.task.orbit},
                         {"base", vec(o.base)},
                         {"period", o.period},
                         {"closure_residual", o.closure_residual},
                         {"closed_form", static_cast<bool>(o.closed_form)}};
    checks_["orbit_closure"] = o.closure_residual;
    return o;
  }

  TransverseKnot knot() {
    const KnotSpec& k = cfg_.knot;
    if (k.kind == "hopf") return hopf_fiber();
    if (k.kind == "torus-orbit") return torus_orbit_knot(k.p, k.q, k.r1, k.r2);
    if (k.kind == "csv") {
      fs::path p(k.path);
      if (p.is_relative() && !opt_.base_dir.empty()) p = fs::path(opt_.base_dir) / p;
      std::ifstream in(p);
      if (!in) throw DomainError("cannot open knot file " + p.string());
      return read_knot_csv(in, surface(), p.filename().string());
    }
    return knot_from_orbit(orbit(surface()));
  }

  void describe_knot(const TransverseKnot& k) {
    verdict_["knot"] = {{"name", k.name()}, {"surface", k.surface().description()},
                        {"transversality", check_transverse(k)},
                        {"embedding_margin", embedding_margin(k)}};
    if (!(verdict_["knot"]["transversality"].get<double>() > num().transverse_tol))
      throw DomainError("knot is not positively transverse to the contact structure");
  }

  std::ofstream dump(const std::string& name) {
    fs::create_directories(dump_dir_);
    std::ofstream os(fs::path(dump_dir_) / name);
    if (!os) throw DomainError("cannot write " + (fs::path(dump_dir_) / name).string());
    dumped_.push_back(name);
    return os;
  }

  void dump_orbit(const PeriodicOrbit& o, const SL2Path* path) {
    if (dump_dir_.empty()) return;
    auto os = dump("orbit.csv");
    write_orbit_csv(os, o, path);
  }

  void dump_disc(const ImmersedDisc& d, const TangentialIndex* index) {
    if (dump_dir_.empty()) return;
    {
      auto os = dump("disc.csv");
      write_disc_csv(os, d);
    }
    if (index) {
      json arr = json::array();
      for (const IntersectionRecord& r : index->records)
        arr.push_back({{"params_p", vec(r.params_p)}, {"params_q", vec(r.params_q)},
                       {"point", vec(r.point)}, {"sign", r.sign}});
      auto os = dump("intersections.json");
      os << arr.dump(2) << '\n';
    }
  }

  json linking_record(const LinkingComputation& l) {
    checks_["linking_residual"] = l.residual;
    checks_["linking_half_epsilon_raw"] = l.raw_half_epsilon;
    return {{"value", l.value},        {"raw", l.raw},
            {"residual", l.residual},  {"odd", l.value % 2 != 0},
            {"epsilon", l.epsilon},    {"n_quad", l.n_quad},
            {"pole", vec(l.pole)},     {"pole_distance", l.pole_distance},
            {"min_separation", l.min_separation},
            {"value_half_epsilon", l.value_half_epsilon}};
  }

  json pinching_record(const PinchingReport& p) {
    return {{"min_margin", p.min_margin}, {"argmin", vec(p.argmin)}, {"samples", p.samples},
            {"pass", p.pass}};
  }

  void surface_pinching() {
    const PinchingReport p = pinching_scan(surface(), num().pinching_samples);
    verdict_["pinching"] = pinching_record(p);
    verdict_["pass"] = p.pass;
  }

  void orbit_find() {
    const PeriodicOrbit o = orbit(surface());
    const ActionReport a = action(o);
    verdict_["action"] = {{"period", a.period}, {"quadrature", a.quadrature},
                          {"difference", a.difference}};
    checks_["action_minus_period"] = a.difference;
    dump_orbit(o, nullptr);
  }

  void orbit_maslov() {
    const PeriodicOrbit o = orbit(surface());
    const SL2Path path = linearized_path(o, num().flow_tol);
    const MaslovResult m = maslov_index(path, num().n_dirs, num().degeneracy_tol);
    const CurvatureRotation c = rotation_via_curvature(o, path);
    verdict_["maslov"] = maslov_record(m, "linearized");
    const double first = rotation(path, Vec2d(1, 0));
    verdict_["curvature_integral"] = {{"rotation", c.value}, {"coarse", c.coarse},
                                      {"method", "curvature-integral"}};
    checks_["rotation_first_direction_minus_integral"] = first - c.value;
    checks_["max_det_correction"] = path.max_det_correction;
    dump_orbit(o, &path);
  }

  void knot_sl() {
    const TransverseKnot k = knot();
    describe_knot(k);
    const LinkingComputation l = self_linking(k, linking_options());
    verdict_["self_linking"] = linking_record(l);
    verdict_["sl"] = l.value;
    verdict_["pass"] = l.value % 2 != 0;
  }

  void knot_curvature() {
    const TransverseKnot k = knot();
    describe_knot(k);
    const CurvatureIntegral c = total_curvature(k);
    verdict_["total_curvature"] = {{"value", c.value},
                                   {"margin_4pi", 4 * kPi - c.value},
                                   {"below_4pi", c.value < 4 * kPi},
                                   {"n_nodes", c.n_nodes}};
    checks_["curvature_refinement_delta"] = c.refinement_delta;
    const FillingDirection d = find_filling_direction(k, num().filling_dirs);
    const Crookedness cr = crookedness(k, d.direction);
    verdict_["filling_direction"] = {{"found", d.found},         {"direction", vec(d.direction)},
                                     {"defect", d.defect},       {"t_min", d.t_min},
                                     {"t_max", d.t_max},         {"conditioning", d.conditioning}};
    verdict_["crookedness"] = {{"minima", cr.minima}, {"maxima", cr.maxima},
                               {"degenerate", cr.degenerate}};
  }

  json disc_record(const ImmersedDisc& d, const TransverseKnot& k, const StarShapedSurface& s,
                   bool& ok) {
    const double symp = symplectic_check(d);
    const double berr = boundary_error(d, k);
    const double fmax = max_surface_value(d, s);
    const int anti = anti_holomorphic_count(complex_points(d));
    ok = symp > 0.0 && berr < kBoundaryTolerance && fmax <= 1.0 + kInsideTolerance && anti == 0;
    checks_["boundary_error"] = berr;
    return {{"kind", d.kind() == DiscKind::Polar ? "polar" : "chord"},
            {"grid", {d.n_u(), d.n_v()}},
            {"symplectic_min", symp},
            {"boundary_error", berr},
            {"max_F", fmax},
            {"immersion_margin", immersion_margin(d)},
            {"anti_holomorphic", anti}};
  }

  void fill(bool embedded) {
    const TransverseKnot k = knot();
    describe_knot(k);
    const StarShapedSurface& s = k.surface();
    const FillingOptions fo = filling_options(s);
    bool ok = true;
    std::optional<ImmersedDisc> disc;
    if (embedded) {
      const FillingDirection dir = find_filling_direction(k, num().filling_dirs);
      verdict_["filling_direction"] = {{"found", dir.found}, {"direction", vec(dir.direction)},
                                       {"defect", dir.defect}};
      if (!dir.found) throw VerificationError("no height function with exactly two critical points");
      EmbeddedFilling e = embedded_filling(k, dir, fo);
      verdict_["injectivity_margin"] = e.injectivity_margin;
      disc.emplace(std::move(e.disc));
    } else {
      disc.emplace(linear_filling(k, cfg_.task.split_a, cfg_.task.split_b, fo));
    }
    bool disc_ok = false;
    verdict_["disc"] = disc_record(*disc, k, s, disc_ok);
    const TangentialIndex t = tangential_index(*disc, num().transverse_tol);
    verdict_["tan"] = t.value;
    verdict_["double_points"] = t.records.size();
    ok = disc_ok && (!embedded || t.value == 0);
    verdict_["pass"] = ok;
    dump_disc(*disc, &t);
  }

  void verify_thm1() {
    const TransverseKnot k = knot();
    describe_knot(k);
    const StarShapedSurface& s = k.surface();
    const FillingOptions fo = filling_options(s);
    std::optional<ImmersedDisc> disc;
    if (cfg_.task.filling == "flat") {
      if (s.kind() != SurfaceKind::RoundSphere)
        throw DomainError("filling=flat bounds the unit circle of the round sphere only");
      disc.emplace(flat_disc(1.0, false, fo.n_r, fo.n_theta));
    } else if (cfg_.task.filling == "embedded") {
      const FillingDirection dir = find_filling_direction(k, num().filling_dirs);
      if (!dir.found) throw VerificationError("no height function with exactly two critical points");
      disc.emplace(embedded_filling(k, dir, fo).disc);
    } else {
      disc.emplace(linear_filling(k, cfg_.task.split_a, cfg_.task.split_b, fo));
    }
    bool disc_ok = false;
    verdict_["disc"] = disc_record(*disc, k, s, disc_ok);
    const Theorem1Report r = verify_theorem1(k, *disc, linking_options(), num().transverse_tol);
    verdict_["self_linking"] = linking_record(r.linking);
    verdict_["lk"] = r.lk;
    verdict_["tan"] = r.tan;
    verdict_["anti_holomorphic"] = r.anti_holomorphic;
    verdict_["intersection_number"] = r.intersection_number;
    verdict_["twice_tan"] = 2 * r.tan;
    checks_["int_minus_twice_tan"] = r.intersection_number - 2 * r.tan;
    verdict_["pass"] = r.pass && disc_ok && r.intersection_number == 2 * r.tan;
    dump_disc(*disc, &r.index);
  }

  void verify_thm2() {
    const StarShapedSurface s = surface();
    const PinchingReport p = pinching_scan(s, num().pinching_samples);
    verdict_["pinching"] = pinching_record(p);
    if (!p.pass) {
      verdict_["pass"] = false;
      verdict_["stopped_at"] = "pinching";
      return;
    }
    const PeriodicOrbit o = orbit(s);
    const SL2Path path = linearized_path(o, num().flow_tol);
    const MaslovResult m = maslov_index(path, num().n_dirs, num().degeneracy_tol);
    verdict_["maslov"] = maslov_record(m, "linearized");
    dump_orbit(o, &path);

    const TransverseKnot k = knot_from_orbit(o);
    const CurvatureIntegral c = total_curvature(k);
    verdict_["total_curvature"] = {{"value", c.value}, {"margin_4pi", 4 * kPi - c.value}};
    checks_["curvature_refinement_delta"] = c.refinement_delta;

    const FillingDirection dir = find_filling_direction(k, num().filling_dirs);
    verdict_["filling_direction"] = {{"found", dir.found}, {"direction", vec(dir.direction)},
                                     {"defect", dir.defect}};
    bool embedded = false;
    bool disc_ok = false;
    int tan = -1;
    if (dir.found) {
      try {
        EmbeddedFilling e = embedded_filling(k, dir, filling_options(s));
        embedded = true;
        verdict_["injectivity_margin"] = e.injectivity_margin;
        verdict_["disc"] = disc_record(e.disc, k, s, disc_ok);
        const TangentialIndex t = tangential_index(e.disc, num().transverse_tol);
        tan = t.value;
        dump_disc(e.disc, &t);
      } catch (const VerificationError& err) {
        verdict_["embedded_error"] = err.what();
      }
    }
    verdict_["embedded"] = embedded;
    verdict_["tan"] = tan;
    const LinkingComputation l = self_linking(k, linking_options());
    verdict_["self_linking"] = linking_record(l);
    verdict_["sl"] = l.value;
    verdict_["pass"] = m.index == 3 && !m.degenerate && c.value < 4 * kPi && dir.found && embedded &&
                       disc_ok && tan == 0 && l.value == -1;
  }

  void maslov_axioms() {
    std::mt19937_64 rng(num().seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    // Eigenvalues in [0.2, top] in magnitude, random signs and axes.
    auto random_s = [&](double top) {
      const double l1 = (0.2 + (top - 0.2) * unit(rng)) * (unit(rng) < 0.5 ? -1 : 1);
      const double l2 = (0.2 + (top - 0.2) * unit(rng)) * (unit(rng) < 0.5 ? -1 : 1);
      const double a = kPi * unit(rng);
      Mat2d r;
      r << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
      Mat2d s = r * Vec2d(l1, l2).asDiagonal() * r.transpose();
      s(1, 0) = s(0, 1);
      return s;
    };
    int failures = 0;
    double worst_spread = 0.0;
    double worst_upper_gap = std::numeric_limits<double>::infinity();
    auto audit = [&](const SL2Path& path, const MaslovResult& m) {
      const RotationReport rep = rotation_report(path, num().n_dirs);
      worst_spread = std::max(worst_spread, rep.spread());
      for (double rot : rep.rotations) worst_upper_gap = std::min(worst_upper_gap, (m.index + 1) * kPi - rot);
      if (!(rep.spread() < kPi) || !(rep.rot_max < (m.index + 1) * kPi)) ++failures;
    };

    const SL2Path base = exp_js_path(random_s(6.0));
    const MaslovResult mb = maslov_index(base, num().n_dirs, num().degeneracy_tol);
    audit(base, mb);
    json shifts = json::array();
    for (int k = -2; k <= 2; ++k) {
      const SL2Path shifted = prepend_loops(base, k);
      const MaslovResult ms = maslov_index(shifted, num().n_dirs, num().degeneracy_tol);
      audit(shifted, ms);
      const bool ok = ms.index - mb.index == 2 * k;
      failures += !ok;
      shifts.push_back({{"k", k}, {"index", ms.index}, {"pass", ok}});
    }

    int inverse_pass = 0;
    for (int i = 0; i < num().axiom_paths; ++i) {
      // Products of hyperbolic factors turn fast; smaller spectra and finer sampling keep
      // every angular step well below pi / 2.
      const SL2Path p = product(exp_js_path(random_s(2.0), 1024), exp_js_path(random_s(2.0), 1024));
      const MaslovResult m = maslov_index(p, num().n_dirs, num().degeneracy_tol);
      const SL2Path q = inverse(p);
      const MaslovResult mi = maslov_index(q, num().n_dirs, num().degeneracy_tol);
      audit(p, m);
      audit(q, mi);
      inverse_pass += mi.index == -m.index;
    }
    failures += num().axiom_paths - inverse_pass;

    int signature_pass = 0;
    for (int i = 0; i < num().axiom_matrices; ++i) {
      const Mat2d s = random_s(6.0);
      const SL2Path p = exp_js_path(s);
      const MaslovResult m = maslov_index(p, num().n_dirs, num().degeneracy_tol);
      audit(p, m);
      const Eigen::Vector2d ev = Eigen::SelfAdjointEigenSolver<Mat2d>(s).eigenvalues();
      const int signature = (ev(0) > 0 ? 1 : -1) + (ev(1) > 0 ? 1 : -1);
      signature_pass += 2 * m.index == signature;
    }
    failures += num().axiom_matrices - signature_pass;

    verdict_["loop_shift"] = {{"base_index", mb.index}, {"shifts", shifts}};
    verdict_["inverse"] = {{"paths", num().axiom_paths}, {"pass_count", inverse_pass}};
    verdict_["signature"] = {{"matrices", num().axiom_matrices}, {"pass_count", signature_pass}};
    verdict_["bounds"] = {{"max_spread", worst_spread}, {"min_upper_gap", worst_upper_gap}};
    verdict_["pass"] = failures == 0;
  }

 public:
  json finish() {
    json out;
    out["task"] = std::string(task_name(cfg_.task.name));
    out["surface"] = {{"kind", cfg_.surface.kind}, {"r1", cfg_.surface.r1}, {"r2", cfg_.surface.r2}};
    if (!cfg_.surface.polynomial.empty()) out["surface"]["polynomial"] = cfg_.surface.polynomial;
    for (auto& [key, value] : verdict_.items()) out[key] = value;
    out["provenance"] = {{"numerics", numerics_block(num())}, {"cross_checks", checks_}};
    if (!dumped_.empty()) out["provenance"]["dumps"] = dumped_;
    return out;
  }

 private:
  const RunConfig& cfg_;
  const RunOptions& opt_;
  std::string dump_dir_;
  std::vector<std::string> dumped_;
  json verdict_ = json::object();
  json checks_ = json::object();
};

const char* error_kind(const std::exception& e) {
  if (dynamic_cast<const ConvergenceError*>(&e)) return "convergence";
  if (dynamic_cast<const VerificationError*>(&e)) return "verification";
  if (dynamic_cast<const DomainError*>(&e)) return "domain";
  return "internal";
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConvergenceError*>(&e)) return kExitConvergence;
  if (dynamic_cast<const VerificationError*>(&e)) return kExitVerification;
  return kExitInvalidInput;
}

StarShapedSurface make_surface(const SurfaceSpec& spec) {
  if (spec.kind == "sphere") return StarShapedSurface::round_sphere();
  if (spec.kind == "ellipsoid") return StarShapedSurface::ellipsoid(spec.r1, spec.r2);
  if (spec.kind == "implicit-polynomial")
    return StarShapedSurface::implicit_polynomial(Polynomial4::parse(spec.polynomial));
  throw DomainError("unknown surface kind '" + spec.kind + "'");
}

json maslov_record(const MaslovResult& m, const char* method) {
  json w = std::isnan(m.witness_direction) ? json(nullptr) : json(m.witness_direction);
  return {{"index", m.index},
          {"degenerate", m.degenerate},
          {"rot_min", m.rot_min},
          {"rot_max", m.rot_max},
          {"n_dirs", m.n_dirs},
          {"witness_direction", w},
          {"candidates", {m.candidate_low, m.candidate_high}},
          {"method", method}};
}

RunResult run(const RunConfig& config, const RunOptions& options) {
  RunResult result;
  Runner runner(config, options);
  try {
    runner.execute();
    result.verdict = runner.finish();
    const auto it = result.verdict.find("pass");
    if (it != result.verdict.end() && !it->get<bool>()) result.exit_code = kExitVerification;
  } catch (const std::exception& e) {
    runner.verdict()["pass"] = false;
    runner.verdict()["error"] = {{"kind", error_kind(e)}, {"message", e.what()}};
    result.verdict = runner.finish();
    result.exit_code = exit_code_for(e);
  }
  return result;
}

}  // namespace reeb::cli
