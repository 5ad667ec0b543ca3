#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "reeb/cli/config.hpp"
#include "reeb/cli/run.hpp"
#include "reeb/error.hpp"

using namespace reeb;
using namespace reeb::cli;

namespace {

std::string error_of(std::string_view text) {
  try {
    parse_config(text);
  } catch (const DomainError& e) {
    return e.what();
  }
  return {};
}

RunResult run_text(std::string_view text, const RunOptions& opt = {}) { return run(parse_config(text), opt); }

}  // namespace

TEST_CASE("parse_config") {
  const RunConfig c = parse_config("[surface] kind=ellipsoid r1=1 r2=1.4142 [task] name=orbit-maslov");
  CHECK(c.surface.kind == "ellipsoid");
  CHECK(c.surface.r1 == 1.0);
  CHECK(c.surface.r2 == 1.4142);
  CHECK(c.task.name == Task::OrbitMaslov);
  CHECK(c.numerics.n_dirs == 64);

  const RunConfig full = parse_config(
      "# comment\n"
      "[surface]\nkind = implicit-polynomial\npolynomial = \"x1^2 + y1^2 + x2^2 + y2^2\"\n"
      "[task]\nname = verify-thm1 ; trailing comment\nfilling = flat\nsplit = 0.5, 2.5\n"
      "[knot]\nkind = torus-orbit\np = 2\nq = 3\n"
      "[numerics]\nn_quad = 1024\nepsilon = 0.005\nseed = 7\n"
      "[output]\ndump_dir = out\n");
  CHECK(full.surface.polynomial == "x1^2 + y1^2 + x2^2 + y2^2");
  CHECK(full.task.filling == "flat");
  CHECK(full.task.split_a == 0.5);
  CHECK(full.task.split_b == 2.5);
  CHECK(full.numerics.n_quad == 1024);
  CHECK(full.numerics.epsilon == 0.005);
  CHECK(full.numerics.seed == 7);
  CHECK(full.output.dump_dir == "out");
}

TEST_CASE("parse_config errors") {
  CHECK(error_of("[surface] kind=sphere") == "task.name required");
  CHECK(error_of("[surface] r2=-1 [task] name=orbit-find").find("line 1") != std::string::npos);
  CHECK(error_of("[surface] r2=-1 [task] name=orbit-find").find("positive") != std::string::npos);
  CHECK(error_of("[task]\nname=orbit-find\nbogus=1").find("line 3: unknown key") != std::string::npos);
  CHECK(error_of("[mystery] a=1 [task] name=orbit-find").find("unknown section") != std::string::npos);
  CHECK(error_of("[task] name=dance").find("unknown task") != std::string::npos);
  CHECK(error_of("[task] name=orbit-find name=orbit-find").find("duplicate") != std::string::npos);
  CHECK(error_of("[task] name=orbit-find [numerics] flow_tol=0").find("positive") != std::string::npos);
  CHECK(error_of("[task] name=orbit-find [numerics] n_dirs=1.5").find("integer") != std::string::npos);
  CHECK(error_of("[task] name=orbit-find [numerics] orbit_samples=18").find("multiple of 4") != std::string::npos);
  CHECK(error_of("[task] name=orbit-find\nguess=1,2").find("4 comma-separated") != std::string::npos);
  CHECK(error_of("name=orbit-find").find("before any section") != std::string::npos);
  CHECK(error_of("[task name=orbit-find").find("unterminated") != std::string::npos);
  CHECK(error_of("[surface] kind=implicit-polynomial [task] name=orbit-find").find("polynomial required") !=
        std::string::npos);
  CHECK(error_of("[knot] kind=csv [task] name=knot-sl").find("knot.path") != std::string::npos);
}

TEST_CASE("verify-thm2 on ellipsoid(1, sqrt 2)") {
  const RunResult r = run_text("[surface] kind=ellipsoid r1=1 r2=1.4142135623730951 [task] name=verify-thm2");
  CHECK(r.exit_code == 0);
  const auto& v = r.verdict;
  CHECK(v["pinching"]["pass"].get<bool>());
  CHECK(v["maslov"]["index"].get<int>() == 3);
  CHECK(v["embedded"].get<bool>());
  CHECK(v["sl"].get<int>() == -1);
  CHECK(v["pass"].get<bool>());
  CHECK(v["provenance"]["numerics"]["n_quad"].get<int>() == 512);
}

TEST_CASE("orbit-maslov on the sphere reports the degenerate index") {
  const RunResult r = run_text("[surface] kind=sphere [task] name=orbit-maslov");
  CHECK(r.exit_code == 0);
  CHECK(r.verdict["maslov"]["index"].get<int>() == 4);
  CHECK(r.verdict["maslov"]["degenerate"].get<bool>());
  CHECK(r.verdict["maslov"]["method"] == "linearized");
}

TEST_CASE("verify-thm2 on ellipsoid(1, 3) stops at pinching") {
  const RunResult r = run_text("[surface] kind=ellipsoid r1=1 r2=3 [task] name=verify-thm2");
  CHECK(r.exit_code == kExitVerification);
  CHECK_FALSE(r.verdict["pinching"]["pass"].get<bool>());
  CHECK(r.verdict["stopped_at"] == "pinching");
}

TEST_CASE("exit codes") {
  CHECK(run_text("[surface] kind=sphere [task] name=knot-sl [knot] kind=csv path=/nonexistent.csv").exit_code ==
        kExitInvalidInput);
  CHECK(run_text("[surface] kind=sphere [task] name=orbit-find orbit=guess guess=0,0,0,0").exit_code ==
        kExitInvalidInput);
  CHECK(exit_code_for(ConvergenceError("x")) == kExitConvergence);
  CHECK(exit_code_for(VerificationError("x")) == kExitVerification);
  CHECK(exit_code_for(DomainError("x")) == kExitInvalidInput);
  const RunResult err = run_text("[surface] kind=sphere [task] name=orbit-find orbit=guess guess=0,0,0,0");
  CHECK(err.verdict["error"]["kind"] == "domain");
}

TEST_CASE("verdicts are deterministic and round-trip through JSON") {
  const std::string cfg = "[task] name=verify-thm1 filling=linear [knot] kind=torus-orbit";
  const RunResult a = run_text(cfg);
  const RunResult b = run_text(cfg);
  CHECK(a.exit_code == 0);
  CHECK(a.verdict.dump() == b.verdict.dump());
  CHECK(nlohmann::ordered_json::parse(a.verdict.dump()) == a.verdict);
  CHECK(a.verdict["lk"].get<int>() == 1);
  CHECK(a.verdict["tan"].get<int>() == 1);
  CHECK(a.verdict["intersection_number"].get<int>() == 2);
}

TEST_CASE("dumps") {
  const auto dir = std::filesystem::temp_directory_path() / "reeb_lab_test_dumps";
  std::filesystem::remove_all(dir);
  RunOptions opt;
  opt.dump_dir = dir.string();
  const RunResult r = run_text("[task] name=fill-linear [knot] kind=torus-orbit", opt);
  CHECK(r.exit_code == 0);
  CHECK(std::filesystem::exists(dir / "disc.csv"));
  std::ifstream in(dir / "intersections.json");
  const auto records = nlohmann::json::parse(in);
  REQUIRE(records.size() == 1);
  CHECK(records[0]["sign"].get<int>() == 1);

  const RunResult o = run_text("[surface] kind=sphere [task] name=orbit-maslov", opt);
  std::ifstream orbit(dir / "orbit.csv");
  std::string header;
  std::getline(orbit, header);
  CHECK(header == "t,x1,y1,x2,y2,phi11,phi12,phi21,phi22");

  RunOptions quiet = opt;
  quiet.json_only = true;
  std::filesystem::remove_all(dir);
  run_text("[surface] kind=sphere [task] name=orbit-maslov", quiet);
  CHECK_FALSE(std::filesystem::exists(dir));
  std::filesystem::remove_all(dir);
  (void)o;
}

TEST_CASE("maslov-axioms task") {
  const RunResult r = run_text("[task] name=maslov-axioms [numerics] axiom_paths=5 axiom_matrices=10");
  CHECK(r.exit_code == 0);
  CHECK(r.verdict["inverse"]["pass_count"].get<int>() == 5);
  CHECK(r.verdict["signature"]["pass_count"].get<int>() == 10);
  CHECK(r.verdict["bounds"]["max_spread"].get<double>() < 3.141592653589793);
}
