#pragma once

#include <exception>
#include <string>

#include <json.hpp>

#include "reeb/cli/config.hpp"
#include "reeb/maslov.hpp"
#include "reeb/surface.hpp"

namespace reeb::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConvergence = 1;
inline constexpr int kExitInvalidInput = 2;
inline constexpr int kExitVerification = 3;

struct RunOptions {
  std::string dump_dir;  // overrides output.dump_dir when set
  bool json_only = false;  // no CSV/JSON dumps
  std::string base_dir;  // resolves relative knot.path
};

struct RunResult {
  nlohmann::ordered_json verdict;
  int exit_code = kExitOk;
};

/// Never throws for numerical or input problems: they become an "error" verdict with
/// the matching exit code.
RunResult run(const RunConfig& config, const RunOptions& options = {});

int exit_code_for(const std::exception& e);

StarShapedSurface make_surface(const SurfaceSpec& spec);

nlohmann::ordered_json maslov_record(const MaslovResult& m, const char* method);

}  // namespace reeb::cli
