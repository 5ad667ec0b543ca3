#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "reeb/cli/config.hpp"
#include "reeb/cli/run.hpp"
#include "reeb/error.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Reeb dynamics and transverse knots on star-shaped hypersurfaces of R^4"};
  std::string config_path;
  reeb::cli::RunOptions options;
  app.add_option("config", config_path, "Run configuration file")->required();
  app.add_option("--dump-dir", options.dump_dir, "Directory for CSV/JSON sample dumps");
  app.add_flag("--json-only", options.json_only, "Print the verdict only, write no dumps");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : reeb::cli::kExitInvalidInput;
  }

  std::ifstream in(config_path);
  if (!in) {
    std::cerr << "reeb-lab: cannot open " << config_path << '\n';
    return reeb::cli::kExitInvalidInput;
  }
  std::stringstream text;
  text << in.rdbuf();

  reeb::cli::RunConfig config;
  try {
    config = reeb::cli::parse_config(text.str());
  } catch (const reeb::Error& e) {
    std::cerr << "reeb-lab: " << e.what() << '\n';
    return reeb::cli::kExitInvalidInput;
  }
  options.base_dir = std::filesystem::path(config_path).parent_path().string();

  const reeb::cli::RunResult result = reeb::cli::run(config, options);
  std::cout << result.verdict.dump(2) << '\n';
  if (result.exit_code != 0 && result.verdict.contains("error"))
    std::cerr << "reeb-lab: " << result.verdict["error"]["message"].get<std::string>() << '\n';
  return result.exit_code;
}
