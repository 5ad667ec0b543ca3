#include "reeb/cli/config.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <vector>

#include "reeb/error.hpp"

namespace reeb::cli {

namespace {

constexpr std::array<std::pair<Task, std::string_view>, 10> kTasks = {{
    {Task::SurfacePinching, "surface-pinching"},
    {Task::OrbitFind, "orbit-find"},
    {Task::OrbitMaslov, "orbit-maslov"},
    {Task::KnotSl, "knot-sl"},
    {Task::KnotCurvature, "knot-curvature"},
    {Task::FillLinear, "fill-linear"},
    {Task::FillEmbedded, "fill-embedded"},
    {Task::VerifyThm1, "verify-thm1"},
    {Task::VerifyThm2, "verify-thm2"},
    {Task::MaslovAxioms, "maslov-axioms"},
}};

[[noreturn]] void fail(int line, const std::string& what) {
  throw DomainError("config line " + std::to_string(line) + ": " + what);
}

double to_double(std::string_view s, int line, std::string_view key) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
    fail(line, "'" + std::string(key) + "' expects a number, got '" + std::string(s) + "'");
  return v;
}

long long to_int(std::string_view s, int line, std::string_view key) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    fail(line, "'" + std::string(key) + "' expects an integer, got '" + std::string(s) + "'");
  return v;
}

std::vector<double> to_list(std::string_view s, int line, std::string_view key, std::size_t n) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t comma = s.find(',', start);
    const std::size_t end = comma == std::string_view::npos ? s.size() : comma;
    out.push_back(to_double(s.substr(start, end - start), line, key));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (out.size() != n)
    fail(line, "'" + std::string(key) + "' expects " + std::to_string(n) + " comma-separated numbers");
  return out;
}

struct Entry {
  std::string section;
  std::string key;
  std::string value;
  int line;
};

std::vector<Entry> tokenize(std::string_view text) {
  std::vector<Entry> out;
  std::string section;
  int line = 1;
  std::size_t i = 0;
  auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
  auto is_key = [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
  };
  while (i < text.size()) {
    const char c = text[i];
    if (c == '\n') {
      ++line;
      ++i;
    } else if (is_space(c)) {
      ++i;
    } else if (c == '#' || c == ';') {
      while (i < text.size() && text[i] != '\n') ++i;
    } else if (c == '[') {
      const std::size_t close = text.find(']', i);
      const std::size_t nl = text.find('\n', i);
      if (close == std::string_view::npos || (nl != std::string_view::npos && nl < close))
        fail(line, "unterminated section header");
      section = std::string(text.substr(i + 1, close - i - 1));
      i = close + 1;
    } else if (is_key(c)) {
      const std::size_t k0 = i;
      while (i < text.size() && is_key(text[i])) ++i;
      std::string key(text.substr(k0, i - k0));
      while (i < text.size() && is_space(text[i])) ++i;
      if (i >= text.size() || text[i] != '=') fail(line, "expected '=' after '" + key + "'");
      ++i;
      while (i < text.size() && is_space(text[i])) ++i;
      std::string value;
      if (i < text.size() && text[i] == '"') {
        const std::size_t close = text.find('"', i + 1);
        if (close == std::string_view::npos) fail(line, "unterminated quoted value");
        value = std::string(text.substr(i + 1, close - i - 1));
        if (value.find('\n') != std::string::npos) fail(line, "quoted value spans lines");
        i = close + 1;
      } else {
        // Lists may put blanks after the commas: "0.5, 2.5".
        do {
          while (i < text.size() && is_space(text[i])) ++i;
          const std::size_t v0 = i;
          while (i < text.size() && !is_space(text[i]) && text[i] != '\n') ++i;
          value += text.substr(v0, i - v0);
        } while (!value.empty() && value.back() == ',');
      }
      if (value.empty()) fail(line, "empty value for '" + key + "'");
      if (section.empty()) fail(line, "'" + key + "' appears before any section header");
      out.push_back({section, std::move(key), std::move(value), line});
    } else {
      fail(line, std::string("unexpected character '") + c + "'");
    }
  }
  return out;
}

template <typename T>
void positive(T v, int line, std::string_view key) {
  if (!(v > 0)) fail(line, "'" + std::string(key) + "' must be positive");
}

}  // namespace

std::string_view task_name(Task task) {
  for (const auto& [t, name] : kTasks)
    if (t == task) return name;
  return "unknown";
}

RunConfig parse_config(std::string_view text) {
  RunConfig cfg;
  bool have_task = false;
  std::map<std::string, int> seen;

  using Setter = std::function<void(const Entry&)>;
  auto num = [](double& dst, bool must_be_positive) {
    return [&dst, must_be_positive](const Entry& e) {
      dst = to_double(e.value, e.line, e.key);
      if (must_be_positive) positive(dst, e.line, e.key);
    };
  };
  auto integer = [](int& dst, int min) {
    return [&dst, min](const Entry& e) {
      const long long v = to_int(e.value, e.line, e.key);
      if (v < min || v > 1'000'000'000)
        fail(e.line, "'" + e.key + "' must be an integer >= " + std::to_string(min));
      dst = static_cast<int>(v);
    };
  };
  auto choice = [](std::string& dst, std::initializer_list<std::string_view> allowed) {
    std::vector<std::string_view> opts(allowed);
    return [&dst, opts](const Entry& e) {
      for (std::string_view o : opts)
        if (e.value == o) {
          dst = e.value;
          return;
        }
      fail(e.line, "'" + e.value + "' is not a valid value for '" + e.key + "'");
    };
  };

  Numerics& n = cfg.numerics;
  std::map<std::string, std::map<std::string, Setter>> table;
  table["surface"] = {
      {"kind", choice(cfg.surface.kind, {"sphere", "ellipsoid", "implicit-polynomial"})},
      {"r1", num(cfg.surface.r1, true)},
      {"r2", num(cfg.surface.r2, true)},
      {"polynomial", [&](const Entry& e) { cfg.surface.polynomial = e.value; }},
  };
  table["task"] = {
      {"name",
       [&](const Entry& e) {
         for (const auto& [t, name] : kTasks)
           if (e.value == name) {
             cfg.task.name = t;
             have_task = true;
             return;
           }
         fail(e.line, "unknown task '" + e.value + "'");
       }},
      {"orbit", choice(cfg.task.orbit, {"short", "long", "guess"})},
      {"guess",
       [&](const Entry& e) {
         const auto v = to_list(e.value, e.line, e.key, 4);
         cfg.task.guess = {v[0], v[1], v[2], v[3]};
       }},
      {"period", num(cfg.task.period, true)},
      {"split",
       [&](const Entry& e) {
         const auto v = to_list(e.value, e.line, e.key, 2);
         cfg.task.split_a = v[0];
         cfg.task.split_b = v[1];
       }},
      {"filling", choice(cfg.task.filling, {"linear", "embedded", "flat"})},
  };
  table["knot"] = {
      {"kind", choice(cfg.knot.kind, {"orbit", "hopf", "torus-orbit", "csv"})},
      {"p", integer(cfg.knot.p, -1000)},
      {"q", integer(cfg.knot.q, -1000)},
      {"r1", num(cfg.knot.r1, true)},
      {"r2", num(cfg.knot.r2, true)},
      {"path", [&](const Entry& e) { cfg.knot.path = e.value; }},
  };
  table["numerics"] = {
      {"flow_tol", num(n.flow_tol, true)},
      {"orbit_samples",
       [&, set = integer(n.orbit_samples, 16)](const Entry& e) {
         set(e);
         if (n.orbit_samples % 4 != 0) fail(e.line, "'orbit_samples' must be a multiple of 4");
       }},
      {"n_dirs", integer(n.n_dirs, 4)},
      {"degeneracy_tol", num(n.degeneracy_tol, true)},
      {"pinching_samples", integer(n.pinching_samples, 10)},
      {"n_quad", integer(n.n_quad, 16)},
      {"epsilon", num(n.epsilon, true)},
      {"n_poles", integer(n.n_poles, 1)},
      {"n_r", integer(n.n_r, 2)},
      {"n_theta", integer(n.n_theta, 4)},
      {"filling_dirs", integer(n.filling_dirs, 1)},
      {"transverse_tol", num(n.transverse_tol, true)},
      {"axiom_paths", integer(n.axiom_paths, 1)},
      {"axiom_matrices", integer(n.axiom_matrices, 1)},
      {"seed",
       [&](const Entry& e) {
         const long long v = to_int(e.value, e.line, e.key);
         if (v < 0) fail(e.line, "'seed' must be nonnegative");
         n.seed = static_cast<unsigned long long>(v);
       }},
  };
  table["output"] = {
      {"dump_dir", [&](const Entry& e) { cfg.output.dump_dir = e.value; }},
  };

  for (const Entry& e : tokenize(text)) {
    const auto sec = table.find(e.section);
    if (sec == table.end()) fail(e.line, "unknown section [" + e.section + "]");
    const auto key = sec->second.find(e.key);
    if (key == sec->second.end()) fail(e.line, "unknown key '" + e.key + "' in [" + e.section + "]");
    const std::string full = e.section + "." + e.key;
    if (seen.count(full)) fail(e.line, "duplicate key '" + full + "'");
    seen[full] = e.line;
    key->second(e);
  }

  if (!have_task) throw DomainError("task.name required");
  if (cfg.surface.kind == "implicit-polynomial" && cfg.surface.polynomial.empty())
    throw DomainError("surface.polynomial required for kind=implicit-polynomial");
  if (cfg.surface.kind != "implicit-polynomial" && !cfg.surface.polynomial.empty())
    throw DomainError("surface.polynomial only applies to kind=implicit-polynomial");
  if (cfg.knot.kind == "csv" && cfg.knot.path.empty()) throw DomainError("knot.path required for kind=csv");
  return cfg;
}

}  // namespace reeb::cli
