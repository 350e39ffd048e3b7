#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "phifem/expression.hpp"
#include "phifem/problem.hpp"
#include "phifem/solver.hpp"

namespace phifem {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flat key-value tree parsed from an INI-style file: `[section]` headers
/// followed by `key = value` lines, '#' comments.  Keys are addressed as
/// "section.key".
class ConfigTree {
 public:
  static ConfigTree parse_file(const std::string& path);
  static ConfigTree parse_string(const std::string& text, const std::string& origin = "<string>");

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& key) const;  // whitespace/comma separated

  const std::map<std::string, std::string>& entries() const { return entries_; }
  const std::string& origin() const { return origin_; }

 private:
  [[noreturn]] void fail(const std::string& key, const std::string& why) const;
  std::map<std::string, std::string> entries_;
  std::string origin_;
};

struct DiagnosticsConfig {
  int k_max = 25;
  double mu = 0.0;          // 0 => sharp-embedding default
  double strip_delta = 0.125;
  bool moser = true;
  int multistart = 0;       // 0 disables the multistart check
  int weak_tests = 20;
};

struct OutputConfig {
  int precision = 12;
};

struct ManufacturedConfig {
  Expression u_star;            // empty when no manufactured block
  double eps = 1e-8;
  bool present = false;
};

/// Fully validated run configuration: the problem, mesh resolution, solver
/// and ladder parameters, diagnostics toggles, and output formatting.
struct RunConfig {
  SingularProblem problem;
  std::string phi_key;
  int mesh_n = 64;           // 1D cell count
  double mesh_h = 0.1;       // 2D target h
  LadderConfig ladder;
  DiagnosticsConfig diagnostics;
  OutputConfig output;
  ManufacturedConfig manufactured;
  std::uint64_t seed = 0;

  std::shared_ptr<const Mesh> build_mesh() const;
  std::shared_ptr<const Mesh> build_mesh(int n_override) const;
};

/// Parses and validates; throws ConfigError with a "section.key: reason"
/// message on any violation.
RunConfig load_run_config(const ConfigTree& tree);
RunConfig load_run_config_file(const std::string& path);

}  // namespace phifem
