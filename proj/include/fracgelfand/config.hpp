#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fracgelfand {

/// Validated run configuration. Files use `key = value` lines with dotted keys; a
/// `[section]` header prefixes the keys that follow it. `#` starts a comment.
struct RunConfig {
  double a = -1.0;
  double b = 1.0;
  int n = 64;
  double s = 0.5;
  double p = 2.0;
  std::string kind = "exponential";
  std::optional<double> m;

  double tol = 1e-10;
  int max_iter = 200;
  std::optional<double> eps_reg;
  std::optional<double> lambda;  ///< solve.lambda: semilinear solve instead of g = 1

  double iteration_tol = 1e-9;
  int max_outer = 500;
  double cap = 1e8;

  std::vector<double> lambda_grid;  ///< empty: 20 points up to the lambda* lower end
  double lambdastar_tol = 1e-3;
  std::optional<double> eps_cap;
  std::vector<int> n_list = {1};

  std::string bootstrap_kind = "power_barrier";
  double bootstrap_q0 = 1.0;
  double bootstrap_n = 3.0;
  std::optional<double> bootstrap_gamma;
  int bootstrap_max_steps = 10000;

  std::string output_dir = "out";
  std::uint64_t seed = 0;

  /// Canonical `key=value` lines (sorted) of the entries present in the file.
  std::map<std::string, std::string> entries;
  /// FNV-1a 64 of the canonical entries, as 16 hex digits.
  std::string hash;
};

/// Throws ConfigError for syntax errors, unknown or duplicate keys and invalid values.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

std::uint64_t fnv1a64(const std::string& data);

/// Names of all recognized keys.
const std::vector<std::string>& config_keys();

}  // namespace fracgelfand
