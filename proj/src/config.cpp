#include "fracgelfand/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "fracgelfand/errors.hpp"

namespace fracgelfand {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string unquote(const std::string& v) {
  if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'') && v.back() == v.front()) {
    return v.substr(1, v.size() - 2);
  }
  return v;
}

double to_double(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  char* end = nullptr;
  errno = 0;
  const double x = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE || !std::isfinite(x)) {
    throw ConfigError("config: '" + key + "' expects a finite number, got '" + v + "'");
  }
  return x;
}

long long to_integer(const std::string& key, const std::string& v) {
  const double x = to_double(key, v);
  if (x != std::floor(x) || std::abs(x) > 9.0e15) {
    throw ConfigError("config: '" + key + "' expects an integer, got '" + v + "'");
  }
  return static_cast<long long>(x);
}

std::vector<std::string> split_list(const std::string& v) {
  std::string t = trim(v);
  if (!t.empty() && t.front() == '[') {
    if (t.back() != ']') throw ConfigError("config: unterminated list '" + v + "'");
    t = t.substr(1, t.size() - 2);
  }
  std::vector<std::string> items;
  std::stringstream ss(t);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw ConfigError("config: empty list element in '" + v + "'");
    items.push_back(item);
  }
  return items;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError("config: " + message);
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "domain.a",          "domain.b",          "mesh.n",
      "frac.s",            "frac.p",            "nonlinearity.kind",
      "nonlinearity.m",    "solver.tol",        "solver.max_iter",
      "solver.eps_reg",    "solve.lambda",      "iteration.tol",
      "iteration.max_outer", "iteration.cap",   "branch.lambda_grid",
      "branch.lambda_grid.min", "branch.lambda_grid.max", "branch.lambda_grid.steps",
      "branch.lambda_grid.spacing", "lambdastar.tol", "stability.eps_cap",
      "report.N_list",     "bootstrap.kind",    "bootstrap.q0",
      "bootstrap.N",       "bootstrap.gamma",   "bootstrap.max_steps",
      "output.dir",        "seed",
  };
  return keys;
}

std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::map<std::string, std::string>& kv = cfg.entries;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line.erase(hash_pos);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.find('=') == std::string::npos) {
      require(line.back() == ']', "line " + std::to_string(lineno) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    require(eq != std::string::npos, "line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    require(!key.empty(), "line " + std::to_string(lineno) + ": empty key");
    if (!section.empty()) key = section + "." + key;
    const auto& known = config_keys();
    require(std::find(known.begin(), known.end(), key) != known.end(), "unknown key '" + key + "'");
    require(!kv.count(key), "duplicate key '" + key + "'");
    require(!value.empty(), "key '" + key + "' has no value");
    kv[key] = value;
  }

  auto get = [&](const std::string& key) -> const std::string* {
    const auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };
  if (auto v = get("domain.a")) cfg.a = to_double("domain.a", *v);
  if (auto v = get("domain.b")) cfg.b = to_double("domain.b", *v);
  if (auto v = get("mesh.n")) cfg.n = static_cast<int>(to_integer("mesh.n", *v));
  if (auto v = get("frac.s")) cfg.s = to_double("frac.s", *v);
  if (auto v = get("frac.p")) cfg.p = to_double("frac.p", *v);
  if (auto v = get("nonlinearity.kind")) cfg.kind = unquote(*v);
  if (auto v = get("nonlinearity.m")) cfg.m = to_double("nonlinearity.m", *v);
  if (auto v = get("solver.tol")) cfg.tol = to_double("solver.tol", *v);
  if (auto v = get("solver.max_iter")) cfg.max_iter = static_cast<int>(to_integer("solver.max_iter", *v));
  if (auto v = get("solver.eps_reg")) cfg.eps_reg = to_double("solver.eps_reg", *v);
  if (auto v = get("solve.lambda")) cfg.lambda = to_double("solve.lambda", *v);
  if (auto v = get("iteration.tol")) cfg.iteration_tol = to_double("iteration.tol", *v);
  if (auto v = get("iteration.max_outer")) {
    cfg.max_outer = static_cast<int>(to_integer("iteration.max_outer", *v));
  }
  if (auto v = get("iteration.cap")) cfg.cap = to_double("iteration.cap", *v);
  if (auto v = get("lambdastar.tol")) cfg.lambdastar_tol = to_double("lambdastar.tol", *v);
  if (auto v = get("stability.eps_cap")) cfg.eps_cap = to_double("stability.eps_cap", *v);
  if (auto v = get("report.N_list")) {
    cfg.n_list.clear();
    for (const auto& item : split_list(*v)) {
      cfg.n_list.push_back(static_cast<int>(to_integer("report.N_list", item)));
    }
  }
  if (auto v = get("bootstrap.kind")) cfg.bootstrap_kind = unquote(*v);
  if (auto v = get("bootstrap.q0")) cfg.bootstrap_q0 = to_double("bootstrap.q0", *v);
  if (auto v = get("bootstrap.N")) cfg.bootstrap_n = to_double("bootstrap.N", *v);
  if (auto v = get("bootstrap.gamma")) cfg.bootstrap_gamma = to_double("bootstrap.gamma", *v);
  if (auto v = get("bootstrap.max_steps")) {
    cfg.bootstrap_max_steps = static_cast<int>(to_integer("bootstrap.max_steps", *v));
  }
  if (auto v = get("output.dir")) cfg.output_dir = unquote(*v);
  if (auto v = get("seed")) {
    const long long seed = to_integer("seed", *v);
    require(seed >= 0, "seed must be nonnegative");
    cfg.seed = static_cast<std::uint64_t>(seed);
  }

  const bool grid_parts = get("branch.lambda_grid.min") || get("branch.lambda_grid.max") ||
                          get("branch.lambda_grid.steps") || get("branch.lambda_grid.spacing");
  if (auto v = get("branch.lambda_grid")) {
    require(!grid_parts, "branch.lambda_grid given both as a list and as min/max/steps");
    for (const auto& item : split_list(*v)) {
      cfg.lambda_grid.push_back(to_double("branch.lambda_grid", item));
    }
  } else if (grid_parts) {
    const auto* lo = get("branch.lambda_grid.min");
    const auto* hi = get("branch.lambda_grid.max");
    const auto* steps = get("branch.lambda_grid.steps");
    require(lo && hi && steps, "branch.lambda_grid needs min, max and steps");
    const double a = to_double("branch.lambda_grid.min", *lo);
    const double b = to_double("branch.lambda_grid.max", *hi);
    const long long k = to_integer("branch.lambda_grid.steps", *steps);
    const std::string spacing = get("branch.lambda_grid.spacing")
                                    ? unquote(*get("branch.lambda_grid.spacing"))
                                    : std::string("linear");
    require(spacing == "linear" || spacing == "geometric",
            "branch.lambda_grid.spacing must be linear or geometric");
    require(a > 0.0 && b > a, "branch.lambda_grid needs 0 < min < max");
    require(k >= 1 && k <= 100000, "branch.lambda_grid.steps must be in [1, 100000]");
    for (long long i = 0; i < k; ++i) {
      const double t = k == 1 ? 0.0 : double(i) / double(k - 1);
      cfg.lambda_grid.push_back(spacing == "linear" ? a + (b - a) * t
                                                    : a * std::pow(b / a, t));
    }
  }

  require(cfg.a < cfg.b, "domain.a must be smaller than domain.b");
  require(cfg.n >= 4 && cfg.n <= 20000, "mesh.n must be in [4, 20000]");
  require(cfg.s > 0.0 && cfg.s < 1.0, "frac.s must lie in (0, 1)");
  require(cfg.p > 1.0, "frac.p must exceed 1");
  require(cfg.kind == "exponential" || cfg.kind == "power",
          "nonlinearity.kind must be exponential or power");
  if (cfg.kind == "power") {
    require(cfg.m.has_value(), "nonlinearity.m is required for the power kind");
    require(*cfg.m > 0.0, "nonlinearity.m must be positive");
  } else {
    require(!cfg.m.has_value(), "nonlinearity.m applies to the power kind only");
  }
  require(cfg.tol > 0.0, "solver.tol must be positive");
  require(cfg.max_iter >= 1, "solver.max_iter must be positive");
  if (cfg.eps_reg) require(*cfg.eps_reg >= 0.0, "solver.eps_reg must be nonnegative");
  if (cfg.lambda) require(*cfg.lambda >= 0.0, "solve.lambda must be nonnegative");
  require(cfg.iteration_tol > 0.0, "iteration.tol must be positive");
  require(cfg.max_outer >= 1, "iteration.max_outer must be positive");
  require(cfg.cap > 0.0, "iteration.cap must be positive");
  for (std::size_t i = 0; i < cfg.lambda_grid.size(); ++i) {
    require(cfg.lambda_grid[i] > 0.0 && (i == 0 || cfg.lambda_grid[i] > cfg.lambda_grid[i - 1]),
            "branch.lambda_grid must be positive and strictly increasing");
  }
  require(cfg.lambdastar_tol > 0.0 && cfg.lambdastar_tol < 1.0, "lambdastar.tol must lie in (0, 1)");
  if (cfg.eps_cap) require(*cfg.eps_cap >= 0.0, "stability.eps_cap must be nonnegative");
  require(!cfg.n_list.empty(), "report.N_list must not be empty");
  for (int N : cfg.n_list) require(N >= 1, "report.N_list entries must be integers >= 1");
  require(cfg.bootstrap_kind == "power_barrier" || cfg.bootstrap_kind == "conjugate" ||
              cfg.bootstrap_kind == "gamma_weighted",
          "bootstrap.kind must be power_barrier, conjugate or gamma_weighted");
  require(cfg.bootstrap_q0 >= 1.0, "bootstrap.q0 must be >= 1");
  require(cfg.bootstrap_n >= 1.0, "bootstrap.N must be >= 1");
  require(cfg.bootstrap_max_steps >= 1, "bootstrap.max_steps must be positive");
  require(!cfg.output_dir.empty(), "output.dir must not be empty");

  std::string canonical;
  for (const auto& [k, v] : kv) canonical += k + "=" + v + "\n";
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(canonical)));
  cfg.hash = buf;
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace fracgelfand
