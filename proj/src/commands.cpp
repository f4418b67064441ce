#include "fracgelfand/commands.hpp"

#include <algorithm>
#include <cstdlib>
#include <limits>
#include <optional>
#include <filesystem>
#include <functional>
#include <random>

#include "fracgelfand/branch.hpp"
#include "fracgelfand/dirichlet_solver.hpp"
#include "fracgelfand/errors.hpp"
#include "fracgelfand/io.hpp"
#include "fracgelfand/nonlocal_operator.hpp"
#include "fracgelfand/regularity.hpp"
#include "fracgelfand/stability.hpp"

namespace fracgelfand {

namespace {

using Json = nlohmann::ordered_json;

// A file to be written once every computation of the command has succeeded.
struct PendingFile {
  std::string name;
  std::function<void(const std::string& path)> write;
};

class Session {
 public:
  Session(const std::string& command, const RunConfig& cfg)
      : cfg_(cfg),
        nl_(cfg.kind == "power" ? Nonlinearity::power(*cfg.m) : Nonlinearity::exponential()),
        mesh_(build_mesh(cfg.a, cfg.b, cfg.n)),
        kw_(build_kernel_weights(mesh_, cfg.s, cfg.p)) {
    meta_.command = command;
    meta_.config_hash = cfg.hash;
    iteration_.tol = cfg.iteration_tol;
    iteration_.max_outer = cfg.max_outer;
    iteration_.cap = cfg.cap;
    iteration_.inner = solve_options();
  }

  SolveOptions solve_options() const {
    SolveOptions o;
    o.tol = cfg_.tol;
    o.max_iter = cfg_.max_iter;
    o.eps_reg = cfg_.eps_reg;
    return o;
  }

  Problem problem() const { return Problem{kw_, nl_, iteration_}; }

  std::string nonlinearity_label() const {
    if (nl_.kind() == Nonlinearity::Kind::power) return "power(m=" + format_double(nl_.m()) + ")";
    return nl_.name();
  }

  // Minimal solution at cfg.lambda, or at lambda_hat when the config names none.
  std::pair<double, MonotoneResult> minimal_solution() {
    stage = "lambda_hat";
    const double lambda = cfg_.lambda.value_or(lambda_hat(kw_, nl_));
    stage = "monotone_iteration";
    MonotoneResult run = monotone_iteration(kw_, nl_, lambda, Eigen::VectorXd::Zero(kw_.size()),
                                            std::nullopt, iteration_);
    if (!run.converged()) {
      throw Error("monotone iteration diverged at lambda = " + format_double(lambda));
    }
    return {lambda, std::move(run)};
  }

  Json thresholds_body() {
    stage = "dimension_report";
    Json reports = Json::array();
    for (int N : cfg_.n_list) {
      const DimensionReport rep = dimension_report(N, cfg_.s, cfg_.p, nl_);
      Json r;
      r["N"] = N;
      for (const auto& [k, v] : rep.common) r[k] = json_number(v);
      Json theorems = Json::object();
      for (const auto& e : rep.entries) {
        Json t;
        t["applicable"] = e.applicable;
        if (!e.applicable) t["reason"] = e.reason;
        if (e.energy_class) t["energy_class"] = *e.energy_class;
        if (e.bounded) t["bounded"] = *e.bounded;
        for (const auto& [k, v] : e.values) t[k] = json_number(v);
        if (!e.lq_range.empty()) t["lq_range"] = e.lq_range;
        theorems[e.key] = std::move(t);
      }
      r["theorems"] = std::move(theorems);
      reports.push_back(std::move(r));
    }
    Json body;
    body["s"] = cfg_.s;
    body["p"] = cfg_.p;
    body["nonlinearity"] = nonlinearity_label();
    body["reports"] = std::move(reports);
    return body;
  }

  void add_csv(const std::string& name, std::vector<std::string> header,
               std::vector<std::vector<std::string>> rows, std::vector<std::string> comments = {},
               std::vector<std::string> trailer = {}) {
    pending_.push_back({name, [=, this](const std::string& path) {
                          write_csv(path, meta_, header, rows, comments, trailer);
                        }});
  }

  void add_json(const std::string& name, Json body) {
    pending_.push_back(
        {name, [=, this](const std::string& path) { write_json(path, meta_, body); }});
  }

  std::vector<std::string> flush() {
    stage = "write_outputs";
    const char* env = std::getenv("FRACGELFAND_OUT");
    const std::filesystem::path dir = env && *env ? std::filesystem::path(env)
                                                  : std::filesystem::path(cfg_.output_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error("cannot create output directory '" + dir.string() + "'");
    std::vector<std::string> written;
    for (const auto& f : pending_) {
      const std::string path = (dir / f.name).string();
      f.write(path);
      written.push_back(path);
    }
    return written;
  }

  const RunConfig& cfg_;
  Nonlinearity nl_;
  Mesh mesh_;
  KernelWeights kw_;
  MonotoneOptions iteration_;
  OutputMeta meta_;
  std::vector<PendingFile> pending_;
  std::string stage = "setup";
};

void cmd_solve(Session& s) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> comments;
  Eigen::VectorXd u;
  if (s.cfg_.lambda) {
    auto [lambda, run] = s.minimal_solution();
    u = run.u;
    comments = {"problem L u = h lambda f(u)", "lambda " + format_double(lambda),
                "outer_iters " + std::to_string(run.iterations),
                "residual " + format_double(run.residual)};
  } else {
    s.stage = "solve_dirichlet";
    const SolveResult r =
        solve_dirichlet(s.kw_, Eigen::VectorXd::Ones(s.kw_.size()), s.solve_options());
    u = r.u;
    comments = {"problem L u = h g with g = 1", "newton_iters " + std::to_string(r.iterations),
                "residual " + format_double(r.residual)};
  }
  for (int i = 0; i < u.size(); ++i) {
    rows.push_back({format_double(s.mesh_.node(i)), format_double(u[i])});
  }
  s.add_csv("solution.csv", {"x", "u"}, std::move(rows), std::move(comments));
}

Json bracket_json(const Session& s, const LambdaStarBracket& b) {
  Json j;
  j["lambda_lo"] = b.lambda_lo;
  j["lambda_hi"] = b.lambda_hi;
  j["width"] = b.width();
  j["n"] = s.cfg_.n;
  j["s"] = s.cfg_.s;
  j["p"] = s.cfg_.p;
  j["nonlinearity"] = s.nonlinearity_label();
  j["tol"] = s.cfg_.lambdastar_tol;
  j["evaluations"] = b.verdicts.size();
  return j;
}

void cmd_lambda_star(Session& s) {
  s.stage = "estimate_lambda_star";
  const LambdaStarBracket b = estimate_lambda_star(s.problem(), s.cfg_.lambdastar_tol);
  s.add_json("lambdastar.json", bracket_json(s, b));
}

std::vector<std::string> branch_row(const BranchPoint& pt) {
  return {format_double(pt.lambda),
          format_double(pt.sup_norm),
          format_double(pt.seminorm_p),
          format_double(pt.energy),
          format_double(pt.stability_ratio.value_or(std::numeric_limits<double>::quiet_NaN())),
          std::to_string(pt.outer_iters),
          pt.converged ? "1" : "0"};
}

std::vector<double> default_grid(Session& s, std::optional<LambdaStarBracket>& bracket) {
  if (!s.cfg_.lambda_grid.empty()) return s.cfg_.lambda_grid;
  s.stage = "estimate_lambda_star";
  bracket = estimate_lambda_star(s.problem(), s.cfg_.lambdastar_tol);
  std::vector<double> grid;
  for (int k = 1; k <= 20; ++k) grid.push_back(bracket->lambda_lo * k / 20.0);
  return grid;
}

void cmd_branch(Session& s) {
  std::optional<LambdaStarBracket> bracket;
  const std::vector<double> grid = default_grid(s, bracket);
  s.stage = "trace_branch";
  BranchOptions opts;
  opts.stability = true;
  opts.eps_cap = s.cfg_.eps_cap;
  const Branch br = trace_branch(s.problem(), grid, opts);
  std::vector<std::vector<std::string>> rows;
  for (const auto& pt : br.points) rows.push_back(branch_row(pt));
  std::vector<std::string> comments = {"min_order_gap " + format_double(br.min_order_gap)};
  if (bracket) {
    comments.push_back("grid 20 points up to lambda_lo " + format_double(bracket->lambda_lo));
  }
  s.add_csv("branch.csv",
            {"lambda", "sup_norm", "seminorm_p", "energy", "stability_ratio", "outer_iters",
             "converged"},
            std::move(rows), std::move(comments));
}

Json stability_json(Session& s, double lambda, const Eigen::VectorXd& u) {
  s.stage = "stability_ratio";
  const StabilityResult r =
      stability_ratio(s.kw_, u, s.nl_, lambda, s.cfg_.eps_cap, /*constrained=*/true);
  Json j;
  j["lambda"] = lambda;
  j["rho"] = r.rho;
  j["stable"] = r.stable;
  j["eps_cap"] = r.eps_cap;
  j["eigen_iterations"] = r.iterations;
  j["rho_constrained"] = json_number(*r.rho_constrained);
  j["stable_constrained"] = *r.stable_constrained;
  if (s.cfg_.p < 2.0) {
    Json sweep = Json::array();
    for (double eps : {1e-4, 1e-6, 1e-8}) {
      const StabilityResult e = stability_ratio(s.kw_, u, s.nl_, lambda, eps);
      sweep.push_back({{"eps_cap", eps}, {"rho", e.rho}, {"stable", e.stable}});
    }
    j["eps_sweep"] = std::move(sweep);
  }
  s.stage = "second_difference_check";
  const SecondDifferenceReport d = second_difference_check(s.kw_, u, s.nl_, lambda, u, 0.5);
  j["second_difference"] = {{"test_function", "u"},
                            {"gamma_max", 0.5},
                            {"min_gap", d.min_gap},
                            {"kpp_difference", d.kpp_difference},
                            {"kpp_form", d.kpp_form},
                            {"relative_error", d.relative_error}};
  return j;
}

void cmd_stability(Session& s) {
  auto [lambda, run] = s.minimal_solution();
  s.add_json("stability.json", stability_json(s, lambda, run.u));
}

void cmd_kato(Session& s) {
  auto [lambda, run] = s.minimal_solution();
  const Eigen::VectorXd& u = run.u;
  Eigen::VectorXd g(u.size());
  for (int i = 0; i < u.size(); ++i) g[i] = lambda * s.nl_.f(u[i]);

  s.stage = "kato_family";
  std::optional<PhiTransform> phi01, phi03;
  std::vector<std::string> comments = {"lambda " + format_double(lambda)};
  try {
    phi01.emplace(s.nl_, s.cfg_.p, 0.1);
    phi03.emplace(s.nl_, s.cfg_.p, 0.3);
  } catch (const NotConvex&) {
    phi01.reset();
    phi03.reset();
    comments.push_back("neg_phi members skipped: f^(1/(p-1)) not convex");
  }
  const double range = std::max(1.0, u.cwiseAbs().maxCoeff());
  const auto family = builtin_psi_family(range, false, phi01 ? &*phi01 : nullptr,
                                         phi03 ? &*phi03 : nullptr);
  const auto tests = hat_test_functions(s.mesh_, 5, std::max(1, s.cfg_.n / 16));
  s.stage = "verify_kato";
  const KatoReport rep = verify_kato(s.kw_, u, g, family, tests);
  std::vector<std::vector<std::string>> rows;
  for (const auto& m : rep.margins) {
    rows.push_back({m.psi_id, std::to_string(m.test_id), format_double(m.margin)});
  }
  s.add_csv("kato.csv", {"psi_id", "test_id", "margin"}, std::move(rows), std::move(comments),
            {"min_normalized_margin " + format_double(rep.min_normalized())});
}

void cmd_thresholds(Session& s) { s.add_json("thresholds.json", s.thresholds_body()); }

void cmd_bootstrap(Session& s) {
  const RunConfig& c = s.cfg_;
  BootstrapParams prm;
  prm.kind = bootstrap_kind_from_string(c.bootstrap_kind);
  prm.N = c.bootstrap_n;
  prm.s = c.s;
  prm.p = c.p;
  prm.q0 = c.bootstrap_q0;
  prm.max_steps = c.bootstrap_max_steps;
  if (prm.kind == BootstrapKind::power_barrier) {
    if (!c.m) throw ConfigError("config: bootstrap.kind = power_barrier needs nonlinearity.m");
    if (!(*c.m > c.p - 1.0)) throw ConfigError("config: power_barrier needs nonlinearity.m > p - 1");
    prm.m = *c.m;
  }
  if (prm.kind == BootstrapKind::gamma_weighted) {
    if (!c.bootstrap_gamma) throw ConfigError("config: gamma_weighted needs bootstrap.gamma");
    if (!(*c.bootstrap_gamma >= 1.0 / (c.p - 1.0))) {
      throw ConfigError("config: bootstrap.gamma must be >= 1/(p-1)");
    }
    prm.gamma = *c.bootstrap_gamma;
  }
  s.stage = "bootstrap_sequence";
  const BootstrapRun run = bootstrap_sequence(prm);
  std::vector<std::vector<std::string>> rows;
  for (std::size_t k = 0; k < run.q.size(); ++k) {
    rows.push_back({std::to_string(k), format_double(run.q[k])});
  }
  std::string verdict = "verdict " + to_string(run.verdict);
  if (run.verdict == BootstrapVerdict::escaped) verdict += " step=" + std::to_string(run.escape_step);
  if (run.verdict == BootstrapVerdict::converged_to_fixed_point) {
    verdict += " fixed_point=" + format_double(run.fixed_point);
  }
  s.add_csv("bootstrap.csv", {"step", "q"}, std::move(rows), {"kind " + to_string(prm.kind)},
            {verdict});
}

void cmd_report(Session& s) {
  Json body;
  body["thresholds"] = s.thresholds_body();

  s.stage = "estimate_lambda_star";
  const LambdaStarBracket b = estimate_lambda_star(s.problem(), s.cfg_.lambdastar_tol);
  body["lambda_star"] = bracket_json(s, b);

  s.stage = "trace_branch";
  std::vector<double> grid;
  for (double f : {0.5, 0.6, 0.7, 0.8, 0.9, 0.925, 0.95, 0.975, 0.99, 1.0}) {
    grid.push_back(f * b.lambda_lo);
  }
  const Branch br = trace_branch(s.problem(), grid);
  Json branch = Json::object();
  branch["min_order_gap"] = json_number(br.min_order_gap);
  try {
    s.stage = "extrapolate_extremal";
    const ExtremalEstimate est = extrapolate_extremal(br, b);
    branch["lambdas"] = est.lambdas;
    branch["sup_trend"] = est.sup_trend;
    branch["seminorm_trend"] = est.seminorm_trend;
    branch["sup_variation"] = est.sup_variation;
    branch["seminorm_variation"] = est.seminorm_variation;
    branch["extrapolated_sup_norm"] = est.u_extrapolated.cwiseAbs().maxCoeff();
  } catch (const InsufficientPoints& e) {
    branch["extremal"] = e.what();
  }
  body["branch_tail"] = std::move(branch);

  const BranchPoint* last = nullptr;
  for (const auto& pt : br.points) {
    if (pt.converged) last = &pt;
  }
  if (last) body["stability_at_last_point"] = stability_json(s, last->lambda, last->u);

  s.stage = "verify_lr_estimates";
  std::mt19937_64 rng(s.cfg_.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<Eigen::VectorXd> family;
  for (int k = 0; k < 10; ++k) {
    Eigen::VectorXd g(s.kw_.size());
    for (int i = 0; i < g.size(); ++i) g[i] = unif(rng);
    family.push_back(std::move(g));
  }
  const double N = 1.0, sp = s.cfg_.s * s.cfg_.p;
  const LrRegime regime = select_lr_regime(N, s.cfg_.s, s.cfg_.p, 1.0);
  std::vector<double> r_list;
  if (regime == LrRegime::holder) {
    r_list = {2.0, std::numeric_limits<double>::infinity()};
  } else if (N == sp) {
    r_list = {1.0, 2.0};
  } else {
    const double bound = N * (s.cfg_.p - 1.0) / (N - sp);
    r_list = {0.5 * bound};
  }
  const LrTable t = verify_lr_estimates(s.kw_, family, 1.0, r_list, N);
  Json r_json = Json::array();
  for (double r : r_list) r_json.push_back(json_number(r));
  body["lr_estimates"] = {{"regime", to_string(t.regime)}, {"q", 1.0},
                          {"r_list", r_json},              {"min_ratio", t.min_ratio},
                          {"max_ratio", t.max_ratio},      {"spread", t.spread},
                          {"homogeneity_error", t.homogeneity_error}};
  s.add_json("report.json", std::move(body));
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"solve",     "branch",     "lambda-star",
                                                 "stability", "kato-check", "thresholds",
                                                 "bootstrap", "report"};
  return names;
}

CommandOutcome run_command(const std::string& command, const RunConfig& config) {
  CommandOutcome out;
  const auto& names = command_names();
  if (std::find(names.begin(), names.end(), command) == names.end()) {
    out.exit_code = exit_config;
    out.message = "unknown command '" + command + "'";
    return out;
  }
  std::optional<Session> s;
  auto stage = [&] { return s ? s->stage : std::string("setup"); };
  try {
    s.emplace(command, config);
    if (command == "solve") cmd_solve(*s);
    else if (command == "branch") cmd_branch(*s);
    else if (command == "lambda-star") cmd_lambda_star(*s);
    else if (command == "stability") cmd_stability(*s);
    else if (command == "kato-check") cmd_kato(*s);
    else if (command == "thresholds") cmd_thresholds(*s);
    else if (command == "bootstrap") cmd_bootstrap(*s);
    else cmd_report(*s);
    out.files = s->flush();
  } catch (const ConfigError& e) {
    out.exit_code = exit_config;
    out.message = e.what();
  } catch (const std::exception& e) {
    out.exit_code = exit_numerical;
    out.message = "stage " + command + "/" + stage() + ": " + e.what();
  }
  return out;
}

CommandOutcome run_command(const std::string& command, const std::string& config_path) {
  try {
    return run_command(command, load_config(config_path));
  } catch (const ConfigError& e) {
    CommandOutcome out;
    out.exit_code = exit_config;
    out.message = e.what();
    return out;
  }
}

}  // namespace fracgelfand
