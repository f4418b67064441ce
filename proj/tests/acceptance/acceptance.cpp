// One line per acceptance criterion; exit status is the number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fracgelfand/branch.hpp"
#include "fracgelfand/commands.hpp"
#include "fracgelfand/config.hpp"
#include "fracgelfand/dirichlet_solver.hpp"
#include "fracgelfand/errors.hpp"
#include "fracgelfand/mesh.hpp"
#include "fracgelfand/nonlocal_operator.hpp"
#include "fracgelfand/regularity.hpp"
#include "fracgelfand/scalar_kit.hpp"
#include "fracgelfand/stability.hpp"

using namespace fracgelfand;
using Eigen::VectorXd;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& name, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = secs < budget_s;
  const bool ok = o.pass && in_time;
  if (!ok) ++failures;
  std::printf("[%s] %2d %-28s %s; %.2f s (budget %.0f s)%s\n", ok ? "PASS" : "FAIL", id, name.c_str(),
              o.detail.c_str(), secs, budget_s, in_time ? "" : " OVER BUDGET");
  std::fflush(stdout);
}

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

VectorXd random_vector(std::mt19937_64& rng, int n, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = d(rng);
  return v;
}

double row_scale(const KernelWeights& kw, const VectorXd& u) {
  double scale = 0.0;
  for (int i = 0; i < kw.size(); ++i) {
    double r = kw.T[i] * std::pow(std::abs(u[i]), kw.p - 1.0);
    for (int j = 0; j < kw.size(); ++j) {
      if (j != i) r += kw.W(i, j) * std::pow(std::abs(u[i] - u[j]), kw.p - 1.0);
    }
    scale = std::max(scale, r);
  }
  return scale;
}

}  // namespace

int main() {
  const Nonlinearity expo = Nonlinearity::exponential();

  criterion(1, "homogeneity/oddness", 5, [] {
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> pd(1.2, 4.0), cd(-3.0, 3.0), sd(0.1, 0.9);
    const Mesh mesh = build_mesh(-1.0, 1.0, 64);
    double worst = 0.0;
    bool odd = true;
    for (int k = 0; k < 100; ++k) {
      const KernelWeights kw = build_kernel_weights(mesh, sd(rng), pd(rng));
      const VectorXd u = random_vector(rng, 64, -2.0, 2.0);
      const double c = cd(rng);
      const VectorXd lhs = apply_operator(kw, c * u);
      const VectorXd rhs = odd_power(c, kw.p) * apply_operator(kw, u);
      const double scale = row_scale(kw, c * u);
      worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff() / scale);
      odd = odd && (apply_operator(kw, -u) == -apply_operator(kw, u));
    }
    return Outcome{worst <= 1e-12 && odd,
                   fmt("max rel err %.2e", worst) + (odd ? ", L(-u) = -L(u) exact" : ", oddness broken")};
  });

  criterion(2, "Euler identity", 5, [] {
    std::mt19937_64 rng(202);
    std::uniform_real_distribution<double> pd(1.2, 4.0), sd(0.1, 0.9);
    const Mesh mesh = build_mesh(-1.0, 1.0, 64);
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
      const KernelWeights kw = build_kernel_weights(mesh, sd(rng), pd(rng));
      const VectorXd u = random_vector(rng, 64, -2.0, 2.0);
      double scale = 0.0;
      for (int i = 0; i < 64; ++i) {
        scale += kw.T[i] * std::pow(std::abs(u[i]), kw.p);
        for (int j = i + 1; j < 64; ++j) scale += kw.W(i, j) * std::pow(std::abs(u[i] - u[j]), kw.p);
      }
      worst = std::max(worst, std::abs(apply_operator(kw, u).dot(u) - discrete_seminorm_p(kw, u)) / scale);
    }
    return Outcome{worst <= 1e-12, fmt("max rel err %.2e", worst)};
  });

  criterion(3, "discrete comparison", 120, [] {
    std::mt19937_64 rng(303);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const Mesh mesh = build_mesh(-1.0, 1.0, 64);
    double worst = -HUGE_VAL;
    int pairs = 0;
    for (double p : {1.5, 2.0, 3.0}) {
      for (double s : {0.3, 0.7}) {
        const KernelWeights kw = build_kernel_weights(mesh, s, p);
        const DirichletSolver solver(kw);
        const int count = pairs + 34 <= 200 ? 34 : 200 - pairs;
        for (int k = 0; k < count; ++k, ++pairs) {
          const VectorXd g1 = random_vector(rng, 64, -1.0, 1.0);
          VectorXd bump = random_vector(rng, 64, 0.0, 1.0);
          for (int i = 0; i < 64; ++i) {
            if (unit(rng) < 0.5) bump[i] = 0.0;
          }
          try {
            const VectorXd u1 = solver.solve(g1).u;
            const VectorXd u2 = solver.solve(g1 + bump).u;
            worst = std::max(worst, (u1 - u2).maxCoeff());
          } catch (const NoConvergence& e) {
            return Outcome{false, "pair " + std::to_string(pairs) + " (p=" + fmt("%g", p) +
                                      ", s=" + fmt("%g", s) + "): " + e.what() +
                                      ", residual " + fmt("%.2e", e.residual())};
          }
        }
      }
    }
    return Outcome{pairs == 200 && worst <= 1e-10,
                   std::to_string(pairs) + " pairs, max(u1 - u2) = " + fmt("%.2e", worst)};
  });

  criterion(4, "scalar inequality suite", 5, [] {
    std::mt19937_64 rng(404);
    std::uniform_real_distribution<double> ab(-5.0, 5.0), w(0.0, 3.0), pd(1.1, 4.0), ld(0.0, 2.0),
        gd(1.0, 4.0);
    double worst = HUGE_VAL;
    std::size_t evaluated = 0;
    for (int batch = 0; batch < 10; ++batch) {
      const double p = pd(rng), ell = batch % 3 == 0 ? 0.0 : ld(rng), gamma = gd(rng);
      std::vector<InequalitySample> samples(1000);
      for (auto& x : samples) x = {ab(rng), ab(rng), w(rng), w(rng)};
      const InequalityReport rep = check_scalar_inequalities(p, ell, gamma, samples);
      worst = std::min(worst, rep.min_margin());
      for (const auto& m : rep.margins) evaluated += m.evaluated;
    }
    return Outcome{worst >= -1e-12, std::to_string(evaluated) + " evaluations, min margin " +
                                        fmt("%.2e", worst)};
  });

  criterion(5, "Kato margins", 120, [&] {
    std::mt19937_64 rng(505);
    const Mesh mesh = build_mesh(-1.0, 1.0, 64);
    const auto tests = hat_test_functions(mesh, 6, 4);
    double worst = HUGE_VAL;
    int instances = 0, signed_instances = 0;
    for (double p : {1.5, 2.0, 2.5, 3.0}) {
      const KernelWeights kw = build_kernel_weights(mesh, 0.5, p);
      const DirichletSolver solver(kw);
      std::optional<PhiTransform> phi01, phi03;
      try {
        phi01.emplace(expo, p, 0.1);
        phi03.emplace(expo, p, 0.3);
      } catch (const NotConvex&) {
        phi01.reset();
        phi03.reset();
      }
      for (int k = 0; k < 5; ++k, ++instances) {
        const VectorXd g = random_vector(rng, 64, 0.0, 2.0);
        const VectorXd u = solver.solve(g).u;
        const auto family = builtin_psi_family(std::max(1.0, u.maxCoeff()), false,
                                               phi01 ? &*phi01 : nullptr, phi03 ? &*phi03 : nullptr);
        worst = std::min(worst, verify_kato(kw, u, g, family, tests).min_normalized());
      }
      for (int k = 0; k < 2; ++k, ++signed_instances) {
        const VectorXd g = random_vector(rng, 64, -1.0, 1.0);
        const VectorXd u = solver.solve(g).u;
        const auto family = builtin_psi_family(std::max(1.0, u.cwiseAbs().maxCoeff()), true);
        worst = std::min(worst, verify_kato(kw, u, g, family, tests).min_normalized());
      }
    }
    return Outcome{worst >= -1e-8, std::to_string(instances) + " unsigned + " +
                                       std::to_string(signed_instances) +
                                       " signed instances, min margin/scale " + fmt("%.2e", worst)};
  });

  // Picard contracts at a rate 1 - O(sqrt(lambda* - lambda)) near the fold, so the default
  // budget of 500 outer steps stops short of the bracket; these criteria use a larger one.
  MonotoneOptions fold;
  fold.max_outer = 20000;
  const std::string budget = ", max_outer " + std::to_string(fold.max_outer);

  const Mesh mesh64 = build_mesh(-1.0, 1.0, 64);
  const KernelWeights kw64 = build_kernel_weights(mesh64, 0.5, 2.0);
  const Problem prob64{kw64, expo, fold};
  std::optional<LambdaStarBracket> bracket64;

  criterion(6, "monotone iteration", 60, [&] {
    bracket64 = estimate_lambda_star(prob64, 1e-3);
    const double lo = bracket64->lambda_lo, mid = 0.5 * (lo + bracket64->lambda_hi);
    double min_inc = HUGE_VAL;
    int converged = 0, total = 0;
    for (int k = 0; k <= 10; ++k, ++total) {
      const double lambda = lo + (mid - lo) * k / 10.0;
      const MonotoneResult r =
          monotone_iteration(kw64, expo, lambda, VectorXd::Zero(64), std::nullopt, prob64.iteration);
      if (r.converged()) ++converged;
      min_inc = std::min(min_inc, r.min_increment);
    }
    return Outcome{converged == total && min_inc >= -1e-10,
                   std::to_string(converged) + "/" + std::to_string(total) +
                       " converged from 0 on [lambda_lo, mid], min increment " + fmt("%.2e", min_inc) +
                       budget};
  });

  criterion(7, "branch monotonicity", 120, [&] {
    if (!bracket64) bracket64 = estimate_lambda_star(prob64, 1e-3);
    std::vector<double> grid;
    for (int k = 1; k <= 20; ++k) grid.push_back(bracket64->lambda_lo * k / 20.0);
    const Branch br = trace_branch(prob64, grid);
    bool sup_increasing = true;
    for (std::size_t k = 1; k < br.points.size(); ++k) {
      sup_increasing = sup_increasing && br.points[k].sup_norm > br.points[k - 1].sup_norm;
    }
    const bool all = br.points.size() == 20 &&
                     std::all_of(br.points.begin(), br.points.end(), [](auto& p) { return p.converged; });
    return Outcome{all && br.min_order_gap >= -1e-9 && sup_increasing,
                   std::to_string(br.points.size()) + " points, min order gap " +
                       fmt("%.2e", br.min_order_gap) + (sup_increasing ? ", sup norm increasing" : "") +
                       budget};
  });

  criterion(8, "stability along branch", 120, [&] {
    const Mesh mesh = build_mesh(-1.0, 1.0, 32);
    double worst = HUGE_VAL;
    int points = 0;
    for (double p : {2.0, 3.0}) {
      const KernelWeights kw = build_kernel_weights(mesh, 0.5, p);
      const Problem prob{kw, expo, fold};
      const LambdaStarBracket b = estimate_lambda_star(prob, 1e-3);
      std::vector<double> grid;
      for (int k = 1; k <= 20; ++k) grid.push_back(b.lambda_lo * k / 20.0);
      BranchOptions opts;
      opts.stability = true;
      opts.eps_cap = 0.0;
      for (const auto& pt : trace_branch(prob, grid, opts).points) {
        if (!pt.converged) continue;
        ++points;
        worst = std::min(worst, *pt.stability_ratio);
      }
    }
    return Outcome{points == 40 && worst >= 1.0 - 1e-6,
                   std::to_string(points) + " points, min rho " + fmt("%.9f", worst) + budget};
  });

  criterion(9, "second-variation consistency", 30, [&] {
    double worst = 0.0;
    int pairs = 0;
    const Mesh mesh = build_mesh(-1.0, 1.0, 32);
    for (double p : {2.0, 3.0, 2.5}) {
      const KernelWeights kw = build_kernel_weights(mesh, 0.5, p);
      const double lambda = 0.6 * lambda_hat(kw, expo);
      const MonotoneResult r = monotone_iteration(kw, expo, lambda, VectorXd::Zero(32), std::nullopt);
      const VectorXd& u = r.u;
      std::vector<VectorXd> phis = {u};
      for (const auto& hat : hat_test_functions(mesh, 3, 3)) {
        // Scale the hat under u so that u - 0.5 phi stays nonnegative.
        double c = HUGE_VAL;
        for (int i = 0; i < 32; ++i) {
          if (hat[i] > 0.0) c = std::min(c, u[i] / hat[i]);
        }
        phis.push_back(c * hat);
      }
      for (const auto& phi : phis) {
        const auto rep = second_difference_check(kw, u, expo, lambda, phi, 0.5);
        worst = std::max(worst, rep.relative_error);
        ++pairs;
      }
    }
    return Outcome{pairs >= 10 && worst <= 1e-4,
                   std::to_string(pairs) + " pairs, max rel err " + fmt("%.2e", worst)};
  });

  criterion(10, "lambda* bracket", 300, [&] {
    if (!bracket64) bracket64 = estimate_lambda_star(prob64, 1e-3);
    const Mesh mesh128 = build_mesh(-1.0, 1.0, 128);
    const KernelWeights kw128 = build_kernel_weights(mesh128, 0.5, 2.0);
    const LambdaStarBracket b128 = estimate_lambda_star(Problem{kw128, expo, fold}, 1e-3);
    const double m64 = 0.5 * (bracket64->lambda_lo + bracket64->lambda_hi);
    const double m128 = 0.5 * (b128.lambda_lo + b128.lambda_hi);
    const double diff = std::abs(m64 - m128) / std::min(m64, m128);
    const bool widths = bracket64->width() <= 1e-3 * bracket64->lambda_lo &&
                        b128.width() <= 1e-3 * b128.lambda_lo;
    return Outcome{widths && diff <= 0.05, "n=64 [" + fmt("%.6f", bracket64->lambda_lo) + ", " +
                                               fmt("%.6f", bracket64->lambda_hi) + "], n=128 [" +
                                               fmt("%.6f", b128.lambda_lo) + ", " +
                                               fmt("%.6f", b128.lambda_hi) + "], midpoint diff " +
                                               fmt("%.2f%%", 100 * diff) + budget};
  });

  criterion(11, "threshold cross-checks", 1, [] {
    double form_err = 0.0;
    for (int k = 0; k < 1000; ++k) {
      const double m = 1.0 + std::pow(10.0, -3.0 + 9.0 * k / 999.0);
      const double a = threshold_G(1.0, 2.0, m), b = threshold_G1_p2(m);
      form_err = std::max(form_err, std::abs(a - b) / b);
    }
    double inf_g = HUGE_VAL;
    bool above = true;
    for (int k = 0; k <= 400; ++k) {
      const double m = 1.0 + std::pow(10.0, -3.0 + 12.0 * k / 400.0);
      const double g = threshold_G(1.0, 2.0, m);
      inf_g = std::min(inf_g, g);
      above = above && g > 10.0;
    }
    std::mt19937_64 rng(1111);
    std::uniform_real_distribution<double> sd(0.01, 0.99), pd(1.05, 6.0), md(0.0, 1.0);
    bool remark = true;
    for (int k = 0; k < 1000; ++k) {
      const double s = sd(rng), p = pd(rng);
      const double m = (p - 1.0) + std::pow(10.0, -2.0 + 5.0 * md(rng));
      remark = remark && threshold_G(s, p, m) > linf_threshold(s, p);
    }
    return Outcome{form_err <= 1e-12 && std::abs(inf_g - 10.0) <= 1e-6 && above && remark,
                   "forms agree " + fmt("%.1e", form_err) + ", inf G1 - 10 = " + fmt("%.1e", inf_g - 10.0) +
                       (remark ? ", G > sp+4sp/(p-1) on grid" : ", remark violated")};
  });

  criterion(12, "bootstrap oracle", 1, [] {
    std::mt19937_64 rng(1212);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    int mismatches = 0, fixed = 0;
    double fp_err = 0.0;
    for (int k = 0; k < 1000; ++k) {
      BootstrapParams prm;
      prm.kind = BootstrapKind::power_barrier;
      prm.N = 1 + static_cast<int>(12 * unit(rng));
      prm.s = 0.05 + 0.9 * unit(rng);
      prm.p = 1.1 + 3.0 * unit(rng);
      prm.m = (prm.p - 1.0) * (1.2 + 5.0 * unit(rng));
      const double ell = (1.0 - (prm.p - 1.0) / prm.m) * prm.N / (prm.s * prm.p);
      if (ell <= 1.05) {
        --k;
        continue;
      }
      // Keep q0 away from the barrier by 2% so the escape side is decided well inside max_steps.
      const double side = unit(rng) < 0.5 ? -1.0 : 1.0;
      prm.q0 = std::max(1.0, ell * (1.0 + side * (0.02 + 0.3 * unit(rng))));
      if (std::abs(prm.q0 - ell) < 0.01 * ell) {
        --k;
        continue;
      }
      const BootstrapRun run = bootstrap_sequence(prm);
      const bool expect_escape = prm.q0 > ell;
      if (expect_escape != (run.verdict == BootstrapVerdict::escaped)) ++mismatches;
      if (run.verdict == BootstrapVerdict::converged_to_fixed_point) {
        ++fixed;
        fp_err = std::max(fp_err, std::abs(run.fixed_point - ell) / ell);
      }
    }
    return Outcome{mismatches == 0 && fp_err <= 1e-9,
                   std::to_string(mismatches) + " verdict mismatches, " + std::to_string(fixed) +
                       " fixed points, max rel err " + fmt("%.1e", fp_err)};
  });

  criterion(13, "Phi_eps supersolution", 60, [&] {
    const double lambda = 0.9 * (bracket64 ? bracket64->lambda_lo : lambda_hat(kw64, expo));
    const MonotoneResult r = monotone_iteration(kw64, expo, lambda, VectorXd::Zero(64), std::nullopt);
    if (!r.converged()) return Outcome{false, "branch point did not converge"};
    double worst = HUGE_VAL;
    for (double eps : {0.1, 0.3}) {
      const PhiTransform phi(expo, 2.0, eps);
      VectorXd v(64);
      for (int i = 0; i < 64; ++i) v[i] = phi(r.u[i]);
      const VectorXd lv = apply_operator(kw64, v);
      const double scale = row_scale(kw64, v);
      for (int i = 0; i < 64; ++i) {
        const double source = lambda * (1.0 - eps) * mesh64.h * expo.f(v[i]);
        worst = std::min(worst, (lv[i] - source) / (scale + source));
      }
    }
    return Outcome{worst >= -1e-6, "lambda " + fmt("%.6f", lambda) + ", min residual/scale " +
                                       fmt("%.2e", worst)};
  });

  criterion(14, "determinism", 60, [] {
    namespace fs = std::filesystem;
    const fs::path root = fs::temp_directory_path() / "fracgelfand_acceptance_det";
    fs::remove_all(root);
    fs::create_directories(root);
    const fs::path cfg = root / "run.cfg";
    std::ofstream(cfg) << "mesh.n = 48\nbranch.lambda_grid = [0.2, 0.4, 0.6, 0.8, 1.0]\nreport.N_list = [1, 2, 12]\nsolve.lambda = 0.5\n";
    auto slurp = [](const fs::path& p) {
      std::ifstream in(p, std::ios::binary);
      std::stringstream ss;
      ss << in.rdbuf();
      return ss.str();
    };
    int files = 0, differing = 0;
    for (const std::string cmd : {"solve", "branch", "kato-check", "stability", "thresholds"}) {
      std::vector<std::string> outs;
      for (int rep = 0; rep < 2; ++rep) {
        const fs::path dir = root / (cmd + std::to_string(rep));
        ::setenv("FRACGELFAND_OUT", dir.c_str(), 1);
        const CommandOutcome o = run_command(cmd, cfg.string());
        if (o.exit_code != 0) return Outcome{false, cmd + " failed: " + o.message};
        std::string all;
        for (const auto& f : o.files) all += slurp(f);
        outs.push_back(all);
        files += static_cast<int>(o.files.size());
      }
      if (outs[0] != outs[1]) ++differing;
    }
    ::unsetenv("FRACGELFAND_OUT");
    return Outcome{differing == 0, std::to_string(files) + " files compared, " +
                                       std::to_string(differing) + " commands differ"};
  });

  std::printf("%d of 14 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
