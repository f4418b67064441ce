#include "fracgelfand/branch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "fracgelfand/errors.hpp"
#include "fracgelfand/nonlocal_operator.hpp"
#include "fracgelfand/stability.hpp"

namespace fracgelfand {

BranchPoint make_branch_point(const Problem& problem, double lambda, const MonotoneResult& run) {
  const KernelWeights& kw = problem.kw;
  BranchPoint pt;
  pt.lambda = lambda;
  pt.u = run.u;
  pt.outer_iters = run.iterations;
  pt.converged = run.converged();
  pt.sup_norm = run.u.size() ? run.u.cwiseAbs().maxCoeff() : 0.0;
  if (!run.u.allFinite()) {
    pt.seminorm_p = pt.energy = std::numeric_limits<double>::infinity();
    return pt;
  }
  pt.seminorm_p = discrete_seminorm_p(kw, run.u);
  double source = 0.0;
  for (int i = 0; i < run.u.size(); ++i) source += problem.nl.antiderivative(run.u[i]);
  pt.energy = pt.seminorm_p / kw.p - lambda * kw.mesh.h * source;
  pt.residual = run.converged() ? run.residual : semilinear_residual(kw, problem.nl, lambda, run.u);
  return pt;
}

Branch trace_branch(const Problem& problem, const std::vector<double>& lambdas,
                    const BranchOptions& opts) {
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    if (!(lambdas[k] > 0.0) || (k > 0 && !(lambdas[k] > lambdas[k - 1]))) {
      throw ParameterOutOfRange("trace_branch: lambdas must be positive and strictly increasing");
    }
  }
  const int n = problem.kw.size();
  Branch branch;
  branch.min_order_gap = std::numeric_limits<double>::infinity();
  Eigen::VectorXd start = Eigen::VectorXd::Zero(n);
  const Eigen::VectorXd* previous = nullptr;
  for (double lambda : lambdas) {
    const MonotoneResult run =
        monotone_iteration(problem.kw, problem.nl, lambda,
                           opts.warm_start ? start : Eigen::VectorXd::Zero(n), std::nullopt,
                           problem.iteration);
    BranchPoint pt = make_branch_point(problem, lambda, run);
    if (!pt.converged) {
      branch.points.push_back(std::move(pt));
      break;
    }
    if (opts.stability) {
      pt.stability_ratio = stability_ratio(problem.kw, pt.u, problem.nl, lambda, opts.eps_cap).rho;
    }
    if (previous) branch.min_order_gap = std::min(branch.min_order_gap, (pt.u - *previous).minCoeff());
    start = pt.u;
    branch.points.push_back(std::move(pt));
    previous = &branch.points.back().u;
  }
  return branch;
}

double lambda_hat(const KernelWeights& kw, const Nonlinearity& nl) {
  const Eigen::VectorXd xi = solve_dirichlet(kw, Eigen::VectorXd::Ones(kw.size())).u;
  return 1.0 / nl.f(xi.maxCoeff());
}

LambdaStarBracket estimate_lambda_star(const Problem& problem, double tol_lambda,
                                       const LambdaStarOptions& opts) {
  if (!(tol_lambda > 0.0)) throw ParameterOutOfRange("estimate_lambda_star: tol must be positive");
  if (!(opts.expansion > 1.0)) throw ParameterOutOfRange("estimate_lambda_star: expansion <= 1");
  const int n = problem.kw.size();
  LambdaStarBracket out;

  // Converged solutions keyed by lambda; the largest one below a new lambda is its subsolution.
  std::map<double, Eigen::VectorXd> solved;
  auto evaluate = [&](double lambda) {
    auto below = solved.lower_bound(lambda);
    const Eigen::VectorXd start =
        below == solved.begin() ? Eigen::VectorXd::Zero(n) : std::prev(below)->second;
    MonotoneResult run =
        monotone_iteration(problem.kw, problem.nl, lambda, start, std::nullopt, problem.iteration);
    out.verdicts.push_back({lambda, run.converged(), run.iterations});
    if (run.converged()) solved.emplace(lambda, std::move(run.u));
    return run.converged();
  };

  double lo = lambda_hat(problem.kw, problem.nl);
  if (!evaluate(lo)) {
    throw NoConvergence("estimate_lambda_star: iteration failed below the supersolution bound",
                        Eigen::VectorXd::Zero(n), lo);
  }
  double hi = lo * opts.expansion;
  while (evaluate(hi)) {
    lo = hi;
    hi *= opts.expansion;
    if (hi > opts.cap) throw ExpansionFailed("estimate_lambda_star: no divergence below the cap");
  }
  for (int k = 0; k < opts.max_bisections && hi - lo > tol_lambda * lo; ++k) {
    const double mid = 0.5 * (lo + hi);
    (evaluate(mid) ? lo : hi) = mid;
  }
  if (hi - lo > tol_lambda * lo) {
    throw NoConvergence("estimate_lambda_star: bisection budget exhausted", solved.at(lo), hi - lo);
  }
  out.lambda_lo = lo;
  out.lambda_hi = hi;
  out.u_lo = solved.at(lo);
  return out;
}

ExtremalEstimate extrapolate_extremal(const Branch& branch, const LambdaStarBracket& bracket) {
  std::vector<const BranchPoint*> near;
  for (const auto& pt : branch.points) {
    if (pt.converged && pt.lambda >= 0.9 * bracket.lambda_lo) near.push_back(&pt);
  }
  if (near.size() < 3) {
    throw InsufficientPoints("extrapolate_extremal: need three converged points near lambda_lo");
  }
  ExtremalEstimate est;
  const std::size_t m = near.size();
  est.u_last = near.back()->u;

  const BranchPoint& a = *near[m - 3];
  const BranchPoint& b = *near[m - 2];
  const BranchPoint& c = *near[m - 1];
  const double x = bracket.lambda_lo;
  const double la = (x - b.lambda) * (x - c.lambda) / ((a.lambda - b.lambda) * (a.lambda - c.lambda));
  const double lb = (x - a.lambda) * (x - c.lambda) / ((b.lambda - a.lambda) * (b.lambda - c.lambda));
  const double lc = (x - a.lambda) * (x - b.lambda) / ((c.lambda - a.lambda) * (c.lambda - b.lambda));
  est.u_extrapolated = la * a.u + lb * b.u + lc * c.u;

  const std::size_t window = std::min<std::size_t>(5, m);
  for (std::size_t k = m - window; k < m; ++k) {
    est.lambdas.push_back(near[k]->lambda);
    est.sup_trend.push_back(near[k]->sup_norm);
    est.seminorm_trend.push_back(near[k]->seminorm_p);
  }
  auto variation = [](auto first, auto last) {
    const auto [lo, hi] = std::minmax_element(first, last);
    return *lo > 0.0 ? *hi / *lo - 1.0 : std::numeric_limits<double>::infinity();
  };
  est.sup_variation = variation(est.sup_trend.end() - 3, est.sup_trend.end());
  est.seminorm_variation = variation(est.seminorm_trend.begin(), est.seminorm_trend.end());
  return est;
}

}  // namespace fracgelfand
