#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "fracgelfand/dirichlet_solver.hpp"
#include "fracgelfand/mesh.hpp"
#include "fracgelfand/scalar_kit.hpp"

namespace fracgelfand {

struct Problem {
  const KernelWeights& kw;
  const Nonlinearity& nl;
  MonotoneOptions iteration = {};
};

struct BranchPoint {
  double lambda = 0.0;
  Eigen::VectorXd u;
  double sup_norm = 0.0;
  double seminorm_p = 0.0;
  double energy = 0.0;  ///< E(u) - lambda sum_i h F(u_i)
  std::optional<double> stability_ratio;
  int outer_iters = 0;
  bool converged = false;
  double residual = 0.0;
};

struct Branch {
  std::vector<BranchPoint> points;
  /// min over consecutive converged points of min_i (u_{k+1} - u_k)_i; +inf with fewer than two
  double min_order_gap = 0.0;
};

struct BranchOptions {
  bool warm_start = true;
  bool stability = false;
  std::optional<double> eps_cap;
};

/// Minimal-solution branch over an increasing list of positive lambdas. A diverged point is
/// recorded and ends the trace.
Branch trace_branch(const Problem& problem, const std::vector<double>& lambdas,
                    const BranchOptions& opts = {});

/// Fills the derived fields of a point from its solution.
BranchPoint make_branch_point(const Problem& problem, double lambda, const MonotoneResult& run);

/// lambda_hat = 1 / f(max xi) with L xi = h: xi is a supersolution for every lambda <= lambda_hat.
double lambda_hat(const KernelWeights& kw, const Nonlinearity& nl);

struct Verdict {
  double lambda = 0.0;
  bool converged = false;
  int outer_iters = 0;
};

struct LambdaStarBracket {
  double lambda_lo = 0.0;
  double lambda_hi = 0.0;
  double width() const { return lambda_hi - lambda_lo; }
  Eigen::VectorXd u_lo;          ///< minimal solution at lambda_lo
  std::vector<Verdict> verdicts;  ///< every evaluation, in evaluation order
};

struct LambdaStarOptions {
  double expansion = 2.0;
  double cap = 1e6;
  int max_bisections = 200;
};

/// Throws ExpansionFailed when nothing diverges below the cap.
LambdaStarBracket estimate_lambda_star(const Problem& problem, double tol_lambda,
                                       const LambdaStarOptions& opts = {});

struct ExtremalEstimate {
  Eigen::VectorXd u_last;
  Eigen::VectorXd u_extrapolated;  ///< quadratic in lambda through the last three points
  std::vector<double> lambdas;     ///< the points used for trends (up to five)
  std::vector<double> sup_trend;
  std::vector<double> seminorm_trend;
  double sup_variation = 0.0;       ///< max/min - 1 over the last three sup norms
  double seminorm_variation = 0.0;  ///< max/min - 1 over the trend window
};

/// Needs three converged points with lambda >= 0.9 lambda_lo; throws InsufficientPoints.
ExtremalEstimate extrapolate_extremal(const Branch& branch, const LambdaStarBracket& bracket);

}  // namespace fracgelfand
