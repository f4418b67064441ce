#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "fracgelfand/mesh.hpp"
#include "fracgelfand/scalar_kit.hpp"

namespace fracgelfand {

struct SolveOptions {
  double tol = 1e-10;
  int max_iter = 200;
  /// Floor of the Newton matrix regularization. For p < 2 the regularization tracks the last
  /// step length down to this floor, by default 4 machine epsilon |u|_inf; 0 for p > 2.
  /// Differences that a p < 2 Newton step would carry through 0 take the secant weight
  /// |d|^(p-2) instead, and a failed line search retries with secant weights throughout.
  std::optional<double> eps_reg;
  /// Starting iterate; by default the ray-optimal multiple of the p = 2 solution.
  std::optional<Eigen::VectorXd> initial;
};

struct SolveResult {
  Eigen::VectorXd u;
  int iterations = 0;
  double residual = 0.0;  ///< |L u - h g|_inf
  std::vector<double> energy_history;
};

/// Solves L u = h g by minimizing E(u) - sum_i h g_i u_i with damped Newton steps and an
/// Armijo backtracking line search on the energy. For p = 2 the problem is linear and the
/// factorization is cached across solves.
class DirichletSolver {
 public:
  explicit DirichletSolver(const KernelWeights& kw, SolveOptions opts = {});

  SolveResult solve(const Eigen::VectorXd& g) const;
  SolveResult solve(const Eigen::VectorXd& g, const Eigen::VectorXd& initial) const;

  /// Minimizer of the energy on the ray through the p = 2 solution; the default Newton start.
  Eigen::VectorXd ray_start(const Eigen::VectorXd& g) const { return default_start(kw_->mesh.h * g); }

  const KernelWeights& weights() const { return *kw_; }
  const SolveOptions& options() const { return opts_; }

 private:
  SolveResult newton(const Eigen::VectorXd& rhs, Eigen::VectorXd u) const;
  Eigen::VectorXd default_start(const Eigen::VectorXd& rhs) const;

  const KernelWeights* kw_;
  SolveOptions opts_;
  Eigen::LLT<Eigen::MatrixXd> linear_;  // factor of the p = 2 form
};

SolveResult solve_dirichlet(const KernelWeights& kw, const Eigen::VectorXd& g,
                            const SolveOptions& opts = {});

/// |L u - h lambda f(u)|_inf.
double semilinear_residual(const KernelWeights& kw, const Nonlinearity& nl, double lambda,
                           const Eigen::VectorXd& u);

// ---------------------------------------------------------------------------------------
// Monotone sub/supersolution iteration

struct MonotoneOptions {
  double tol = 1e-9;      ///< stop when |u_{j+1} - u_j|_inf <= tol
  int max_outer = 500;
  double cap = 1e8;       ///< divergence when |u_j|_inf exceeds this
  double order_slack = 1e-10;
  SolveOptions inner;
};

enum class MonotoneStatus { converged, diverged };
enum class DivergenceReason { none, norm_cap, max_outer };

struct MonotoneResult {
  MonotoneStatus status = MonotoneStatus::diverged;
  DivergenceReason reason = DivergenceReason::none;
  Eigen::VectorXd u;              ///< limit (converged) or last iterate
  int iterations = 0;
  std::vector<double> norms;      ///< |u_j|_inf, j = 1..iterations
  double min_increment = 0.0;     ///< min over j, i of (u_{j+1} - u_j)_i
  double max_excess = 0.0;        ///< max over j, i of (u_j - u_super)_i, when a bound is given
  double residual = 0.0;          ///< semilinear residual of the limit (converged only)

  bool converged() const { return status == MonotoneStatus::converged; }
};

/// u_{j+1} = solve(lambda f(u_j)) started from u_sub. Throws BadBracket if u_sub > u_super
/// anywhere.
MonotoneResult monotone_iteration(const KernelWeights& kw, const Nonlinearity& nl, double lambda,
                                  const Eigen::VectorXd& u_sub,
                                  const std::optional<Eigen::VectorXd>& u_super,
                                  const MonotoneOptions& opts = {});

// ---------------------------------------------------------------------------------------
// Kato-type inequality on computed solutions

struct PsiMember {
  std::string id;
  ScalarFn psi;
  ScalarFn dpsi;
  bool bounded_second = true;  ///< Psi'' bounded on R
  bool nonnegative_only = false;  ///< defined for t >= 0 only
};

/// f_eps for eps in {1, 0.1, 0.01}, the identity and the square (t+)^2 continued linearly
/// beyond `range`. Given `phi01` and `phi03` (eps = 0.1 and 0.3), the concave transforms enter
/// as -Phi_eps; they require nonnegative solutions and are skipped when `signed_rhs` is set.
std::vector<PsiMember> builtin_psi_family(double range, bool signed_rhs,
                                          const PhiTransform* phi01 = nullptr,
                                          const PhiTransform* phi03 = nullptr);

/// Nonnegative hat functions of half-width `radius` nodes centred at `count` evenly spread nodes.
std::vector<Eigen::VectorXd> hat_test_functions(const Mesh& mesh, int count, int radius);

struct KatoMargin {
  std::string psi_id;
  int test_id = 0;
  double margin = 0.0;  ///< sum_i J(Psi'(u_i)) h g_i psi_i - <L Psi(u), psi>
  double scale = 0.0;
};

struct KatoReport {
  std::vector<KatoMargin> margins;
  /// min over entries of margin / scale
  double min_normalized() const;
};

KatoReport verify_kato(const KernelWeights& kw, const Eigen::VectorXd& u,
                       const Eigen::VectorXd& g, const std::vector<PsiMember>& family,
                       const std::vector<Eigen::VectorXd>& tests);

}  // namespace fracgelfand
