#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fracgelfand/mesh.hpp"
#include "fracgelfand/scalar_kit.hpp"

namespace fracgelfand {

/// Second variation of the Gelfand functional at u: phi^T A phi - phi^T B phi.
struct StabilityForm {
  Eigen::MatrixXd A;  ///< linearized operator form
  Eigen::VectorXd B;  ///< diagonal, B_i = h lambda f'(u_i)
  double eps_cap = 0.0;
  double p = 2.0;
  double lambda = 0.0;
};

/// Default regularization: 1e-6 (1 + osc u) for p < 2 and 0 for p >= 2.
double default_eps_cap(const Eigen::VectorXd& u, double p);

StabilityForm assemble_stability_form(const KernelWeights& kw, const Eigen::VectorXd& u,
                                      const Nonlinearity& nl, double lambda,
                                      std::optional<double> eps_cap = std::nullopt);

struct PencilOptions {
  double tol = 1e-12;  ///< relative change of the Rayleigh quotient between sweeps
  int max_iter = 20000;
};

struct PencilMinimum {
  double value = 0.0;
  Eigen::VectorXd vector;  ///< B-normalized minimizer
  int iterations = 0;
};

/// min phi^T A phi / phi^T B phi for A symmetric positive definite and B a positive diagonal,
/// by inverse iteration with B inner products from the B-normalized all-ones vector.
PencilMinimum pencil_min_ratio(const Eigen::MatrixXd& A, const Eigen::VectorXd& B,
                               const PencilOptions& opts = {});

struct StabilityResult {
  double rho = 0.0;
  Eigen::VectorXd phi_min;
  int iterations = 0;
  double eps_cap = 0.0;
  bool stable = false;  ///< rho >= 1 - 1e-6
  /// Ratio over span{eta(u)} for the built-in Lipschitz family, with eps = 0.
  std::optional<double> rho_constrained;
  std::optional<bool> stable_constrained;
};

constexpr double kStabilityTolerance = 1e-6;

/// Throws SingularB when some f'(u_i) vanishes or lambda <= 0.
StabilityResult stability_ratio(const KernelWeights& kw, const Eigen::VectorXd& u,
                                const Nonlinearity& nl, double lambda,
                                std::optional<double> eps_cap = std::nullopt,
                                bool constrained = false, const PencilOptions& opts = {});

struct LipschitzProfile {
  std::string id;
  ScalarFn eta;
};

/// Eight Lipschitz profiles on [0, inf) with eta(0) = 0.
const std::vector<LipschitzProfile>& lipschitz_profiles();

/// Minimum of the pencil restricted to span{eta(u)}. The quadratic form is evaluated with
/// eps = 0 and the convention that pairs with u_i = u_j (where every eta(u) also agrees)
/// contribute nothing. Linearly dependent profiles are dropped.
double constrained_stability_ratio(const KernelWeights& kw, const Eigen::VectorXd& u,
                                   const Nonlinearity& nl, double lambda);

struct SecondDifferenceReport {
  std::vector<double> gammas;
  std::vector<double> k_values;      ///< K(gamma) on the grid, gammas[0] = 0
  double min_gap = 0.0;              ///< min over the grid of (K(gamma) - K(0)) / k_scale
  double k_scale = 0.0;
  double delta = 0.0;
  double kpp_difference = 0.0;       ///< extrapolated central difference of K at 0
  double kpp_form = 0.0;             ///< phi^T (A - B) phi
  double form_scale = 0.0;           ///< phi^T A phi + phi^T B phi
  double relative_error = 0.0;       ///< |difference - form| / form_scale (0 if phi = 0)
};

/// K(gamma) = E(u - gamma phi) - lambda sum_i h F(u_i - gamma phi_i).
double k_functional(const KernelWeights& kw, const Eigen::VectorXd& u, const Nonlinearity& nl,
                    double lambda, const Eigen::VectorXd& phi, double gamma);

/// For p < 2 only multiples of u are accepted as phi. Throws BadTestFunction when phi has a
/// negative entry, u - gamma_max phi goes negative or (p < 2) phi is not parallel to u.
SecondDifferenceReport second_difference_check(const KernelWeights& kw, const Eigen::VectorXd& u,
                                               const Nonlinearity& nl, double lambda,
                                               const Eigen::VectorXd& phi, double gamma_max,
                                               int grid_points = 21);

}  // namespace fracgelfand
