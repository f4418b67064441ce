#pragma once

#include <Eigen/Core>

#include "fracgelfand/mesh.hpp"

namespace fracgelfand {

/// J(t) = |t|^(p-2) t, with J(0) = 0 for every p > 1.
double odd_power(double t, double p);

/// (L u)_i = sum_{j != i} W(i,j) J(u_i - u_j) + T(i) J(u_i).
Eigen::VectorXd apply_operator(const KernelWeights& kw, const Eigen::VectorXd& u);

/// Discrete seminorm to the p-th power,
///   1/2 sum_{i != j} W(i,j) |u_i - u_j|^p + sum_i T(i) |u_i|^p,
/// normalized so that <L u, u> equals it exactly (Euler identity).
double discrete_seminorm_p(const KernelWeights& kw, const Eigen::VectorXd& u);

/// Convex energy E(u) = seminorm_p(u) / p, whose gradient is L u.
double discrete_energy(const KernelWeights& kw, const Eigen::VectorXd& u);

/// Symmetric matrix A of the linearized form
///   Q_A(phi) = (p-1) [ 1/2 sum_{i != j} W(i,j) w_ij (phi_i - phi_j)^2 + sum_i T(i) t_i phi_i^2 ]
/// with w_ij = (eps^2 + (u_i-u_j)^2)^((p-2)/2) and t_i = (eps^2 + u_i^2)^((p-2)/2).
/// Throws SingularWeight when eps = 0, p < 2 and some difference (or u_i) vanishes.
Eigen::MatrixXd assemble_linearized_form(const KernelWeights& kw, const Eigen::VectorXd& u,
                                         double eps);

/// Q_A(phi) by direct pair summation. Pairs with a vanishing weight base contribute 0 when
/// the matching phi difference also vanishes (the constrained test-space convention);
/// otherwise they raise SingularWeight for p < 2.
double linearized_quadratic_form(const KernelWeights& kw, const Eigen::VectorXd& u,
                                 const Eigen::VectorXd& phi, double eps);

}  // namespace fracgelfand
