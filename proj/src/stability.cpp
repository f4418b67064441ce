#include "fracgelfand/stability.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "fracgelfand/errors.hpp"
#include "fracgelfand/nonlocal_operator.hpp"

namespace fracgelfand {

namespace {

Eigen::VectorXd stiffness_diagonal(const Eigen::VectorXd& u, const Nonlinearity& nl, double lambda,
                                   double h) {
  if (!(lambda > 0.0)) throw SingularB("stability form: lambda must be positive");
  Eigen::VectorXd B(u.size());
  for (int i = 0; i < u.size(); ++i) {
    const double d = nl.fprime(u[i]);
    if (!(d > 0.0)) throw SingularB("stability form: f'(u_i) vanishes");
    B[i] = h * lambda * d;
  }
  return B;
}

// Bilinear version of the linearized form with eps = 0; pairs with equal u values are skipped
// because every profile eta(u) agrees on them.
Eigen::MatrixXd profile_gram(const KernelWeights& kw, const Eigen::VectorXd& u,
                             const Eigen::MatrixXd& phi) {
  const int n = kw.size();
  const double p = kw.p;
  const int k = static_cast<int>(phi.cols());
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(k, k);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double du = u[i] - u[j];
      if (du == 0.0) continue;
      const Eigen::VectorXd d = phi.row(i) - phi.row(j);
      G.noalias() += kw.W(i, j) * std::pow(std::abs(du), p - 2.0) * d * d.transpose();
    }
    if (u[i] != 0.0) {
      const Eigen::VectorXd v = phi.row(i);
      G.noalias() += kw.T[i] * std::pow(std::abs(u[i]), p - 2.0) * v * v.transpose();
    }
  }
  return (p - 1.0) * G;
}

}  // namespace

double default_eps_cap(const Eigen::VectorXd& u, double p) {
  if (p >= 2.0 || u.size() == 0) return 0.0;
  return 1e-6 * (1.0 + u.maxCoeff() - u.minCoeff());
}

StabilityForm assemble_stability_form(const KernelWeights& kw, const Eigen::VectorXd& u,
                                      const Nonlinearity& nl, double lambda,
                                      std::optional<double> eps_cap) {
  if (u.size() != kw.size()) throw ShapeMismatch("stability form: u length mismatch");
  StabilityForm form;
  form.p = kw.p;
  form.lambda = lambda;
  form.eps_cap = eps_cap.value_or(default_eps_cap(u, kw.p));
  if (kw.p < 2.0 && !(form.eps_cap > 0.0)) {
    throw ParameterOutOfRange("stability form: eps_cap must be positive for p < 2");
  }
  form.B = stiffness_diagonal(u, nl, lambda, kw.mesh.h);
  form.A = assemble_linearized_form(kw, u, form.eps_cap);
  return form;
}

PencilMinimum pencil_min_ratio(const Eigen::MatrixXd& A, const Eigen::VectorXd& B,
                               const PencilOptions& opts) {
  const auto n = B.size();
  if (A.rows() != n || A.cols() != n) throw ShapeMismatch("pencil: A and B sizes differ");
  if (n == 0) throw ShapeMismatch("pencil: empty system");
  if (!(B.array() > 0.0).all()) throw SingularB("pencil: B must be positive");
  Eigen::LLT<Eigen::MatrixXd> llt(A);
  if (llt.info() != Eigen::Success) throw DomainError("pencil: A is not positive definite");

  auto b_normalize = [&](Eigen::VectorXd& v) { v /= std::sqrt(v.dot(B.cwiseProduct(v))); };
  PencilMinimum out;
  Eigen::VectorXd x = Eigen::VectorXd::Ones(n);
  b_normalize(x);
  double rho = x.dot(A * x);
  for (int it = 1; it <= opts.max_iter; ++it) {
    x = llt.solve(B.cwiseProduct(x));
    b_normalize(x);
    const double next = x.dot(A * x);
    const bool done = std::abs(next - rho) <= opts.tol * std::abs(next);
    rho = next;
    if (done) {
      out.value = rho;
      out.vector = std::move(x);
      out.iterations = it;
      return out;
    }
  }
  throw NoConvergence("pencil: inverse iteration did not settle", x, rho);
}

const std::vector<LipschitzProfile>& lipschitz_profiles() {
  static const std::vector<LipschitzProfile> profiles = {
      {"t", [](double t) { return t; }},
      {"t2", [](double t) { return t * t; }},
      {"t3", [](double t) { return t * t * t; }},
      {"one_minus_exp", [](double t) { return -std::expm1(-t); }},
      {"exp_minus_one", [](double t) { return std::expm1(t); }},
      {"log1p", [](double t) { return std::log1p(t); }},
      {"t_over_1pt", [](double t) { return t / (1.0 + t); }},
      {"tanh", [](double t) { return std::tanh(t); }},
  };
  return profiles;
}

double constrained_stability_ratio(const KernelWeights& kw, const Eigen::VectorXd& u,
                                   const Nonlinearity& nl, double lambda) {
  if (u.size() != kw.size()) throw ShapeMismatch("constrained ratio: u length mismatch");
  if (u.minCoeff() < 0.0) throw DomainError("constrained ratio: u must be nonnegative");
  const Eigen::VectorXd B = stiffness_diagonal(u, nl, lambda, kw.mesh.h);
  const auto& profiles = lipschitz_profiles();
  const int n = kw.size();
  const int k = static_cast<int>(profiles.size());
  Eigen::MatrixXd phi(n, k);
  for (int c = 0; c < k; ++c) {
    for (int i = 0; i < n; ++i) phi(i, c) = profiles[c].eta(u[i]);
  }
  const Eigen::MatrixXd Ac = profile_gram(kw, u, phi);
  const Eigen::MatrixXd Bc = phi.transpose() * B.asDiagonal() * phi;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> beig(Bc);
  const Eigen::VectorXd mu = beig.eigenvalues();
  const double cutoff = 1e-12 * mu.maxCoeff();
  std::vector<int> keep;
  for (int c = 0; c < k; ++c) {
    if (mu[c] > cutoff) keep.push_back(c);
  }
  if (keep.empty()) throw SingularB("constrained ratio: profiles span nothing");
  Eigen::MatrixXd S(k, keep.size());
  for (std::size_t c = 0; c < keep.size(); ++c) {
    S.col(c) = beig.eigenvectors().col(keep[c]) / std::sqrt(mu[keep[c]]);
  }
  const Eigen::MatrixXd reduced = S.transpose() * Ac * S;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (reduced + reduced.transpose()),
                                                     Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

StabilityResult stability_ratio(const KernelWeights& kw, const Eigen::VectorXd& u,
                                const Nonlinearity& nl, double lambda,
                                std::optional<double> eps_cap, bool constrained,
                                const PencilOptions& opts) {
  const StabilityForm form = assemble_stability_form(kw, u, nl, lambda, eps_cap);
  PencilMinimum m = pencil_min_ratio(form.A, form.B, opts);
  StabilityResult r;
  r.rho = m.value;
  r.phi_min = std::move(m.vector);
  r.iterations = m.iterations;
  r.eps_cap = form.eps_cap;
  r.stable = r.rho >= 1.0 - kStabilityTolerance;
  if (constrained) {
    r.rho_constrained = constrained_stability_ratio(kw, u, nl, lambda);
    r.stable_constrained = *r.rho_constrained >= 1.0 - kStabilityTolerance;
  }
  return r;
}

double k_functional(const KernelWeights& kw, const Eigen::VectorXd& u, const Nonlinearity& nl,
                    double lambda, const Eigen::VectorXd& phi, double gamma) {
  const Eigen::VectorXd v = u - gamma * phi;
  double source = 0.0;
  for (int i = 0; i < v.size(); ++i) source += nl.antiderivative(v[i]);
  return discrete_energy(kw, v) - lambda * kw.mesh.h * source;
}

SecondDifferenceReport second_difference_check(const KernelWeights& kw, const Eigen::VectorXd& u,
                                               const Nonlinearity& nl, double lambda,
                                               const Eigen::VectorXd& phi, double gamma_max,
                                               int grid_points) {
  const int n = kw.size();
  if (u.size() != n || phi.size() != n) throw ShapeMismatch("second difference: length mismatch");
  if (!(gamma_max >= 0.0) || grid_points < 2) {
    throw ParameterOutOfRange("second difference: need gamma_max >= 0 and >= 2 grid points");
  }
  if ((phi.array() < 0.0).any()) throw BadTestFunction("second difference: phi must be >= 0");
  if (((u - gamma_max * phi).array() < 0.0).any()) {
    throw BadTestFunction("second difference: u - gamma_max phi goes negative");
  }
  if (kw.p < 2.0 && phi.squaredNorm() > 0.0) {
    const double c = phi.dot(u) / u.squaredNorm();
    if ((phi - c * u).norm() > 1e-12 * phi.norm()) {
      throw BadTestFunction("second difference: for p < 2 phi must be a multiple of u");
    }
  }

  SecondDifferenceReport rep;
  const double k0 = k_functional(kw, u, nl, lambda, phi, 0.0);
  double source = 0.0;
  for (int i = 0; i < n; ++i) source += std::abs(nl.antiderivative(u[i]));
  rep.k_scale = std::abs(k0) + discrete_energy(kw, u) + lambda * kw.mesh.h * source;
  rep.min_gap = 0.0;
  for (int k = 0; k < grid_points; ++k) {
    const double g = gamma_max * k / (grid_points - 1);
    const double val = k == 0 ? k0 : k_functional(kw, u, nl, lambda, phi, g);
    rep.gammas.push_back(g);
    rep.k_values.push_back(val);
    rep.min_gap = std::min(rep.min_gap, (val - k0) / rep.k_scale);
  }

  const double phi_sup = phi.cwiseAbs().maxCoeff();
  const double a_part = linearized_quadratic_form(kw, u, phi, 0.0);
  const Eigen::VectorXd B = stiffness_diagonal(u, nl, lambda, kw.mesh.h);
  const double b_part = phi.dot(B.cwiseProduct(phi));
  rep.kpp_form = a_part - b_part;
  rep.form_scale = a_part + b_part;
  if (phi_sup == 0.0) return rep;

  // The central difference carries a delta^2 error plus, for 2 < p < 4, an exact delta^(p-2)
  // term from pairs where u is flat but phi is not. Extrapolating over halved steps with both
  // exponents removes them.
  rep.delta = 1e-3 * std::max(1.0, u.cwiseAbs().maxCoeff()) / phi_sup;
  auto central = [&](double d) {
    return (k_functional(kw, u, nl, lambda, phi, d) - 2.0 * k0 +
            k_functional(kw, u, nl, lambda, phi, -d)) /
           (d * d);
  };
  std::vector<double> exponents = {2.0};
  if (kw.p > 2.0 && kw.p < 3.75) exponents.push_back(kw.p - 2.0);
  const int levels = static_cast<int>(exponents.size()) + 1;
  Eigen::MatrixXd M(levels, levels);
  Eigen::VectorXd values(levels);
  for (int k = 0; k < levels; ++k) {
    const double step = rep.delta * std::ldexp(1.0, -k);
    values[k] = central(step);
    M(0, k) = 1.0;
    for (int e = 0; e < levels - 1; ++e) M(e + 1, k) = std::pow(step / rep.delta, exponents[e]);
  }
  // Weights w with sum w = 1 and sum w_k step_k^a = 0 for every exponent a.
  Eigen::VectorXd unit = Eigen::VectorXd::Zero(levels);
  unit[0] = 1.0;
  const Eigen::VectorXd w = M.fullPivLu().solve(unit);
  rep.kpp_difference = w.dot(values);
  rep.relative_error = std::abs(rep.kpp_difference - rep.kpp_form) / rep.form_scale;
  return rep;
}

}  // namespace fracgelfand
