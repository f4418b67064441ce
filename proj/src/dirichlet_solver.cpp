#include "fracgelfand/dirichlet_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fracgelfand/errors.hpp"
#include "fracgelfand/nonlocal_operator.hpp"

namespace fracgelfand {

namespace {

constexpr double kArmijo = 1e-4;
constexpr double kBacktrack = 0.5;

double sup_norm(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

Eigen::MatrixXd unit_weight_form(const KernelWeights& kw) {
  // The p = 2 form: weighted graph Laplacian plus the tail diagonal.
  const int n = kw.size();
  Eigen::MatrixXd A = -kw.W;
  for (int i = 0; i < n; ++i) A(i, i) = kw.W.col(i).sum() + kw.T[i];
  return A;
}

// (|d+e|^p - |d|^p) / p with relative accuracy when e is small against d.
double power_change(double d, double e, double p) {
  if (e == 0.0) return 0.0;
  const double x = d + e;
  if (d != 0.0 && (d > 0.0) == (x > 0.0)) {
    return std::pow(std::abs(d), p) * std::expm1(p * std::log1p(e / d)) / p;
  }
  return (std::pow(std::abs(x), p) - std::pow(std::abs(d), p)) / p;
}

// E(v) - E(u) summed term by term, so that decrements far below |E| stay resolved.
double energy_change(const KernelWeights& kw, const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  const int n = kw.size();
  const double p = kw.p;
  double sum = 0.0, carry = 0.0;
  auto add = [&](double x) {
    const double y = x - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  };
  for (int i = 0; i < n; ++i) {
    double row = kw.T[i] * power_change(u[i], v[i] - u[i], p);
    for (int j = i + 1; j < n; ++j) {
      const double d = u[i] - u[j];
      row += kw.W(i, j) * power_change(d, (v[i] - v[j]) - d, p);
    }
    add(row);
  }
  return sum;
}

// sum_j W(i,j) |J(u_i - u_j)| + T(i) |J(u_i)|: the magnitude that cancels inside (L u)_i.
Eigen::VectorXd absolute_rows(const KernelWeights& kw, const Eigen::VectorXd& u) {
  const int n = kw.size();
  Eigen::VectorXd out(n);
  for (int i = 0; i < n; ++i) {
    double r = kw.T[i] * std::pow(std::abs(u[i]), kw.p - 1.0);
    for (int j = 0; j < n; ++j) {
      if (j != i) r += kw.W(i, j) * std::pow(std::abs(u[i] - u[j]), kw.p - 1.0);
    }
    out[i] = r;
  }
  return out;
}

// Largest change of a residual entry when every difference moves by the rounding error of u.
// This is the accuracy floor of the residual in double precision.
double residual_floor(const KernelWeights& kw, const Eigen::VectorXd& u) {
  const int n = kw.size();
  const double q = kw.p - 1.0;
  const double delta = 2.0 * std::numeric_limits<double>::epsilon() * sup_norm(u);
  auto change = [&](double d) { return std::pow(std::abs(d) + delta, q) - std::pow(std::abs(d), q); };
  double out = 0.0;
  for (int i = 0; i < n; ++i) {
    double r = kw.T[i] * change(u[i]);
    for (int j = 0; j < n; ++j) {
      if (j != i) r += kw.W(i, j) * change(u[i] - u[j]);
    }
    out = std::max(out, r);
  }
  return out;
}

using BoolMatrix = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

// Newton matrix for p < 2 in which the marked pairs (and tail terms, on the diagonal of
// `secant`) carry the secant weight J(d)/d = |d|^(p-2) instead of J'(d). The secant weight
// majorizes the curvature, so a flagged difference heading through 0 lands on it instead of
// overshooting.
Eigen::MatrixXd mixed_form(const KernelWeights& kw, const Eigen::VectorXd& u, double eps,
                           double floor_eps, const BoolMatrix& secant) {
  const int n = kw.size();
  const double p = kw.p;
  auto w = [&](double d, bool sec) {
    if (sec) {
      return std::pow(std::max({std::abs(d), floor_eps, std::numeric_limits<double>::min()}), p - 2.0);
    }
    return (p - 1.0) * std::pow(eps * eps + d * d, 0.5 * (p - 2.0));
  };
  Eigen::MatrixXd A(n, n);
  for (int i = 0; i < n; ++i) {
    double diag = kw.T[i] * w(u[i], secant(i, i));
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const double a = kw.W(i, j) * w(u[i] - u[j], secant(i, j));
      A(i, j) = -a;
      diag += a;
    }
    A(i, i) = diag;
  }
  return A;
}

}  // namespace

DirichletSolver::DirichletSolver(const KernelWeights& kw, SolveOptions opts)
    : kw_(&kw), opts_(std::move(opts)) {
  if (!(opts_.tol > 0.0)) throw ParameterOutOfRange("DirichletSolver: tol must be positive");
  linear_.compute(unit_weight_form(kw));
}

Eigen::VectorXd DirichletSolver::default_start(const Eigen::VectorXd& rhs) const {
  Eigen::VectorXd v = linear_.solve(rhs);
  if (kw_->p == 2.0) return v;
  const double scale = sup_norm(v);
  if (!(scale > 0.0) || !std::isfinite(scale)) return Eigen::VectorXd::Zero(rhs.size());
  v /= scale;  // keeps the p-th powers below overflow
  const double s = discrete_seminorm_p(*kw_, v);
  const double b = rhs.dot(v);
  if (s <= 0.0 || b == 0.0) return Eigen::VectorXd::Zero(rhs.size());
  // argmin_c |c|^p s / p - c b
  const double c = std::copysign(std::pow(std::abs(b) / s, 1.0 / (kw_->p - 1.0)), b);
  return c * v;
}

SolveResult DirichletSolver::solve(const Eigen::VectorXd& g) const {
  if (g.size() != kw_->size()) throw ShapeMismatch("solve_dirichlet: rhs length mismatch");
  if (!g.allFinite()) throw DomainError("solve_dirichlet: rhs must be finite");
  const Eigen::VectorXd rhs = kw_->mesh.h * g;
  if (opts_.initial) {
    if (opts_.initial->size() != g.size()) throw ShapeMismatch("solve_dirichlet: initial length");
    return newton(rhs, *opts_.initial);
  }
  return newton(rhs, default_start(rhs));
}

SolveResult DirichletSolver::solve(const Eigen::VectorXd& g, const Eigen::VectorXd& initial) const {
  if (g.size() != kw_->size() || initial.size() != kw_->size()) {
    throw ShapeMismatch("solve_dirichlet: length mismatch");
  }
  if (!g.allFinite()) throw DomainError("solve_dirichlet: rhs must be finite");
  const Eigen::VectorXd rhs = kw_->mesh.h * g;
  // The ray start wins whenever it has lower energy; this also covers initial = 0, where the
  // Newton matrix vanishes for p > 2.
  const Eigen::VectorXd ray = default_start(rhs);
  auto objective = [&](const Eigen::VectorXd& v) { return discrete_energy(*kw_, v) - rhs.dot(v); };
  if (initial.isZero(0.0) || objective(ray) < objective(initial)) return newton(rhs, ray);
  return newton(rhs, initial);
}

SolveResult DirichletSolver::newton(const Eigen::VectorXd& rhs, Eigen::VectorXd u) const {
  const KernelWeights& kw = *kw_;
  const double p = kw.p;
  const double target = opts_.tol * std::max(1.0, sup_norm(rhs));
  auto objective = [&](const Eigen::VectorXd& v) { return discrete_energy(kw, v) - rhs.dot(v); };

  SolveResult res;
  double energy = objective(u);
  res.energy_history.push_back(energy);
  Eigen::VectorXd grad = apply_operator(kw, u) - rhs;
  double gnorm = sup_norm(grad);

  Eigen::VectorXd best = u;
  double best_norm = gnorm;
  double last_step = 0.1 * sup_norm(u);

  auto converged = [&] {
    return gnorm <= target || (p != 2.0 && gnorm <= 4.0 * residual_floor(kw, u));
  };
  for (int it = 0; it < opts_.max_iter; ++it) {
    if (converged()) {
      res.u = std::move(u);
      res.iterations = it;
      res.residual = gnorm;
      return res;
    }
    auto factored_step = [&](Eigen::MatrixXd A) -> Eigen::VectorXd {
      if (!(A.diagonal().maxCoeff() > 0.0)) A = unit_weight_form(kw);
      Eigen::LLT<Eigen::MatrixXd> llt(A);
      // Degenerate Hessians (p > 2 near constant states) get a growing diagonal shift.
      double shift = 1e-12 * A.diagonal().maxCoeff();
      while (llt.info() != Eigen::Success) {
        if (!std::isfinite(shift) || shift > 1e300) {
          throw NoConvergence("solve_dirichlet: Newton matrix could not be factored", best,
                              best_norm);
        }
        A.diagonal().array() += shift;
        llt.compute(A);
        shift *= 10.0;
      }
      return -llt.solve(grad);
    };

    Eigen::VectorXd trial;
    Eigen::VectorXd trial_grad;
    double decrease = 0.0;
    auto line_search = [&](const Eigen::VectorXd& step) {
      const double slope = grad.dot(step);
      // Rounding noise of energy_change: the first part scales with the step, the second is
      // the rounding of u + alpha * step itself. Below it the energy cannot rank trial points
      // and the residual 2-norm takes over as merit function.
      const Eigen::VectorXd scale = 2.0 * absolute_rows(kw, u) + rhs.cwiseAbs();
      const double noise = std::numeric_limits<double>::epsilon() *
                           (64.0 * scale.dot(step.cwiseAbs()) + 2.0 * scale.dot(u.cwiseAbs()));
      // Shorter steps would be swamped by the rounding of u + alpha * step.
      const double min_alpha =
          std::max(1e-12, 2.0 * std::numeric_limits<double>::epsilon() * sup_norm(u) /
                              std::max(sup_norm(step), std::numeric_limits<double>::min()));
      if (-kArmijo * slope > noise) {
        for (double alpha = 1.0; alpha >= min_alpha; alpha *= kBacktrack) {
          trial = u + alpha * step;
          decrease = energy_change(kw, u, trial) - rhs.dot(trial - u);
          if (decrease <= kArmijo * alpha * slope) {
            trial_grad = apply_operator(kw, trial) - rhs;
            return true;
          }
        }
      }
      const double gnorm2 = grad.norm();
      for (double alpha = 1.0; alpha >= min_alpha; alpha *= kBacktrack) {
        trial = u + alpha * step;
        trial_grad = apply_operator(kw, trial) - rhs;
        if (trial_grad.norm() <= (1.0 - kArmijo * alpha) * gnorm2) {
          decrease = std::min(0.0, energy_change(kw, u, trial) - rhs.dot(trial - u));
          return true;
        }
      }
      return false;
    };

    bool accepted = false;
    if (p == 2.0) {
      accepted = line_search(-linear_.solve(grad));
    } else if (p > 2.0) {
      accepted = line_search(factored_step(assemble_linearized_form(kw, u, opts_.eps_reg.value_or(0.0))));
    } else {
      // Differences below the last step length are not resolved yet, so the regularization
      // follows that length down to a floor (eps_reg when given).
      const double floor_eps = opts_.eps_reg.value_or(
          4.0 * std::numeric_limits<double>::epsilon() * std::max(sup_norm(u), 1e-150));
      const double eps = std::max(floor_eps, last_step);
      const int n = kw.size();
      // Differences that the Newton step drives through 0 switch to the secant weight.
      BoolMatrix secant = BoolMatrix::Constant(n, n, false);
      Eigen::VectorXd step = factored_step(mixed_form(kw, u, eps, floor_eps, secant));
      for (int round = 0; round < 3; ++round) {
        bool flipped = false;
        for (int i = 0; i < n; ++i) {
          if (!secant(i, i) && u[i] * (u[i] + step[i]) < 0.0) secant(i, i) = flipped = true;
          for (int j = i + 1; j < n; ++j) {
            const double d = u[i] - u[j];
            if (!secant(i, j) && d * (d + step[i] - step[j]) < 0.0) {
              secant(i, j) = secant(j, i) = flipped = true;
            }
          }
        }
        if (!flipped) break;
        step = factored_step(mixed_form(kw, u, eps, floor_eps, secant));
      }
      accepted = line_search(step);
      if (!accepted) {
        // All-secant weights give a quadratic majorant of the energy, whose minimizer
        // decreases it.
        accepted = line_search(factored_step(
            mixed_form(kw, u, eps, floor_eps, BoolMatrix::Constant(n, n, true))));
      }
    }
    if (!accepted) throw NoConvergence("solve_dirichlet: line search failed", best, best_norm);
    const double trial_energy = energy + decrease;
    last_step = sup_norm(trial - u);
    u = std::move(trial);
    energy = trial_energy;
    res.energy_history.push_back(energy);
    grad = std::move(trial_grad);
    gnorm = sup_norm(grad);
    if (gnorm < best_norm) {
      best_norm = gnorm;
      best = u;
    }
  }
  if (converged()) {
    res.u = std::move(u);
    res.iterations = opts_.max_iter;
    res.residual = gnorm;
    return res;
  }
  throw NoConvergence("solve_dirichlet: max_iter reached", best, best_norm);
}

SolveResult solve_dirichlet(const KernelWeights& kw, const Eigen::VectorXd& g,
                            const SolveOptions& opts) {
  return DirichletSolver(kw, opts).solve(g);
}

double semilinear_residual(const KernelWeights& kw, const Nonlinearity& nl, double lambda,
                           const Eigen::VectorXd& u) {
  Eigen::VectorXd r = apply_operator(kw, u);
  for (int i = 0; i < u.size(); ++i) r[i] -= kw.mesh.h * lambda * nl.f(u[i]);
  return sup_norm(r);
}

MonotoneResult monotone_iteration(const KernelWeights& kw, const Nonlinearity& nl, double lambda,
                                  const Eigen::VectorXd& u_sub,
                                  const std::optional<Eigen::VectorXd>& u_super,
                                  const MonotoneOptions& opts) {
  if (u_sub.size() != kw.size()) throw ShapeMismatch("monotone_iteration: u_sub length");
  if (!(lambda >= 0.0)) throw DomainError("monotone_iteration: lambda must be nonnegative");
  if (u_super) {
    if (u_super->size() != kw.size()) throw ShapeMismatch("monotone_iteration: u_super length");
    if (((u_sub - *u_super).array() > 0.0).any()) {
      throw BadBracket("monotone_iteration: u_sub exceeds u_super");
    }
  }
  const DirichletSolver solver(kw, opts.inner);
  const int n = kw.size();

  MonotoneResult out;
  out.min_increment = HUGE_VAL;
  out.max_excess = -HUGE_VAL;
  Eigen::VectorXd u = u_sub;
  Eigen::VectorXd g(n);
  for (int j = 1; j <= opts.max_outer; ++j) {
    for (int i = 0; i < n; ++i) g[i] = lambda * nl.f(u[i]);
    if (!g.allFinite()) {
      out.status = MonotoneStatus::diverged;
      out.reason = DivergenceReason::norm_cap;
      out.u = u;
      out.iterations = j - 1;
      return out;
    }
    Eigen::VectorXd next;
    if (kw.p == 2.0) {
      next = solver.solve(g).u;
    } else {
      // A ray estimate past the cap is blowup; solving that rhs would overflow the energy.
      Eigen::VectorXd ray = solver.ray_start(g);
      if (!(sup_norm(ray) <= opts.cap)) {
        next = std::move(ray);
      } else {
        next = solver.solve(g, u).u;
      }
    }
    const double norm = sup_norm(next);
    out.norms.push_back(norm);
    out.iterations = j;
    if (!next.allFinite() || norm > opts.cap) {
      out.status = MonotoneStatus::diverged;
      out.reason = DivergenceReason::norm_cap;
      out.u = std::move(next);
      return out;
    }
    out.min_increment = std::min(out.min_increment, (next - u).minCoeff());
    if (u_super) out.max_excess = std::max(out.max_excess, (next - *u_super).maxCoeff());
    const double increment = sup_norm(next - u);
    u = std::move(next);
    if (increment <= opts.tol) {
      out.status = MonotoneStatus::converged;
      out.u = u;
      out.residual = semilinear_residual(kw, nl, lambda, u);
      return out;
    }
  }
  out.status = MonotoneStatus::diverged;
  out.reason = DivergenceReason::max_outer;
  out.u = std::move(u);
  return out;
}

}  // namespace fracgelfand
