#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fracgelfand/quadrature.hpp"

namespace fracgelfand {

/// Reaction term f of the Gelfand problem together with its first two derivatives.
///
/// Built-in kinds are f(t) = e^t and f(t) = (1+t)^m. Custom nonlinearities must supply
/// f, f' and f'' explicitly; nothing is differentiated numerically. Construction spot-checks
/// f(0) > 0, monotonicity of f and f' >= 0 on `monotonicity_grid()`.
class Nonlinearity {
 public:
  enum class Kind { exponential, power, custom };

  static Nonlinearity exponential();
  static Nonlinearity power(double m);
  /// `antiderivative` is optional; when absent F(t) = int_0^t f is computed by quadrature.
  static Nonlinearity custom(std::string name, ScalarFn f, ScalarFn fprime, ScalarFn fsecond,
                             ScalarFn antiderivative = {});

  Kind kind() const { return kind_; }
  /// Exponent of the power kind; NaN otherwise.
  double m() const { return m_; }
  const std::string& name() const { return name_; }

  double f(double t) const { return f_(t); }
  double fprime(double t) const { return fp_(t); }
  double fsecond(double t) const { return fpp_(t); }
  /// F(t) = int_0^t f(sigma) dsigma.
  double antiderivative(double t) const;
  /// f(t) f''(t) / f'(t)^2, evaluated without overflow for the built-in kinds.
  double tau_ratio(double t) const;

 private:
  Nonlinearity() = default;

  Kind kind_ = Kind::custom;
  double m_ = 0.0;
  std::string name_;
  ScalarFn f_, fp_, fpp_, big_f_, ratio_;
};

/// 512 points: t = 0 followed by 511 log-spaced points on [1e-6, 1e6].
const std::vector<double>& monotonicity_grid();

enum class Derived { f, fprime, ftilde, psi, kappa };

/// f, f', f~ = f - f(0), psi = f~^(1/(p-1)) and kappa(t) = int_0^t f~^(2g-2) f'^2.
/// `gamma` is only read for Derived::kappa and must satisfy gamma >= 1/(p-1).
double eval_derived(const Nonlinearity& nl, double p, double t, Derived which,
                    double gamma = 0.0);

struct TauSample {
  double t;
  double ratio;
};

struct TauEstimate {
  double value;
  std::vector<TauSample> samples;   ///< f f''/f'^2 at t = 10^2 .. 10^6
  std::vector<double> extrapolated;  ///< Richardson values from consecutive sample pairs
};

/// Estimates tau = lim f f''/f'^2. Throws NoLimit when the last two extrapolants differ by
/// more than 1e-4.
TauEstimate tau_limit(const Nonlinearity& nl);

/// (ell + t^2)^((p-2)/2) t.
double xi_p_ell(double p, double ell, double t);

/// Phi_eps = h~_eps^{-1} o h with h(t) = int_0^t f^(-1/(p-1)) and h~_eps = h / (1-eps)^(1/(p-1)).
///
/// The constructor spot-checks convexity of f^(1/(p-1)) and throws NotConvex on failure.
class PhiTransform {
 public:
  PhiTransform(const Nonlinearity& nl, double p, double eps);

  double operator()(double t) const;
  /// Phi_eps'(t) = (1-eps)^(1/(p-1)) g(Phi_eps(t)) / g(t), g = f^(1/(p-1)).
  double derivative(double t) const;
  double h(double t) const;

  double p() const { return p_; }
  double eps() const { return eps_; }

 private:
  double g(double t) const;

  const Nonlinearity* nl_;
  double p_;
  double eps_;
  double shrink_;  // (1-eps)^(1/(p-1))
};

double phi_eps(const Nonlinearity& nl, double p, double eps, double t);

/// Smallest slope increment over a sampled grid, normalized by the local slope scale.
/// Nonnegative (up to roundoff) iff the samples are consistent with convexity.
double min_convexity_margin(const ScalarFn& fn, const std::vector<double>& grid);

// ---------------------------------------------------------------------------------------
// Scalar inequality oracles

struct InequalitySample {
  double a, b, alpha, beta;
};

struct InequalityMargin {
  std::string inequality;  ///< "kato_pair", "h_transform" or "power_gamma"
  std::string family;      ///< member of the built-in function family
  double min_margin;       ///< min over samples of (rhs-side - lhs-side) / scale
  InequalitySample worst;
  std::size_t evaluated;
};

struct InequalityReport {
  std::vector<InequalityMargin> margins;
  double min_margin() const;
};

/// Evaluates the pairwise Kato inequality, the H-transform inequality and the
/// (a^g - b^g)^2 bound on every sample; see the README for the exact forms.
/// Margins are normalized by |lhs| + |rhs| so the pass criterion is margin >= -1e-12.
InequalityReport check_scalar_inequalities(double p, double ell, double gamma,
                                           const std::vector<InequalitySample>& samples);

struct ConvexFamilyMember {
  std::string id;
  ScalarFn h;
  ScalarFn hprime;
};

struct IncreasingFamilyMember {
  std::string id;
  ScalarFn h;
  ScalarFn big_h;  ///< H(t) = int_0^t h'(sigma)^(1/p), closed form
};

std::vector<ConvexFamilyMember> convex_family();
std::vector<IncreasingFamilyMember> increasing_family(double p, double gamma);

}  // namespace fracgelfand
