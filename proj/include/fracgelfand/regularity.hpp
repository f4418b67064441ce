#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fracgelfand/mesh.hpp"
#include "fracgelfand/scalar_kit.hpp"

namespace fracgelfand {

// ---------------------------------------------------------------------------------------
// Closed-form thresholds

/// G_s(m,p) = sp/(p-1) (1 + mp/(m-p+1) + 2 sqrt(m/(m-p+1))), s in (0,1], p > 1, m > p-1.
double threshold_G(double s, double p, double m);

/// 2 + 4m/(m-1) + 4 sqrt(m/(m-1)), the s = 1, p = 2 form written out separately; m > 1.
double threshold_G1_p2(double m);

/// beta(sigma) = (sigma + sqrt(sigma (sigma - p + 1))) / (p-1), sigma >= p-1.
double threshold_beta(double sigma, double p);

struct BetaMidpointCheck {
  double gamma = 0.0;  ///< midpoint of (sigma/(p-1), beta(sigma))
  double bound = 0.0;  ///< (p-1) gamma^2 / (2 gamma - 1)
  bool holds = false;  ///< sigma > bound
};

/// The interval is empty when sigma = p-1; `holds` is then false and gamma equals both ends.
BetaMidpointCheck beta_midpoint_check(double sigma, double p);

/// sp + 4sp/(p-1).
double linf_threshold(double s, double p);

/// sp + 2sp/(p-1) (1 + sqrt(1 - (p-1)(1-tau))), tau > (p-2)/(p-1).
double convex_dimension_threshold(double s, double p, double tau);

/// L^inf dimension bound for (p-2)/(p-1) < tau < 1 obtained through the growth exponent
/// m = 1/(1-tau) (limit of vanishing slack).
double subunit_tau_threshold(double s, double p, double tau);

/// Exponent of the integrability range for N >= N(s,p):
/// N (2 sqrt(1 - (p-1)(1-tau)) + p) / (N - N(s,p)); +inf when N = N(s,p).
double convex_q0(double N, double s, double p, double tau);

/// Admissible gamma range (1/(p-1), (1 + sqrt(1 - (p-1)(1-tau)))/(p-1)).
std::pair<double, double> gamma_interval(double p, double tau);

/// q* = N[(p-1)(2 gamma + 1) - 1] / (N - (2 gamma + 1) sp), +inf at N = (2 gamma + 1) sp.
/// Throws DomainError when N < (2 gamma + 1) sp (bounded case, no q*).
double q_star(double N, double s, double p, double gamma);

/// Growth exponent m = 1/(1 - tau) attached to tau < 1.
double growth_exponent(double tau);

// ---------------------------------------------------------------------------------------
// Exponent recurrences

enum class BootstrapKind {
  /// q -> N(p-1) q / (m (N - spq)), barrier l = (1 - (p-1)/m) N / (sp)
  power_barrier,
  /// q -> N q (p-1) p' / (N(q+1) - spqp')
  conjugate,
  /// q -> N q (p-1)(2g+1) / (N(q+1) - spq(2g+1))
  gamma_weighted,
};

std::string to_string(BootstrapKind kind);
/// Throws ParameterOutOfRange for unknown names.
BootstrapKind bootstrap_kind_from_string(const std::string& name);

enum class BootstrapVerdict { escaped, converged_to_fixed_point, stalled };

std::string to_string(BootstrapVerdict verdict);

struct BootstrapParams {
  BootstrapKind kind = BootstrapKind::power_barrier;
  double N = 1.0;
  double s = 0.5;
  double p = 2.0;
  double m = 0.0;      ///< power_barrier only
  double gamma = 0.0;  ///< gamma_weighted only
  double q0 = 1.0;
  int max_steps = 10000;
};

struct BootstrapRun {
  BootstrapParams params;
  std::vector<double> q;  ///< q0, q1, ... up to the last admissible iterate
  BootstrapVerdict verdict = BootstrapVerdict::stalled;
  int escape_step = -1;   ///< index k at which the denominator condition first fails
  double fixed_point = 0.0;
};

/// Escape means the denominator condition fails at q_k (L^inf is reached). Convergence is
/// declared when |q_{k+1} - q_k| < 1e-12. For power_barrier a start below the repelling
/// barrier l makes the forward map decrease; the run then reports l itself, located by the
/// inverse recurrence.
BootstrapRun bootstrap_sequence(const BootstrapParams& params);

/// Closed-form barrier (1 - (p-1)/m) N / (sp).
double power_barrier_fixed_point(double N, double s, double p, double m);

// ---------------------------------------------------------------------------------------
// Dimension report

struct TheoremEntry {
  std::string key;
  bool applicable = false;
  std::string reason;  ///< why the hypotheses fail, when not applicable
  std::optional<bool> energy_class;  ///< u* in W_0^{s,p} guaranteed
  std::optional<bool> bounded;       ///< u* in L^inf guaranteed
  std::vector<std::pair<std::string, double>> values;
  std::string lq_range;  ///< integrability statement when not bounded
};

struct DimensionReport {
  double N = 1.0, s = 0.5, p = 2.0;
  std::string nonlinearity;
  std::vector<std::pair<std::string, double>> common;  ///< sp, sp p', sp + 4sp/(p-1)
  std::vector<TheoremEntry> entries;
};

/// Convexity spot check of (f - f(0))^(1/(p-1)) (p >= 2) or f (p < 2) on [0, 50].
bool convexity_hypothesis_holds(const Nonlinearity& nl, double p);

DimensionReport dimension_report(double N, double s, double p, const Nonlinearity& nl);

// ---------------------------------------------------------------------------------------
// Empirical L^r estimates

enum class LrRegime { l1_data, subcritical, critical, supercritical, holder };

std::string to_string(LrRegime regime);

/// Regime of the L^r estimate for data in L^q in dimension N, plus admissibility of r.
LrRegime select_lr_regime(double N, double s, double p, double q);
bool lr_exponent_admissible(LrRegime regime, double N, double s, double p, double q, double r);

/// (sum_i h |v_i|^r)^(1/r); the maximum for r = inf.
double discrete_lr_norm(const Eigen::VectorXd& v, double h, double r);

struct LrTable {
  LrRegime regime = LrRegime::l1_data;
  double q = 1.0;
  std::vector<double> r_list;
  std::vector<std::vector<double>> ratios;  ///< [rhs][r]: |u|_r / |g|_q^(1/(p-1))
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  double spread = 0.0;             ///< max / min
  double homogeneity_error = 0.0;  ///< max relative ratio change under g -> 2^(p-1) g
};

/// Throws RangeError when some r is outside the admissible range of the selected regime.
LrTable verify_lr_estimates(const KernelWeights& kw, const std::vector<Eigen::VectorXd>& rhs,
                            double q, const std::vector<double>& r_list, double N = 1.0);

/// (N/(N-sp)) (p^p S / |g|)^(1/(p-1)); requires N > sp, S > 0 and |g| > 0.
double compute_alpha0(double S, double N, double s, double p, double g_norm);

}  // namespace fracgelfand
