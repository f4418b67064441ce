#include <algorithm>
#include <cmath>
#include <limits>

#include "fracgelfand/dirichlet_solver.hpp"
#include "fracgelfand/errors.hpp"
#include "fracgelfand/regularity.hpp"

namespace fracgelfand {

std::string to_string(LrRegime regime) {
  switch (regime) {
    case LrRegime::l1_data: return "l1_data";
    case LrRegime::subcritical: return "subcritical";
    case LrRegime::critical: return "critical";
    case LrRegime::supercritical: return "supercritical";
    case LrRegime::holder: return "holder";
  }
  return "unknown";
}

LrRegime select_lr_regime(double N, double s, double p, double q) {
  if (!(s > 0.0 && s < 1.0) || !(p > 1.0) || !(N >= 1.0)) {
    throw DomainError("select_lr_regime: need s in (0,1), p > 1, N >= 1");
  }
  if (!(q >= 1.0)) throw DomainError("select_lr_regime: need q >= 1");
  const double crit = N / (s * p);
  if (crit < 1.0) return LrRegime::holder;
  if (q == 1.0) return LrRegime::l1_data;
  if (q < crit) return LrRegime::subcritical;
  if (q == crit) return LrRegime::critical;
  return LrRegime::supercritical;
}

bool lr_exponent_admissible(LrRegime regime, double N, double s, double p, double q, double r) {
  if (!(r > 0.0)) return false;
  const double sp = s * p;
  switch (regime) {
    case LrRegime::l1_data:
      if (N == sp) return r >= 1.0 && std::isfinite(r);
      return r < N * (p - 1.0) / (N - sp);
    case LrRegime::subcritical:
      return r <= N * (p - 1.0) * q / (N - sp * q);
    case LrRegime::critical:
      return std::isfinite(r);
    case LrRegime::supercritical:
    case LrRegime::holder:
      return true;
  }
  return false;
}

double discrete_lr_norm(const Eigen::VectorXd& v, double h, double r) {
  if (!(r > 0.0)) throw RangeError("discrete_lr_norm: r must be positive");
  if (std::isinf(r)) return v.size() ? v.cwiseAbs().maxCoeff() : 0.0;
  double sum = 0.0;
  for (int i = 0; i < v.size(); ++i) sum += h * std::pow(std::abs(v[i]), r);
  return std::pow(sum, 1.0 / r);
}

LrTable verify_lr_estimates(const KernelWeights& kw, const std::vector<Eigen::VectorXd>& rhs,
                            double q, const std::vector<double>& r_list, double N) {
  LrTable table;
  table.q = q;
  table.r_list = r_list;
  table.regime = select_lr_regime(N, kw.s, kw.p, q);
  for (double r : r_list) {
    if (!lr_exponent_admissible(table.regime, N, kw.s, kw.p, q, r)) {
      throw RangeError("verify_lr_estimates: r outside the admissible range of the " +
                       to_string(table.regime) + " regime");
    }
  }
  if (rhs.empty()) throw ShapeMismatch("verify_lr_estimates: empty rhs family");

  SolveOptions opts;
  opts.tol = 1e-13;
  const DirichletSolver solver(kw, opts);
  const double h = kw.mesh.h;
  const double p = kw.p;
  const double scale = std::pow(2.0, p - 1.0);

  table.min_ratio = std::numeric_limits<double>::infinity();
  table.max_ratio = 0.0;
  for (const auto& g : rhs) {
    if (!g.allFinite()) throw DomainError("verify_lr_estimates: rhs must be finite");
    const double gq = discrete_lr_norm(g, h, q);
    if (!(gq > 0.0)) throw DomainError("verify_lr_estimates: rhs must be nonzero");
    const Eigen::VectorXd u = solver.solve(g).u;
    const Eigen::VectorXd u2 = solver.solve(scale * g).u;
    const double base = std::pow(gq, 1.0 / (p - 1.0));
    const double base2 = std::pow(discrete_lr_norm(scale * g, h, q), 1.0 / (p - 1.0));
    std::vector<double> row;
    for (double r : r_list) {
      const double ratio = discrete_lr_norm(u, h, r) / base;
      const double ratio2 = discrete_lr_norm(u2, h, r) / base2;
      table.homogeneity_error = std::max(table.homogeneity_error, std::abs(ratio2 - ratio) / ratio);
      table.min_ratio = std::min(table.min_ratio, ratio);
      table.max_ratio = std::max(table.max_ratio, ratio);
      row.push_back(ratio);
    }
    table.ratios.push_back(std::move(row));
  }
  table.spread = table.max_ratio / table.min_ratio;
  return table;
}

double compute_alpha0(double S, double N, double s, double p, double g_norm) {
  if (!(s > 0.0 && s < 1.0) || !(p > 1.0)) throw DomainError("compute_alpha0: need s in (0,1), p > 1");
  if (!(N > s * p)) throw DomainError("compute_alpha0: need N > sp");
  if (!(S > 0.0) || !(g_norm > 0.0)) throw DomainError("compute_alpha0: need S > 0 and |g| > 0");
  return N / (N - s * p) * std::pow(std::pow(p, p) * S / g_norm, 1.0 / (p - 1.0));
}

}  // namespace fracgelfand
