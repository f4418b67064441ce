#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "fracgelfand/dirichlet_solver.hpp"
#include "fracgelfand/errors.hpp"
#include "fracgelfand/nonlocal_operator.hpp"

namespace fracgelfand {

namespace {

constexpr int kSampleCount = 257;

PsiMember f_eps_member(double eps) {
  char id[32];
  std::snprintf(id, sizeof id, "f_eps_%g", eps);
  return {id, [eps](double t) { return std::hypot(eps, t) - eps; },
          [eps](double t) { return t / std::hypot(eps, t); }, true, false};
}

void check_member(const PsiMember& m, double lo, double hi) {
  if (std::abs(m.psi(0.0)) > 1e-12) {
    throw PreconditionFailed("verify_kato: " + m.id + " does not vanish at 0");
  }
  std::vector<double> grid(kSampleCount);
  for (int k = 0; k < kSampleCount; ++k) grid[k] = lo + (hi - lo) * k / (kSampleCount - 1);
  if (min_convexity_margin(m.psi, grid) < -1e-8) {
    throw PreconditionFailed("verify_kato: " + m.id + " is not convex on the solution range");
  }
  double lip = 0.0;
  for (double t : grid) {
    const double d = m.dpsi(t);
    if (!std::isfinite(d)) throw PreconditionFailed("verify_kato: " + m.id + " has infinite slope");
    lip = std::max(lip, std::abs(d));
  }
  for (int k = 1; k < kSampleCount; ++k) {
    const double q = (m.psi(grid[k]) - m.psi(grid[k - 1])) / (grid[k] - grid[k - 1]);
    if (!(std::abs(q) <= lip * (1.0 + 1e-6) + 1e-12)) {
      throw PreconditionFailed("verify_kato: " + m.id + " fails the Lipschitz sampling");
    }
  }
}

}  // namespace

std::vector<PsiMember> builtin_psi_family(double range, bool signed_rhs, const PhiTransform* phi01,
                                          const PhiTransform* phi03) {
  if (!(range > 0.0)) throw ParameterOutOfRange("builtin_psi_family: range must be positive");
  std::vector<PsiMember> family;
  for (double eps : {1.0, 0.1, 0.01}) family.push_back(f_eps_member(eps));
  family.push_back({"identity", [](double t) { return t; }, [](double) { return 1.0; }, true, false});
  family.push_back({"clipped_square",
                    [range](double t) {
                      if (t <= 0.0) return 0.0;
                      return t <= range ? t * t : range * range + 2.0 * range * (t - range);
                    },
                    [range](double t) { return t <= 0.0 ? 0.0 : 2.0 * std::min(t, range); }, true,
                    false});
  if (!signed_rhs) {
    for (const PhiTransform* phi : {phi01, phi03}) {
      if (phi == nullptr) continue;
      char id[32];
      std::snprintf(id, sizeof id, "neg_phi_%g", phi->eps());
      family.push_back({id, [phi](double t) { return -(*phi)(t); },
                        [phi](double t) { return -phi->derivative(t); }, false, true});
    }
  }
  return family;
}

std::vector<Eigen::VectorXd> hat_test_functions(const Mesh& mesh, int count, int radius) {
  if (count < 1 || radius < 0) throw ParameterOutOfRange("hat_test_functions: bad count/radius");
  const int n = mesh.n;
  std::vector<Eigen::VectorXd> out;
  for (int k = 0; k < count; ++k) {
    const int c = static_cast<int>(std::lround(double(k + 1) * (n - 1) / (count + 1)));
    Eigen::VectorXd psi = Eigen::VectorXd::Zero(n);
    for (int i = std::max(0, c - radius); i <= std::min(n - 1, c + radius); ++i) {
      psi[i] = 1.0 - double(std::abs(i - c)) / (radius + 1);
    }
    out.push_back(std::move(psi));
  }
  return out;
}

double KatoReport::min_normalized() const {
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& m : margins) worst = std::min(worst, m.scale > 0.0 ? m.margin / m.scale : 0.0);
  return worst;
}

KatoReport verify_kato(const KernelWeights& kw, const Eigen::VectorXd& u, const Eigen::VectorXd& g,
                       const std::vector<PsiMember>& family,
                       const std::vector<Eigen::VectorXd>& tests) {
  const int n = kw.size();
  if (u.size() != n || g.size() != n) throw ShapeMismatch("verify_kato: vector length mismatch");
  for (const auto& psi : tests) {
    if (psi.size() != n) throw ShapeMismatch("verify_kato: test function length mismatch");
    if ((psi.array() < 0.0).any()) throw PreconditionFailed("verify_kato: negative test function");
  }
  const bool signed_rhs = (g.array() > 0.0).any() && (g.array() < 0.0).any();
  double lo = std::min(0.0, u.minCoeff());
  double hi = std::max(0.0, u.maxCoeff());
  if (hi - lo <= 0.0) {
    lo = -1.0;
    hi = 1.0;
  }
  const double h = kw.mesh.h;

  KatoReport report;
  for (const auto& member : family) {
    if (member.nonnegative_only && u.minCoeff() < 0.0) {
      throw PreconditionFailed("verify_kato: " + member.id + " needs a nonnegative solution");
    }
    if (signed_rhs && !member.bounded_second) {
      throw PreconditionFailed("verify_kato: " + member.id + " needs g of constant sign");
    }
    check_member(member, member.nonnegative_only ? 0.0 : lo, hi);

    Eigen::VectorXd psi_u(n), source(n);
    for (int i = 0; i < n; ++i) {
      psi_u[i] = member.psi(u[i]);
      source[i] = odd_power(member.dpsi(u[i]), kw.p) * h * g[i];
    }
    const Eigen::VectorXd lpsi = apply_operator(kw, psi_u);
    for (std::size_t k = 0; k < tests.size(); ++k) {
      const Eigen::VectorXd& psi = tests[k];
      KatoMargin m;
      m.psi_id = member.id;
      m.test_id = static_cast<int>(k);
      m.margin = source.dot(psi) - lpsi.dot(psi);
      m.scale = source.cwiseProduct(psi).cwiseAbs().sum() + lpsi.cwiseProduct(psi).cwiseAbs().sum();
      report.margins.push_back(std::move(m));
    }
  }
  return report;
}

}  // namespace fracgelfand
