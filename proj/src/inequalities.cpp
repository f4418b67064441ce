#include <algorithm>
#include <cmath>
#include <limits>

#include "fracgelfand/errors.hpp"
#include "fracgelfand/scalar_kit.hpp"

namespace fracgelfand {

namespace {

double signed_pow(double t, double e) { return std::copysign(std::pow(std::abs(t), e), t); }

// |t|^(p-2) t with the convention 0 -> 0.
double jpow(double t, double p) { return t == 0.0 ? 0.0 : signed_pow(t, p - 1.0); }

void record(InequalityMargin& slot, double lhs_side, double rhs_side, const InequalitySample& s) {
  // Convention: the inequality reads lhs_side <= rhs_side.
  const double scale = std::abs(lhs_side) + std::abs(rhs_side);
  const double margin = scale > 0.0 ? (rhs_side - lhs_side) / scale : 0.0;
  if (margin < slot.min_margin) {
    slot.min_margin = margin;
    slot.worst = s;
  }
  ++slot.evaluated;
}

InequalityMargin fresh(std::string ineq, std::string family) {
  return {std::move(ineq), std::move(family), std::numeric_limits<double>::infinity(),
          InequalitySample{0, 0, 0, 0}, 0};
}

}  // namespace

std::vector<ConvexFamilyMember> convex_family() {
  std::vector<ConvexFamilyMember> fam;
  fam.push_back({"square", [](double t) { return t * t; }, [](double t) { return 2.0 * t; }});
  for (double q : {1.0, 1.5, 3.0}) {
    // Smoothed |t|^q: (1 + t^2)^(q/2) - 1 is convex for q >= 1.
    fam.push_back({"smooth_abs_" + std::to_string(q).substr(0, 3),
                   [q](double t) { return std::pow(1.0 + t * t, 0.5 * q) - 1.0; },
                   [q](double t) { return q * t * std::pow(1.0 + t * t, 0.5 * q - 1.0); }});
  }
  fam.push_back({"exp", [](double t) { return std::exp(t); }, [](double t) { return std::exp(t); }});
  return fam;
}

std::vector<IncreasingFamilyMember> increasing_family(double p, double gamma) {
  std::vector<IncreasingFamilyMember> fam;
  fam.push_back({"linear", [](double t) { return t; }, [](double t) { return t; }});
  {
    // h = t^3, h' = 3 t^2, H = 3^(1/p) sign(t) |t|^(2/p+1) / (2/p+1)
    const double e = 2.0 / p + 1.0;
    const double c = std::pow(3.0, 1.0 / p) / e;
    fam.push_back({"cubic", [](double t) { return t * t * t; },
                   [c, e](double t) { return c * signed_pow(t, e); }});
  }
  fam.push_back({"exp", [](double t) { return std::exp(t); },
                 [p](double t) { return p * std::expm1(t / p); }});
  if (gamma >= 1.0) {
    // h = |t|^(2g-2) t, h' = (2g-1) |t|^(2g-2)
    const double e = (2.0 * gamma - 2.0) / p + 1.0;
    const double c = std::pow(2.0 * gamma - 1.0, 1.0 / p) / e;
    fam.push_back({"odd_power",
                   [gamma](double t) { return signed_pow(t, 2.0 * gamma - 1.0); },
                   [c, e](double t) { return c * signed_pow(t, e); }});
  }
  return fam;
}

double InequalityReport::min_margin() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& entry : margins) m = std::min(m, entry.min_margin);
  return m;
}

InequalityReport check_scalar_inequalities(double p, double ell, double gamma,
                                           const std::vector<InequalitySample>& samples) {
  if (!(p > 1.0)) throw DomainError("check_scalar_inequalities: p must exceed 1");
  if (!(ell >= 0.0)) throw DomainError("check_scalar_inequalities: ell must be nonnegative");
  InequalityReport report;

  for (const auto& member : convex_family()) {
    auto slot = fresh("kato_pair", member.id);
    for (const auto& s : samples) {
      if (s.alpha < 0.0 || s.beta < 0.0) throw DomainError("alpha, beta must be nonnegative");
      if (s.a == s.b) {
        record(slot, 0.0, 0.0, s);
        continue;
      }
      const double d = s.a - s.b;
      const double dh = member.h(s.a) - member.h(s.b);
      const double big = jpow(d, p) * (s.alpha * xi_p_ell(p, ell, member.hprime(s.a)) -
                                       s.beta * xi_p_ell(p, ell, member.hprime(s.b)));
      const double base = ell * d * d + dh * dh;
      const double small = base == 0.0 ? 0.0
                                        : std::pow(base, 0.5 * (p - 2.0)) * dh * (s.alpha - s.beta);
      record(slot, small, big, s);
    }
    report.margins.push_back(slot);
  }

  for (const auto& member : increasing_family(p, gamma)) {
    auto slot = fresh("h_transform", member.id);
    for (const auto& s : samples) {
      const double big = jpow(s.a - s.b, p) * (member.h(s.a) - member.h(s.b));
      const double small = std::pow(std::abs(member.big_h(s.a) - member.big_h(s.b)), p);
      record(slot, small, big, s);
    }
    report.margins.push_back(slot);
  }

  if (gamma > 1.0) {
    auto slot = fresh("power_gamma", "nonnegative_pair");
    const double coeff = gamma * gamma / (2.0 * gamma - 1.0);
    for (const auto& s : samples) {
      const double a = std::abs(s.a), b = std::abs(s.b);
      const double diff = std::pow(a, gamma) - std::pow(b, gamma);
      const double small = diff * diff;
      const double big =
          coeff * (a - b) * (std::pow(a, 2.0 * gamma - 1.0) - std::pow(b, 2.0 * gamma - 1.0));
      record(slot, small, big, s);
    }
    report.margins.push_back(slot);
  }
  return report;
}

}  // namespace fracgelfand
