#include <cmath>

#include "fracgelfand/errors.hpp"
#include "fracgelfand/scalar_kit.hpp"

namespace fracgelfand {

PhiTransform::PhiTransform(const Nonlinearity& nl, double p, double eps)
    : nl_(&nl), p_(p), eps_(eps), shrink_(std::pow(1.0 - eps, 1.0 / (p - 1.0))) {
  if (!(p > 1.0)) throw DomainError("PhiTransform: p must exceed 1");
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("PhiTransform: eps must lie in (0,1)");
  const double margin = min_convexity_margin([this](double t) { return g(t); },
                                             monotonicity_grid());
  if (margin < -1e-10) throw NotConvex("PhiTransform: f^(1/(p-1)) fails the convexity check");
}

double PhiTransform::g(double t) const { return std::pow(nl_->f(t), 1.0 / (p_ - 1.0)); }

double PhiTransform::h(double t) const {
  return adaptive_simpson([this](double s) { return 1.0 / g(s); }, 0.0, t, 1e-10);
}

double PhiTransform::operator()(double t) const {
  if (!(t >= 0.0)) throw DomainError("PhiTransform: t must be nonnegative");
  if (t == 0.0) return 0.0;
  // h is increasing and the target shrink * h(t) < h(t), so [0, t] brackets the root.
  const double target = shrink_ * h(t);
  double lo = 0.0, hi = t;
  double h_lo = 0.0;
  while (hi - lo > 1e-12 * std::max(1.0, t)) {
    const double mid = 0.5 * (lo + hi);
    // h(mid) = h(lo) + int_lo^mid, which keeps each quadrature on a shrinking panel.
    const double h_mid = h_lo + adaptive_simpson([this](double s) { return 1.0 / g(s); }, lo, mid,
                                                 1e-12);
    if (h_mid < target) {
      lo = mid;
      h_lo = h_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double PhiTransform::derivative(double t) const {
  const double v = (*this)(t);
  return shrink_ * g(v) / g(t);
}

double phi_eps(const Nonlinearity& nl, double p, double eps, double t) {
  return PhiTransform(nl, p, eps)(t);
}

}  // namespace fracgelfand
