#include "fracgelfand/scalar_kit.hpp"

#include <cmath>
#include <limits>

#include "fracgelfand/errors.hpp"

namespace fracgelfand {

namespace {

void check_monotone(const std::string& name, const ScalarFn& f, const ScalarFn& fp) {
  if (!(f(0.0) > 0.0)) throw DomainError(name + ": f(0) must be positive");
  double prev = f(0.0);
  for (double t : monotonicity_grid()) {
    const double ft = f(t);
    const double fpt = fp(t);
    if (std::isnan(ft) || std::isnan(fpt)) {
      throw DomainError(name + ": f or f' is NaN at t=" + std::to_string(t));
    }
    if (ft < prev) throw DomainError(name + ": f is decreasing near t=" + std::to_string(t));
    if (fpt < 0.0) throw DomainError(name + ": f' < 0 at t=" + std::to_string(t));
    prev = ft;
  }
}

}  // namespace

const std::vector<double>& monotonicity_grid() {
  static const std::vector<double> grid = [] {
    std::vector<double> g;
    g.reserve(512);
    g.push_back(0.0);
    for (int k = 0; k < 511; ++k) g.push_back(std::pow(10.0, -6.0 + 12.0 * k / 510.0));
    return g;
  }();
  return grid;
}

Nonlinearity Nonlinearity::exponential() {
  Nonlinearity nl;
  nl.kind_ = Kind::exponential;
  nl.m_ = std::numeric_limits<double>::quiet_NaN();
  nl.name_ = "exponential";
  nl.f_ = [](double t) { return std::exp(t); };
  nl.fp_ = nl.f_;
  nl.fpp_ = nl.f_;
  nl.big_f_ = [](double t) { return std::expm1(t); };
  nl.ratio_ = [](double) { return 1.0; };
  return nl;
}

Nonlinearity Nonlinearity::power(double m) {
  if (!(m > 0.0) || !std::isfinite(m)) throw DomainError("power nonlinearity needs m > 0");
  Nonlinearity nl;
  nl.kind_ = Kind::power;
  nl.m_ = m;
  nl.name_ = "power";
  nl.f_ = [m](double t) { return std::pow(1.0 + t, m); };
  nl.fp_ = [m](double t) { return m * std::pow(1.0 + t, m - 1.0); };
  nl.fpp_ = [m](double t) { return m * (m - 1.0) * std::pow(1.0 + t, m - 2.0); };
  nl.big_f_ = [m](double t) { return (std::pow(1.0 + t, m + 1.0) - 1.0) / (m + 1.0); };
  nl.ratio_ = [m](double) { return (m - 1.0) / m; };
  return nl;
}

Nonlinearity Nonlinearity::custom(std::string name, ScalarFn f, ScalarFn fprime, ScalarFn fsecond,
                                  ScalarFn antiderivative) {
  if (!f || !fprime || !fsecond) throw DomainError("custom nonlinearity needs f, f', f''");
  check_monotone(name, f, fprime);
  Nonlinearity nl;
  nl.kind_ = Kind::custom;
  nl.m_ = std::numeric_limits<double>::quiet_NaN();
  nl.name_ = std::move(name);
  nl.f_ = std::move(f);
  nl.fp_ = std::move(fprime);
  nl.fpp_ = std::move(fsecond);
  nl.big_f_ = std::move(antiderivative);
  return nl;
}

double Nonlinearity::antiderivative(double t) const {
  if (big_f_) return big_f_(t);
  return adaptive_simpson(f_, 0.0, t, 1e-12);
}

double Nonlinearity::tau_ratio(double t) const {
  if (ratio_) return ratio_(t);
  const double d = fp_(t);
  return f_(t) * fpp_(t) / (d * d);
}

double eval_derived(const Nonlinearity& nl, double p, double t, Derived which, double gamma) {
  if (!(p > 1.0)) throw DomainError("eval_derived: p must exceed 1");
  if (!(t >= 0.0)) throw DomainError("eval_derived: t must be nonnegative");
  switch (which) {
    case Derived::f:
      return nl.f(t);
    case Derived::fprime:
      return nl.fprime(t);
    case Derived::ftilde:
      return nl.f(t) - nl.f(0.0);
    case Derived::psi:
      return std::pow(nl.f(t) - nl.f(0.0), 1.0 / (p - 1.0));
    case Derived::kappa:
      break;
  }
  if (!(gamma >= 1.0 / (p - 1.0))) throw DomainError("kappa needs gamma >= 1/(p-1)");
  if (t == 0.0) return 0.0;
  const double f0 = nl.f(0.0);
  const double expo = 2.0 * gamma - 2.0;
  if (expo >= 0.0) {
    auto integrand = [&](double s) {
      const double d = nl.fprime(s);
      return std::pow(nl.f(s) - f0, expo) * d * d;
    };
    return adaptive_simpson(integrand, 0.0, t, 1e-10);
  }
  // f~ vanishes linearly at 0, so f~^(2g-2) ~ s^(2g-2): integrable iff gamma > 1/2.
  if (gamma <= 0.5) return std::numeric_limits<double>::infinity();
  // s = t w^r with r (2g-1) = 2 turns the integrand into O(w) near w = 0.
  const double r = 2.0 / (2.0 * gamma - 1.0);
  auto integrand = [&](double w) {
    if (w == 0.0) return 0.0;
    const double s = t * std::pow(w, r);
    const double d = nl.fprime(s);
    const double ft = nl.f(s) - f0;
    if (ft <= 0.0) return 0.0;
    return std::pow(ft, expo) * d * d * t * r * std::pow(w, r - 1.0);
  };
  return adaptive_simpson(integrand, 0.0, 1.0, 1e-10);
}

TauEstimate tau_limit(const Nonlinearity& nl) {
  TauEstimate est;
  for (int k = 2; k <= 6; ++k) {
    const double t = std::pow(10.0, k);
    const double r = nl.tau_ratio(t);
    if (std::isfinite(r)) est.samples.push_back({t, r});
  }
  if (est.samples.size() < 3) throw NoLimit("tau_limit: too few finite samples of f f''/f'^2");
  // Consecutive samples differ by a factor 10 in t; eliminate a c/t correction.
  for (std::size_t k = 0; k + 1 < est.samples.size(); ++k) {
    const auto& lo = est.samples[k];
    const auto& hi = est.samples[k + 1];
    const double ratio = hi.t / lo.t;
    est.extrapolated.push_back((ratio * hi.ratio - lo.ratio) / (ratio - 1.0));
  }
  const std::size_t n = est.extrapolated.size();
  if (std::abs(est.extrapolated[n - 1] - est.extrapolated[n - 2]) > 1e-4) {
    throw NoLimit("tau_limit: extrapolated ratios have not settled");
  }
  est.value = est.extrapolated.back();
  return est;
}

double xi_p_ell(double p, double ell, double t) {
  if (t == 0.0) return 0.0;
  return std::pow(ell + t * t, 0.5 * (p - 2.0)) * t;
}

double min_convexity_margin(const ScalarFn& fn, const std::vector<double>& grid) {
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 2 < grid.size(); ++k) {
    const double t0 = grid[k], t1 = grid[k + 1], t2 = grid[k + 2];
    const double g0 = fn(t0), g1 = fn(t1), g2 = fn(t2);
    if (!std::isfinite(g0) || !std::isfinite(g1) || !std::isfinite(g2)) continue;
    const double left = (g1 - g0) / (t1 - t0);
    const double right = (g2 - g1) / (t2 - t1);
    const double scale = std::abs(left) + std::abs(right) + 1e-300;
    worst = std::min(worst, (right - left) / scale);
  }
  return worst;
}

}  // namespace fracgelfand
