#include "fracgelfand/quadrature.hpp"

#include <cmath>

namespace fracgelfand {

namespace {

struct Panel {
  double lo, mid, hi;
  double f_lo, f_mid, f_hi;
  double whole;
};

double simpson(double lo, double hi, double f_lo, double f_mid, double f_hi) {
  return (hi - lo) / 6.0 * (f_lo + 4.0 * f_mid + f_hi);
}

double refine(const ScalarFn& fn, const Panel& pan, double tol, int depth) {
  const double left_mid = 0.5 * (pan.lo + pan.mid);
  const double right_mid = 0.5 * (pan.mid + pan.hi);
  const double f_lm = fn(left_mid);
  const double f_rm = fn(right_mid);
  const double left = simpson(pan.lo, pan.mid, pan.f_lo, f_lm, pan.f_mid);
  const double right = simpson(pan.mid, pan.hi, pan.f_mid, f_rm, pan.f_hi);
  const double delta = left + right - pan.whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  const Panel lp{pan.lo, left_mid, pan.mid, pan.f_lo, f_lm, pan.f_mid, left};
  const Panel rp{pan.mid, right_mid, pan.hi, pan.f_mid, f_rm, pan.f_hi, right};
  return refine(fn, lp, 0.5 * tol, depth - 1) + refine(fn, rp, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const ScalarFn& fn, double lo, double hi, double abs_tol, int max_depth) {
  if (lo == hi) return 0.0;
  if (hi < lo) return -adaptive_simpson(fn, hi, lo, abs_tol, max_depth);
  // Seed with four panels so that integrands vanishing at the midpoint are not missed.
  constexpr int kSeed = 4;
  const double width = (hi - lo) / kSeed;
  double total = 0.0;
  for (int k = 0; k < kSeed; ++k) {
    const double a = lo + k * width;
    const double b = (k + 1 == kSeed) ? hi : a + width;
    const double m = 0.5 * (a + b);
    const double fa = fn(a), fm = fn(m), fb = fn(b);
    const Panel pan{a, m, b, fa, fm, fb, simpson(a, b, fa, fm, fb)};
    total += refine(fn, pan, abs_tol / kSeed, max_depth);
  }
  return total;
}

}  // namespace fracgelfand
