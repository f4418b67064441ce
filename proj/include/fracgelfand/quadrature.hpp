#pragma once

#include <functional>

namespace fracgelfand {

using ScalarFn = std::function<double(double)>;

/// Adaptive Simpson quadrature of `fn` over [lo, hi] to absolute tolerance `abs_tol`.
/// Recursion is capped at `max_depth` levels; panels that hit the cap are accepted as-is.
double adaptive_simpson(const ScalarFn& fn, double lo, double hi, double abs_tol = 1e-10,
                        int max_depth = 48);

}  // namespace fracgelfand
