#include "fracgelfand/mesh.hpp"

#include <cmath>
#include <vector>

#include "fracgelfand/errors.hpp"

namespace fracgelfand {

Eigen::VectorXd Mesh::nodes() const {
  Eigen::VectorXd x(n);
  for (int i = 0; i < n; ++i) x[i] = node(i);
  return x;
}

Mesh build_mesh(double a, double b, int n) {
  if (!std::isfinite(a) || !std::isfinite(b) || !(a < b)) {
    throw BadGeometry("build_mesh: need finite a < b");
  }
  if (n < 4) throw BadGeometry("build_mesh: need at least 4 interior nodes");
  Mesh mesh;
  mesh.a = a;
  mesh.b = b;
  mesh.n = n;
  mesh.h = (b - a) / (n + 1);
  return mesh;
}

KernelWeights build_kernel_weights(const Mesh& mesh, double s, double p) {
  if (!(s > 0.0 && s < 1.0)) throw ParameterOutOfRange("build_kernel_weights: s must lie in (0,1)");
  if (!(p > 1.0) || !std::isfinite(p)) {
    throw ParameterOutOfRange("build_kernel_weights: p must exceed 1");
  }
  const int n = mesh.n;
  const double h = mesh.h;
  const double sp = s * p;

  // W depends on |i-j| = k only: h * int_{(k-1/2)h}^{(k+1/2)h} r^-(1+sp) dr.
  std::vector<double> by_offset(n, 0.0);
  const double pref = h * std::pow(h, -sp) / sp;
  for (int k = 1; k < n; ++k) {
    by_offset[k] = pref * (std::pow(k - 0.5, -sp) - std::pow(k + 0.5, -sp));
  }

  KernelWeights kw;
  kw.mesh = mesh;
  kw.s = s;
  kw.p = p;
  kw.W.resize(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) kw.W(i, j) = by_offset[std::abs(i - j)];
  }
  kw.T.resize(n);
  for (int i = 0; i < n; ++i) {
    // The endpoint nodes carry the value 0 on their half cells inside (a, b), so the tail
    // starts at the outer edge of the first and last interior cells.
    const double left = (i + 0.5) * h;
    const double right = (n - i - 0.5) * h;
    kw.T[i] = h * (std::pow(left, -sp) + std::pow(right, -sp)) / sp;
  }
  return kw;
}

}  // namespace fracgelfand
