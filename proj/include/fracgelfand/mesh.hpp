#pragma once

#include <Eigen/Core>

namespace fracgelfand {

/// Uniform grid on (a, b) with n interior nodes x_i = a + i h, i = 1..n, h = (b-a)/(n+1).
/// Discrete functions vanish at the endpoints and outside the interval.
struct Mesh {
  double a = 0.0;
  double b = 0.0;
  int n = 0;
  double h = 0.0;

  /// Node coordinate, zero-based: node(0) = a + h.
  double node(int i) const { return a + (i + 1) * h; }
  Eigen::VectorXd nodes() const;
};

Mesh build_mesh(double a, double b, int n);

/// Pair and tail weights of the discrete Gagliardo energy with kernel |x-y|^-(1+sp).
///
///   W(i,j) = h * int_{cell_j} |x_i - y|^-(1+sp) dy   (i != j), W(i,i) = 0
///   T(i)   = h * int_{R \ (a+h/2, b-h/2)} |x_i - y|^-(1+sp) dy
///
/// cell_j = [x_j - h/2, x_j + h/2]. The interior cells tile (a+h/2, b-h/2); the two strips
/// next to the endpoints belong to the zero boundary nodes and count as exterior, so
///   T(i) / h = ((x_i - a - h/2)^-sp + (b - h/2 - x_i)^-sp) / sp.
/// Both integrals are evaluated from the closed-form antiderivative of the power kernel.
struct KernelWeights {
  Mesh mesh;
  double s = 0.0;
  double p = 0.0;
  Eigen::MatrixXd W;
  Eigen::VectorXd T;

  int size() const { return mesh.n; }
  double sp() const { return s * p; }
};

KernelWeights build_kernel_weights(const Mesh& mesh, double s, double p);

}  // namespace fracgelfand
