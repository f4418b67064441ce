#include <cmath>
#include <random>

#include <doctest.h>

#include "fracgelfand/errors.hpp"
#include "fracgelfand/mesh.hpp"
#include "fracgelfand/nonlocal_operator.hpp"
#include "fracgelfand/parallel.hpp"
#include "support.hpp"

using namespace fracgelfand;
using testing_support::rel_diff;
using testing_support::uniform_vector;

namespace {

// Composite midpoint rule, independent of the closed-form cell integrals.
double midpoint(double lo, double hi, int panels, double sp) {
  const double w = (hi - lo) / panels;
  double sum = 0.0;
  for (int k = 0; k < panels; ++k) sum += std::pow(std::abs(lo + (k + 0.5) * w), -1.0 - sp);
  return sum * w;
}

}  // namespace

TEST_CASE("mesh geometry") {
  const Mesh m = build_mesh(-1.0, 1.0, 7);
  CHECK(m.h == doctest::Approx(0.25));
  CHECK(m.node(0) == doctest::Approx(-0.75));
  CHECK(m.node(3) == doctest::Approx(0.0));
  CHECK(m.nodes().size() == 7);
  CHECK(build_mesh(0.0, 1.0, 9).h == doctest::Approx(0.1));

  CHECK_THROWS_AS(build_mesh(1.0, 0.0, 8), BadGeometry);
  CHECK_THROWS_AS(build_mesh(-1.0, 1.0, 3), BadGeometry);
  CHECK_THROWS_AS(build_kernel_weights(m, 1.5, 2.0), ParameterOutOfRange);
  CHECK_THROWS_AS(build_kernel_weights(m, 0.5, 1.0), ParameterOutOfRange);
}

TEST_CASE("kernel weights: symmetry, positivity, tails") {
  const Mesh m = build_mesh(-1.0, 1.0, 31);
  const auto kw = build_kernel_weights(m, 0.5, 2.0);
  CHECK((kw.W - kw.W.transpose()).cwiseAbs().maxCoeff() == 0.0);
  for (int i = 0; i < m.n; ++i) {
    CHECK(kw.W(i, i) == 0.0);
    CHECK(kw.T(i) > 0.0);
    for (int j = 0; j < m.n; ++j)
      if (j != i) CHECK(kw.W(i, j) > 0.0);
  }
  // tail at the centre node with sp = 1: int_{|y| > 1 - h/2} y^-2 = 2 / (1 - h/2)
  CHECK(kw.T(15) / m.h == doctest::Approx(2.0 / (1.0 - 0.5 * m.h)).epsilon(1e-14));
  for (int i = 0; i < 15; ++i) CHECK(kw.T(i) > kw.T(i + 1));

  const auto kw2 = build_kernel_weights(m, 0.3, 2.5);
  const double sp = 0.75;
  const double edge = 1.0 - 0.5 * m.h;
  for (int i = 0; i < m.n; ++i) {
    const double x = m.node(i);
    const double closed = (std::pow(x + edge, -sp) + std::pow(edge - x, -sp)) / sp;
    CHECK(kw2.T(i) / m.h == doctest::Approx(closed).epsilon(1e-13));
  }
  // the exterior part alone is the tail outside (a, b) plus the two boundary strips
  const int c = 10;
  const double x = m.node(c);
  const double outside = m.h * (std::pow(x + 1.0, -sp) + std::pow(1.0 - x, -sp)) / sp;
  const double strips = m.h * (midpoint(-1.0 - x, -edge - x, 200000, sp) +
                               midpoint(edge - x, 1.0 - x, 200000, sp));
  CHECK(rel_diff(kw2.T(c), outside + strips) < 1e-9);
}

TEST_CASE("pair weights match quadrature over the cells") {
  const Mesh m = build_mesh(0.0, 2.0, 15);
  const auto kw = build_kernel_weights(m, 0.4, 1.8);
  const double sp = 0.4 * 1.8;
  for (int i : {0, 7, 14}) {
    for (int j : {0, 3, 8, 14}) {
      if (i == j) continue;
      const double d = m.node(j) - m.node(i);
      const double ref = m.h * midpoint(d - 0.5 * m.h, d + 0.5 * m.h, 20000, sp);
      CHECK(rel_diff(kw.W(i, j), ref) < 1e-8);
    }
  }
}

TEST_CASE("centre row sums converge at first order") {
  // s = 0.5, p = 2: the centre row sum is h int_{h/2 < |y| < 1 - h/2} |y|^-2 dy
  double prev_err = 0.0;
  int n = 15;
  for (int level = 0; level < 4; ++level, n = 2 * n + 1) {
    const auto kw = build_kernel_weights(build_mesh(-1.0, 1.0, n), 0.5, 2.0);
    const double h = kw.mesh.h;
    const double row = kw.W.row(n / 2).sum();
    const double quad = 2.0 * h * midpoint(0.5 * h, 1.0 - 0.5 * h, 1000000, 1.0);
    CHECK(rel_diff(row, quad) < 1e-6);
    const double err = std::abs(row - 4.0);
    if (level > 0) CHECK(std::log2(prev_err / err) >= 0.9);
    prev_err = err;
  }
}

TEST_CASE("translation and dilation of the interval") {
  const auto base = build_kernel_weights(build_mesh(-1.0, 1.0, 20), 0.35, 2.2);
  const auto moved = build_kernel_weights(build_mesh(4.0, 6.0, 20), 0.35, 2.2);
  CHECK((base.W - moved.W).cwiseAbs().maxCoeff() <= 1e-12 * base.W.cwiseAbs().maxCoeff());
  CHECK((base.T - moved.T).cwiseAbs().maxCoeff() <= 1e-12 * base.T.maxCoeff());

  const double rho = 3.0;
  const auto wide = build_kernel_weights(build_mesh(-rho, rho, 20), 0.35, 2.2);
  const double factor = std::pow(rho, 1.0 - 0.35 * 2.2);
  for (int i = 0; i < 20; ++i) {
    CHECK(rel_diff(wide.T(i), factor * base.T(i)) < 1e-12);
    for (int j = 0; j < 20; ++j)
      if (i != j) CHECK(rel_diff(wide.W(i, j), factor * base.W(i, j)) < 1e-12);
  }
}

TEST_CASE("operator: zero, homogeneity, oddness, Euler identity") {
  std::mt19937_64 rng(3);
  const auto kw = build_kernel_weights(build_mesh(-1.0, 1.0, 32), 0.6, 3.0);
  CHECK(apply_operator(kw, Eigen::VectorXd::Zero(32)).cwiseAbs().maxCoeff() == 0.0);
  CHECK(discrete_seminorm_p(kw, Eigen::VectorXd::Zero(32)) == 0.0);

  const Eigen::VectorXd u = uniform_vector(rng, 32, -1.0, 1.0);
  const Eigen::VectorXd Lu = apply_operator(kw, u);
  const Eigen::VectorXd L2u = apply_operator(kw, 2.0 * u);
  CHECK((L2u - 4.0 * Lu).cwiseAbs().maxCoeff() <= 1e-13 * Lu.cwiseAbs().maxCoeff());
  CHECK((apply_operator(kw, -u) + Lu).cwiseAbs().maxCoeff() == 0.0);
  const double semi = discrete_seminorm_p(kw, u);
  CHECK(rel_diff(Lu.dot(u), semi) < 1e-12);
  CHECK(discrete_energy(kw, u) == doctest::Approx(semi / 3.0));

  const auto kw2 = build_kernel_weights(build_mesh(-1.0, 1.0, 32), 0.5, 2.0);
  CHECK(rel_diff(discrete_seminorm_p(kw2, 3.0 * u), 9.0 * discrete_seminorm_p(kw2, u)) < 1e-14);

  // seminorm against a direct double sum
  double direct = 0.0;
  for (int i = 0; i < 32; ++i) {
    direct += kw.T(i) * std::pow(std::abs(u(i)), 3.0);
    for (int j = 0; j < 32; ++j)
      if (i != j) direct += 0.5 * kw.W(i, j) * std::pow(std::abs(u(i) - u(j)), 3.0);
  }
  CHECK(rel_diff(semi, direct) < 1e-13);

  CHECK(odd_power(0.0, 1.5) == 0.0);
  CHECK(odd_power(-2.0, 3.0) == -4.0);
}

TEST_CASE("operator of a hat function is resolved at n = 63") {
  // L u / h approximates the nonlocal operator at a node. The hat has kinks at 0 and +-0.5,
  // where the sp = 1 value diverges logarithmically, so compare at x = 0.25: first-order
  // Richardson values from n = 63/127 and n = 1023/2047 agree to 3 significant digits.
  auto value_at_quarter = [](int n) {
    const auto kw = build_kernel_weights(build_mesh(-1.0, 1.0, n), 0.5, 2.0);
    Eigen::VectorXd u(n);
    for (int i = 0; i < n; ++i) u(i) = std::max(0.0, 1.0 - std::abs(kw.mesh.node(i)) / 0.5);
    const int k = static_cast<int>(std::lround(1.25 / kw.mesh.h)) - 1;
    REQUIRE(kw.mesh.node(k) == doctest::Approx(0.25));
    return apply_operator(kw, u)(k) / kw.mesh.h;
  };
  const double coarse = 2.0 * value_at_quarter(127) - value_at_quarter(63);
  const double fine = 2.0 * value_at_quarter(2047) - value_at_quarter(1023);
  CHECK(std::abs(coarse - fine) <= 5e-4 * std::abs(fine));
  CHECK(std::abs(value_at_quarter(63) - fine) <= 2e-2 * std::abs(fine));
}

TEST_CASE("linearized form") {
  std::mt19937_64 rng(5);
  const Mesh m = build_mesh(-1.0, 1.0, 24);
  const Eigen::VectorXd u = uniform_vector(rng, 24, 0.0, 2.0);
  const Eigen::VectorXd phi = uniform_vector(rng, 24, -1.0, 1.0);

  SUBCASE("p = 2 does not depend on u or eps") {
    const auto kw = build_kernel_weights(m, 0.5, 2.0);
    const Eigen::MatrixXd A0 = assemble_linearized_form(kw, Eigen::VectorXd::Zero(24), 0.0);
    const Eigen::MatrixXd A1 = assemble_linearized_form(kw, u, 0.3);
    CHECK((A0 - A1).cwiseAbs().maxCoeff() == 0.0);
    // and is the Hessian of the energy: A u = L u
    CHECK((A1 * u - apply_operator(kw, u)).cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("constant phi only sees the tails") {
    const auto kw = build_kernel_weights(m, 0.4, 2.6);
    const double eps = 0.2;
    const Eigen::MatrixXd A = assemble_linearized_form(kw, u, eps);
    double tails = 0.0;
    for (int i = 0; i < 24; ++i) tails += kw.T(i) * std::pow(eps * eps + u(i) * u(i), 0.3);
    const Eigen::VectorXd one = Eigen::VectorXd::Ones(24);
    CHECK(rel_diff(one.dot(A * one), 1.6 * tails) < 1e-12);
  }
  SUBCASE("u = 0, p = 3, eps = 0 gives the zero form") {
    const auto kw = build_kernel_weights(m, 0.5, 3.0);
    CHECK(assemble_linearized_form(kw, Eigen::VectorXd::Zero(24), 0.0).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("quadratic form equals the direct double sum for p >= 2") {
    for (double p : {2.0, 2.5, 3.0}) {
      const auto kw = build_kernel_weights(m, 0.5, p);
      const Eigen::MatrixXd A = assemble_linearized_form(kw, u, 0.0);
      double direct = 0.0;
      for (int i = 0; i < 24; ++i) {
        direct += kw.T(i) * std::pow(std::abs(u(i)), p - 2.0) * phi(i) * phi(i);
        for (int j = 0; j < 24; ++j) {
          if (i == j) continue;
          const double d = phi(i) - phi(j);
          direct += 0.5 * kw.W(i, j) * std::pow(std::abs(u(i) - u(j)), p - 2.0) * d * d;
        }
      }
      direct *= p - 1.0;
      CHECK(rel_diff(phi.dot(A * phi), direct) < 1e-12);
      CHECK(rel_diff(linearized_quadratic_form(kw, u, phi, 0.0), direct) < 1e-12);
    }
  }
  SUBCASE("M-matrix structure") {
    for (double p : {1.5, 2.0, 3.0}) {
      const auto kw = build_kernel_weights(m, 0.3, p);
      const Eigen::MatrixXd A = assemble_linearized_form(kw, u, 1e-3);
      CHECK((A - A.transpose()).cwiseAbs().maxCoeff() == 0.0);
      for (int i = 0; i < 24; ++i) {
        CHECK(A.row(i).sum() >= -1e-12 * A(i, i));
        for (int j = 0; j < 24; ++j)
          if (i != j) CHECK(A(i, j) <= 0.0);
      }
    }
  }
  SUBCASE("p < 2 with eps = 0 and a vanishing difference") {
    const auto kw = build_kernel_weights(m, 0.5, 1.5);
    Eigen::VectorXd v = u;
    v(3) = v(4);
    CHECK_THROWS_AS(assemble_linearized_form(kw, v, 0.0), SingularWeight);
    CHECK_NOTHROW(assemble_linearized_form(kw, v, 1e-6));
  }
}

TEST_CASE("row-parallel kernels do not depend on the thread count") {
  std::mt19937_64 rng(9);
  const auto kw = build_kernel_weights(build_mesh(-1.0, 1.0, 300), 0.45, 1.7);
  const Eigen::VectorXd u = uniform_vector(rng, 300, -1.0, 1.0);
  set_thread_count(1);
  const Eigen::VectorXd L1 = apply_operator(kw, u);
  const Eigen::MatrixXd A1 = assemble_linearized_form(kw, u, 1e-4);
  set_thread_count(4);
  CHECK(thread_count() == 4);
  const Eigen::VectorXd L4 = apply_operator(kw, u);
  const Eigen::MatrixXd A4 = assemble_linearized_form(kw, u, 1e-4);
  set_thread_count(1);
  CHECK((L1 - L4).cwiseAbs().maxCoeff() <= 1e-13 * L1.cwiseAbs().maxCoeff());
  CHECK((A1 - A4).cwiseAbs().maxCoeff() <= 1e-13 * A1.cwiseAbs().maxCoeff());
}
