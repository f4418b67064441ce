#include "fracgelfand/nonlocal_operator.hpp"

#include <cmath>

#include "fracgelfand/errors.hpp"
#include "fracgelfand/parallel.hpp"

namespace fracgelfand {

namespace {

// Neumaier summation; enabled for long rows so single-threaded sums stay reproducible
// and accurate at large n.
class RowSum {
 public:
  explicit RowSum(bool compensated) : compensated_(compensated) {}

  void add(double x) {
    if (!compensated_) {
      sum_ += x;
      return;
    }
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }

  double value() const { return sum_ + comp_; }

 private:
  bool compensated_;
  double sum_ = 0.0;
  double comp_ = 0.0;
};

constexpr int kCompensateAbove = 1024;

void check_shape(const KernelWeights& kw, const Eigen::VectorXd& v, const char* who) {
  if (v.size() != kw.size()) {
    throw ShapeMismatch(std::string(who) + ": vector length does not match the mesh");
  }
}

// (eps^2 + t^2)^((p-2)/2); 0 when the base vanishes and p > 2, 1 for p = 2.
double weight(double eps, double t, double p) {
  if (p == 2.0) return 1.0;
  const double base = eps * eps + t * t;
  if (base == 0.0) return p > 2.0 ? 0.0 : HUGE_VAL;
  return std::pow(base, 0.5 * (p - 2.0));
}

}  // namespace

double odd_power(double t, double p) {
  if (p == 2.0) return t;
  if (t == 0.0) return 0.0;
  return std::copysign(std::pow(std::abs(t), p - 1.0), t);
}

Eigen::VectorXd apply_operator(const KernelWeights& kw, const Eigen::VectorXd& u) {
  check_shape(kw, u, "apply_operator");
  const int n = kw.size();
  const double p = kw.p;
  const bool comp = n > kCompensateAbove;
  Eigen::VectorXd out(n);
  parallel_rows(n, [&](int i) {
    RowSum acc(comp);
    const auto col = kw.W.col(i);
    const double ui = u[i];
    for (int j = 0; j < n; ++j) {
      if (j != i) acc.add(col[j] * odd_power(ui - u[j], p));
    }
    acc.add(kw.T[i] * odd_power(ui, p));
    out[i] = acc.value();
  });
  return out;
}

double discrete_seminorm_p(const KernelWeights& kw, const Eigen::VectorXd& u) {
  check_shape(kw, u, "discrete_seminorm_p");
  const int n = kw.size();
  const double p = kw.p;
  const bool comp = n > kCompensateAbove;
  RowSum total(comp);
  for (int i = 0; i < n; ++i) {
    RowSum row(comp);
    const auto col = kw.W.col(i);
    for (int j = i + 1; j < n; ++j) row.add(col[j] * std::pow(std::abs(u[i] - u[j]), p));
    row.add(kw.T[i] * std::pow(std::abs(u[i]), p));
    total.add(row.value());
  }
  return total.value();
}

double discrete_energy(const KernelWeights& kw, const Eigen::VectorXd& u) {
  return discrete_seminorm_p(kw, u) / kw.p;
}

Eigen::MatrixXd assemble_linearized_form(const KernelWeights& kw, const Eigen::VectorXd& u,
                                         double eps) {
  check_shape(kw, u, "assemble_linearized_form");
  if (!(eps >= 0.0)) throw ParameterOutOfRange("assemble_linearized_form: eps must be >= 0");
  const int n = kw.size();
  const double p = kw.p;
  if (p < 2.0 && eps == 0.0) {
    for (int i = 0; i < n; ++i) {
      if (u[i] == 0.0) throw SingularWeight("linearized form: u_i = 0 with eps = 0 and p < 2");
      for (int j = i + 1; j < n; ++j) {
        if (u[i] == u[j]) {
          throw SingularWeight("linearized form: equal nodal values with eps = 0 and p < 2");
        }
      }
    }
  }
  const bool comp = n > kCompensateAbove;
  Eigen::MatrixXd A(n, n);
  parallel_rows(n, [&](int i) {
    RowSum diag(comp);
    const auto col = kw.W.col(i);
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const double a = (p - 1.0) * col[j] * weight(eps, u[i] - u[j], p);
      A(j, i) = -a;
      diag.add(a);
    }
    diag.add((p - 1.0) * kw.T[i] * weight(eps, u[i], p));
    A(i, i) = diag.value();
  });
  return A;
}

double linearized_quadratic_form(const KernelWeights& kw, const Eigen::VectorXd& u,
                                 const Eigen::VectorXd& phi, double eps) {
  check_shape(kw, u, "linearized_quadratic_form");
  check_shape(kw, phi, "linearized_quadratic_form");
  const int n = kw.size();
  const double p = kw.p;
  auto term = [&](double du, double dphi) {
    if (dphi == 0.0) return 0.0;
    const double w = weight(eps, du, p);
    if (std::isinf(w)) throw SingularWeight("quadratic form: singular weight on a moving pair");
    return w * dphi * dphi;
  };
  double pairs = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) pairs += kw.W(i, j) * term(u[i] - u[j], phi[i] - phi[j]);
  }
  double tails = 0.0;
  for (int i = 0; i < n; ++i) tails += kw.T[i] * term(u[i], phi[i]);
  return (p - 1.0) * (pairs + tails);
}

}  // namespace fracgelfand
