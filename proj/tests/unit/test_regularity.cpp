#include <cmath>
#include <random>

#include <doctest.h>

#include "fracgelfand/dirichlet_solver.hpp"
#include "fracgelfand/errors.hpp"
#include "fracgelfand/regularity.hpp"
#include "support.hpp"

using namespace fracgelfand;
using testing_support::rel_diff;

namespace {

const TheoremEntry& entry(const DimensionReport& rep, const std::string& key) {
  for (const auto& e : rep.entries) {
    if (e.key == key) return e;
  }
  FAIL("missing entry " << key);
  throw;
}

double value(const TheoremEntry& e, const std::string& name) {
  for (const auto& [k, v] : e.values) {
    if (k == name) return v;
  }
  FAIL("missing value " << name);
  return NAN;
}

}  // namespace

TEST_CASE("threshold G in both printed forms") {
  CHECK(threshold_G(1.0, 2.0, 2.0) == doctest::Approx(10.0 + 4.0 * std::sqrt(2.0)).epsilon(1e-14));
  CHECK(threshold_G(1.0, 2.0, 2.0) == doctest::Approx(15.65685).epsilon(1e-6));
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const double m = 1.0 + std::pow(10.0, -3.0 + 9.0 * k / 999.0);
    worst = std::max(worst, rel_diff(threshold_G(1.0, 2.0, m), threshold_G1_p2(m)));
  }
  CHECK(worst <= 1e-12);
  // decreasing toward 10 as m grows
  CHECK(threshold_G1_p2(1e6) > 10.0);
  CHECK(threshold_G1_p2(1e12) - 10.0 < 1e-5);
  CHECK(threshold_G1_p2(10.0) > threshold_G1_p2(100.0));

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> us(0.05, 1.0), up(1.05, 6.0), uw(0.01, 50.0);
  for (int k = 0; k < 1000; ++k) {
    const double s = us(rng), p = up(rng);
    const double m = std::max(1.0, p - 1.0) + uw(rng);
    CHECK(threshold_G(s, p, m) > linf_threshold(s, p));
  }
  CHECK_THROWS_AS(threshold_G(0.5, 2.0, 1.0), DomainError);
  CHECK_THROWS_AS(threshold_G(1.5, 2.0, 3.0), DomainError);
  CHECK_THROWS_AS(threshold_G1_p2(1.0), DomainError);
}

TEST_CASE("beta and its midpoint inequality") {
  for (double p : {1.3, 2.0, 4.5}) CHECK(threshold_beta(p - 1.0, p) == doctest::Approx(1.0));
  CHECK(threshold_beta(2.0, 2.0) == doctest::Approx(2.0 + std::sqrt(2.0)).epsilon(1e-14));
  CHECK_THROWS_AS(threshold_beta(0.5, 2.0), DomainError);

  const auto empty = beta_midpoint_check(1.0, 2.0);
  CHECK_FALSE(empty.holds);
  CHECK(empty.gamma == doctest::Approx(1.0));

  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> up(1.05, 5.0), ux(1e-3, 20.0);
  for (int k = 0; k < 1000; ++k) {
    const double p = up(rng);
    const double sigma = (p - 1.0) * (1.0 + ux(rng));
    const auto chk = beta_midpoint_check(sigma, p);
    // independent recomputation of gamma and the bound
    const double gamma = 0.5 * (sigma / (p - 1.0) + threshold_beta(sigma, p));
    CHECK(chk.gamma == doctest::Approx(gamma).epsilon(1e-13));
    CHECK(chk.bound == doctest::Approx((p - 1.0) * gamma * gamma / (2.0 * gamma - 1.0)).epsilon(1e-13));
    CHECK(chk.holds);
  }
}

TEST_CASE("power barrier recurrence") {
  BootstrapParams bp;
  bp.kind = BootstrapKind::power_barrier;
  bp.N = 3.0;
  bp.s = 0.5;
  bp.p = 2.0;
  bp.m = 3.0;
  CHECK(power_barrier_fixed_point(3.0, 0.5, 2.0, 3.0) == doctest::Approx(2.0).epsilon(1e-15));

  bp.q0 = 2.5;
  const auto up = bootstrap_sequence(bp);
  CHECK(up.verdict == BootstrapVerdict::escaped);
  CHECK(up.escape_step >= 1);
  // r_{n+1} = N (p-1) q / (m (N - spq)), written out
  double q = 2.5;
  for (std::size_t k = 1; k < up.q.size(); ++k) {
    q = 3.0 * q / (3.0 * (3.0 - q));
    CHECK(up.q[k] == doctest::Approx(q).epsilon(1e-14));
    CHECK(up.q[k] > up.q[k - 1]);
  }
  CHECK(3.0 - up.q.back() <= 0.0);

  bp.q0 = 1.5;
  const auto down = bootstrap_sequence(bp);
  CHECK(down.verdict == BootstrapVerdict::converged_to_fixed_point);
  CHECK(std::abs(down.fixed_point - 2.0) <= 1e-9);

  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> un(1.0, 12.0), us(0.05, 0.95), upp(1.1, 4.0), ux(0.05, 6.0);
  int mismatches = 0;
  for (int k = 0; k < 1000; ++k) {
    BootstrapParams r;
    r.N = std::floor(un(rng));
    r.s = us(rng);
    r.p = upp(rng);
    r.m = (r.p - 1.0) * (1.0 + ux(rng));
    const double ell = power_barrier_fixed_point(r.N, r.s, r.p, r.m);
    r.q0 = std::max(1.0, ell * (0.2 + 1.6 * us(rng)));
    if (std::abs(r.q0 - ell) < 1e-6 * ell) continue;
    const auto run = bootstrap_sequence(r);
    if ((run.verdict == BootstrapVerdict::escaped) != (r.q0 > ell)) ++mismatches;
  }
  CHECK(mismatches == 0);
}

TEST_CASE("conjugate and gamma-weighted recurrences") {
  BootstrapParams bp;
  bp.kind = BootstrapKind::conjugate;
  bp.N = 1.0;
  bp.s = 0.5;
  bp.p = 2.0;
  bp.q0 = 1.0;
  // N = 1 < sp p' = 2
  const auto run = bootstrap_sequence(bp);
  CHECK(run.verdict == BootstrapVerdict::escaped);

  bp.kind = BootstrapKind::gamma_weighted;
  bp.N = 8.0;
  bp.s = 0.5;
  bp.p = 2.5;
  bp.gamma = 0.8;
  bp.q0 = 1.0;
  const auto g = bootstrap_sequence(bp);
  const double c = 2.0 * bp.gamma + 1.0;
  double q = 1.0;
  for (std::size_t k = 1; k < g.q.size(); ++k) {
    q = bp.N * q * (bp.p - 1.0) * c / (bp.N * (q + 1.0) - bp.s * bp.p * q * c);
    CHECK(g.q[k] == doctest::Approx(q).epsilon(1e-12));
    CHECK(g.q[k] > g.q[k - 1]);
  }
  // q* is the fixed point of the same map
  const double qs = q_star(bp.N, bp.s, bp.p, bp.gamma);
  const double image = bp.N * qs * (bp.p - 1.0) * c / (bp.N * (qs + 1.0) - bp.s * bp.p * qs * c);
  CHECK(image == doctest::Approx(qs).epsilon(1e-12));
  CHECK(std::isinf(q_star(bp.s * bp.p * c, bp.s, bp.p, bp.gamma)));
  CHECK_THROWS_AS(q_star(1.0, 0.5, 2.5, 0.8), DomainError);

  CHECK(bootstrap_kind_from_string(to_string(BootstrapKind::conjugate)) == BootstrapKind::conjugate);
  CHECK_THROWS_AS(bootstrap_kind_from_string("lemma99"), ParameterOutOfRange);
}

TEST_CASE("dimension report") {
  const auto ex = Nonlinearity::exponential();

  SUBCASE("N = 1 is bounded") {
    const auto rep = dimension_report(1.0, 0.5, 2.0, ex);
    double linf = 0.0;
    for (const auto& [k, v] : rep.common) {
      if (k == "linf_threshold") linf = v;
    }
    CHECK(linf == doctest::Approx(5.0));
    const auto& e = entry(rep, "convex_ratio");
    REQUIRE(e.applicable);
    CHECK(*e.bounded);
    CHECK(*e.energy_class);
  }
  SUBCASE("N = 12 reports only integrability") {
    const auto rep = dimension_report(12.0, 0.5, 2.0, ex);
    const auto& conj = entry(rep, "conjugate_exponent");
    REQUIRE(conj.applicable);
    CHECK_FALSE(*conj.bounded);
    CHECK(value(conj, "lq_bound") == doctest::Approx(1.2).epsilon(1e-14));
    CHECK_FALSE(*entry(rep, "convex_ratio").bounded);
  }
  SUBCASE("power growth needs m > p - 1") {
    const auto rep = dimension_report(3.0, 0.5, 2.0, Nonlinearity::power(1.0));
    const auto& e = entry(rep, "power_growth");
    CHECK_FALSE(e.applicable);
    CHECK_FALSE(e.reason.empty());
    const auto ok = dimension_report(3.0, 0.5, 2.0, Nonlinearity::power(3.0));
    const auto& pg = entry(ok, "power_growth");
    REQUIRE(pg.applicable);
    CHECK(value(pg, "G") == doctest::Approx(threshold_G(0.5, 2.0, 3.0)));
    CHECK(*pg.bounded == (3.0 < threshold_G(0.5, 2.0, 3.0)));
  }
}

TEST_CASE("threshold orderings and the growth exponent identity") {
  for (double s : {0.2, 0.5, 0.9}) {
    for (double p : {1.5, 2.0, 3.0}) {
      CHECK(convex_dimension_threshold(s, p, 1.0) == doctest::Approx(linf_threshold(s, p)));
      for (double tau : {1.2, 2.0, 5.0}) {
        CHECK(convex_dimension_threshold(s, p, tau) > linf_threshold(s, p));
      }
    }
  }
  for (int k = 0; k <= 100; ++k) {
    const double m = 1.0 + 0.2 * k;
    const double tau = (m - 1.0) / m;
    CHECK(growth_exponent(tau) == doctest::Approx(m).epsilon(1e-12));
    CHECK(tau_limit(Nonlinearity::power(m)).value == doctest::Approx(tau).epsilon(1e-7));
  }
  const auto [lo, hi] = gamma_interval(2.0, 1.0);
  CHECK(lo == doctest::Approx(1.0));
  CHECK(hi == doctest::Approx(2.0));
}

TEST_CASE("L^r estimates") {
  const Mesh mesh = build_mesh(-1.0, 1.0, 64);

  CHECK(compute_alpha0(1.0, 2.0, 0.5, 2.0, 1.0) == doctest::Approx(8.0).epsilon(1e-14));
  CHECK_THROWS_AS(compute_alpha0(1.0, 1.0, 0.5, 2.0, 1.0), DomainError);

  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(64);
  CHECK(discrete_lr_norm(ones, 0.5, 2.0) == doctest::Approx(std::sqrt(32.0)));
  CHECK(discrete_lr_norm(-3.0 * ones, 0.5, INFINITY) == 3.0);

  CHECK(select_lr_regime(1.0, 0.5, 2.0, 1.0) == LrRegime::l1_data);
  CHECK(select_lr_regime(1.0, 0.5, 3.0, 1.0) == LrRegime::holder);
  CHECK(select_lr_regime(3.0, 0.5, 2.0, 2.0) == LrRegime::subcritical);
  CHECK(select_lr_regime(3.0, 0.5, 2.0, 3.0) == LrRegime::critical);
  CHECK(select_lr_regime(3.0, 0.5, 2.0, 4.0) == LrRegime::supercritical);

  SUBCASE("homogeneity at p = 3") {
    const auto kw = build_kernel_weights(mesh, 0.5, 3.0);
    Eigen::VectorXd g = (mesh.nodes().array() * 3.0).cos().matrix() + ones;
    const Eigen::VectorXd u = solve_dirichlet(kw, g).u;
    const Eigen::VectorXd u8 = solve_dirichlet(kw, 8.0 * g).u;
    // L(c u) = c^(p-1) L u, so 8 g gives sqrt(8) u at p = 3
    CHECK((u8 - std::sqrt(8.0) * u).cwiseAbs().maxCoeff() <= 1e-9 * u.cwiseAbs().maxCoeff());
    const auto table = verify_lr_estimates(kw, {g}, 1.0, {1.0, 2.0, INFINITY});
    CHECK(table.regime == LrRegime::holder);
    CHECK(table.homogeneity_error <= 1e-12);
  }
  SUBCASE("spread over random nonnegative data") {
    const auto kw = build_kernel_weights(mesh, 0.5, 2.0);
    std::mt19937_64 rng(31);
    std::vector<Eigen::VectorXd> family;
    for (int k = 0; k < 50; ++k) family.push_back(testing_support::uniform_vector(rng, 64, 0.0, 1.0));
    const auto table = verify_lr_estimates(kw, family, 1.0, {2.0});
    CHECK(table.regime == LrRegime::l1_data);
    CHECK(table.ratios.size() == 50);
    CHECK(table.spread >= 1.0);
    CHECK(table.spread <= 1e3);
    CHECK(table.homogeneity_error <= 1e-12);
    CHECK_THROWS_AS(verify_lr_estimates(kw, family, 1.0, {INFINITY}), RangeError);
  }
}
