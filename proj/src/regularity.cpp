#include "fracgelfand/regularity.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "fracgelfand/errors.hpp"

namespace fracgelfand {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_sp(double s, double p, const char* who, bool allow_s1 = false) {
  const bool s_ok = allow_s1 ? (s > 0.0 && s <= 1.0) : (s > 0.0 && s < 1.0);
  if (!s_ok || !(p > 1.0)) throw DomainError(std::string(who) + ": need s in (0,1) and p > 1");
}

std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

}  // namespace

double threshold_G(double s, double p, double m) {
  require_sp(s, p, "threshold_G", true);
  if (!(m > p - 1.0) || !std::isfinite(m)) throw DomainError("threshold_G: need m > p - 1");
  const double d = m - p + 1.0;
  return s * p / (p - 1.0) * (1.0 + m * p / d + 2.0 * std::sqrt(m / d));
}

double threshold_G1_p2(double m) {
  if (!(m > 1.0) || !std::isfinite(m)) throw DomainError("threshold_G1_p2: need m > 1");
  return 2.0 + 4.0 * m / (m - 1.0) + 4.0 * std::sqrt(m / (m - 1.0));
}

double threshold_beta(double sigma, double p) {
  if (!(p > 1.0)) throw DomainError("threshold_beta: need p > 1");
  if (!(sigma >= p - 1.0) || !std::isfinite(sigma)) {
    throw DomainError("threshold_beta: need sigma >= p - 1");
  }
  return (sigma + std::sqrt(sigma * (sigma - p + 1.0))) / (p - 1.0);
}

BetaMidpointCheck beta_midpoint_check(double sigma, double p) {
  const double hi = threshold_beta(sigma, p);
  BetaMidpointCheck c;
  c.gamma = 0.5 * (sigma / (p - 1.0) + hi);
  c.bound = (p - 1.0) * c.gamma * c.gamma / (2.0 * c.gamma - 1.0);
  c.holds = sigma > c.bound;
  return c;
}

double linf_threshold(double s, double p) {
  require_sp(s, p, "linf_threshold", true);
  return s * p + 4.0 * s * p / (p - 1.0);
}

namespace {
double tau_radical(double p, double tau, const char* who) {
  if (!(tau > (p - 2.0) / (p - 1.0))) throw DomainError(std::string(who) + ": need tau > (p-2)/(p-1)");
  return std::sqrt(1.0 - (p - 1.0) * (1.0 - tau));
}
}  // namespace

double convex_dimension_threshold(double s, double p, double tau) {
  require_sp(s, p, "convex_dimension_threshold", true);
  const double r = tau_radical(p, tau, "convex_dimension_threshold");
  return s * p + 2.0 * s * p / (p - 1.0) * (1.0 + r);
}

double subunit_tau_threshold(double s, double p, double tau) {
  require_sp(s, p, "subunit_tau_threshold", true);
  const double r = tau_radical(p, tau, "subunit_tau_threshold");
  if (!(tau < 1.0)) throw DomainError("subunit_tau_threshold: need tau < 1");
  const double d = 1.0 - (p - 1.0) * (1.0 - tau);
  return s * p / (p - 1.0) * (1.0 + p / d + 2.0 * r / d);
}

double convex_q0(double N, double s, double p, double tau) {
  const double ns = convex_dimension_threshold(s, p, tau);
  if (!(N >= ns)) throw DomainError("convex_q0: need N >= N(s,p)");
  if (N == ns) return kInf;
  return N * (2.0 * tau_radical(p, tau, "convex_q0") + p) / (N - ns);
}

std::pair<double, double> gamma_interval(double p, double tau) {
  if (!(p > 1.0)) throw DomainError("gamma_interval: need p > 1");
  const double r = tau_radical(p, tau, "gamma_interval");
  return {1.0 / (p - 1.0), (1.0 + r) / (p - 1.0)};
}

double q_star(double N, double s, double p, double gamma) {
  require_sp(s, p, "q_star");
  const double k = 2.0 * gamma + 1.0;
  const double crit = k * s * p;
  if (N < crit) throw DomainError("q_star: bounded regime, N < (2 gamma + 1) sp");
  if (N == crit) return kInf;
  return N * ((p - 1.0) * k - 1.0) / (N - crit);
}

double growth_exponent(double tau) {
  if (!(tau < 1.0)) throw DomainError("growth_exponent: need tau < 1");
  return 1.0 / (1.0 - tau);
}

std::string to_string(BootstrapKind kind) {
  switch (kind) {
    case BootstrapKind::power_barrier: return "power_barrier";
    case BootstrapKind::conjugate: return "conjugate";
    case BootstrapKind::gamma_weighted: return "gamma_weighted";
  }
  return "unknown";
}

BootstrapKind bootstrap_kind_from_string(const std::string& name) {
  for (auto k : {BootstrapKind::power_barrier, BootstrapKind::conjugate,
                 BootstrapKind::gamma_weighted}) {
    if (to_string(k) == name) return k;
  }
  throw ParameterOutOfRange("unknown bootstrap kind '" + name + "'");
}

std::string to_string(BootstrapVerdict verdict) {
  switch (verdict) {
    case BootstrapVerdict::escaped: return "escaped";
    case BootstrapVerdict::converged_to_fixed_point: return "converged_to_fixed_point";
    case BootstrapVerdict::stalled: return "stalled";
  }
  return "unknown";
}

double power_barrier_fixed_point(double N, double s, double p, double m) {
  return (1.0 - (p - 1.0) / m) * N / (s * p);
}

BootstrapRun bootstrap_sequence(const BootstrapParams& prm) {
  require_sp(prm.s, prm.p, "bootstrap_sequence");
  if (!(prm.N >= 1.0) || !std::isfinite(prm.N)) throw DomainError("bootstrap_sequence: need N >= 1");
  if (!(prm.q0 >= 1.0) || !std::isfinite(prm.q0)) throw DomainError("bootstrap_sequence: need q0 >= 1");
  if (prm.max_steps < 1) throw DomainError("bootstrap_sequence: max_steps must be positive");
  const double N = prm.N, sp = prm.s * prm.p, p = prm.p;

  // Each recurrence is q -> num_coef q / den(q) with an admissibility condition den(q) > 0.
  double num_coef = 0.0;
  std::function<double(double)> den;
  switch (prm.kind) {
    case BootstrapKind::power_barrier:
      if (!(prm.m > p - 1.0)) throw DomainError("bootstrap_sequence: need m > p - 1");
      num_coef = N * (p - 1.0) / prm.m;
      den = [=](double q) { return N - sp * q; };
      break;
    case BootstrapKind::conjugate: {
      const double k = p / (p - 1.0);
      num_coef = N * (p - 1.0) * k;
      den = [=](double q) { return N * (q + 1.0) - sp * q * k; };
      break;
    }
    case BootstrapKind::gamma_weighted: {
      if (!(prm.gamma >= 1.0 / (p - 1.0))) {
        throw DomainError("bootstrap_sequence: need gamma >= 1/(p-1)");
      }
      const double k = 2.0 * prm.gamma + 1.0;
      num_coef = N * (p - 1.0) * k;
      den = [=](double q) { return N * (q + 1.0) - sp * q * k; };
      break;
    }
  }

  BootstrapRun run;
  run.params = prm;
  double q = prm.q0;
  run.q.push_back(q);
  for (int step = 0; step < prm.max_steps; ++step) {
    const double d = den(q);
    if (!(d > 0.0)) {
      run.verdict = BootstrapVerdict::escaped;
      run.escape_step = static_cast<int>(run.q.size()) - 1;
      return run;
    }
    const double next = num_coef * q / d;
    if (std::abs(next - q) < 1e-12) {
      run.verdict = BootstrapVerdict::converged_to_fixed_point;
      run.fixed_point = next;
      return run;
    }
    if (prm.kind == BootstrapKind::power_barrier && next < q) {
      // Below the repelling barrier. The inverse map r -> N r / (a + sp r) attracts to it;
      // stop once the geometric tail estimate of the remaining distance is negligible.
      double r = q, prev_step = kInf;
      for (int k = 0; k < 100000000; ++k) {
        const double nr = N * r / (num_coef + sp * r);
        const double dr = std::abs(nr - r);
        const double rate = std::isfinite(prev_step) && prev_step > 0.0 ? dr / prev_step : 0.0;
        r = nr;
        prev_step = dr;
        if (dr < 1e-12 && (rate >= 1.0 || dr * rate / (1.0 - rate) < 1e-13)) break;
        if (dr == 0.0) break;
      }
      run.verdict = BootstrapVerdict::converged_to_fixed_point;
      run.fixed_point = r;
      return run;
    }
    q = next;
    run.q.push_back(q);
  }
  run.verdict = BootstrapVerdict::stalled;
  return run;
}

bool convexity_hypothesis_holds(const Nonlinearity& nl, double p) {
  std::vector<double> grid;
  for (int k = 0; k <= 500; ++k) grid.push_back(0.1 * k);
  const ScalarFn fn = p >= 2.0 ? ScalarFn([&](double t) { return eval_derived(nl, p, t, Derived::psi); })
                               : ScalarFn([&](double t) { return nl.f(t); });
  return min_convexity_margin(fn, grid) >= -1e-9;
}

DimensionReport dimension_report(double N, double s, double p, const Nonlinearity& nl) {
  require_sp(s, p, "dimension_report");
  if (!(N >= 1.0) || N != std::floor(N)) throw DomainError("dimension_report: N must be an integer >= 1");
  const double sp = s * p;
  const double pc = p / (p - 1.0);
  const double linf = linf_threshold(s, p);

  DimensionReport rep;
  rep.N = N;
  rep.s = s;
  rep.p = p;
  rep.nonlinearity = nl.name();
  rep.common = {{"sp", sp}, {"p_conjugate", pc}, {"spp_conjugate", sp * pc}, {"linf_threshold", linf}};

  const bool convex_ok = convexity_hypothesis_holds(nl, p);

  {  // power-like growth with exponent m
    TheoremEntry e;
    e.key = "power_growth";
    if (nl.kind() != Nonlinearity::Kind::power) {
      e.reason = "requires f(t)/t^m bounded with f'(t) t / f(t) -> m (power kind only)";
    } else if (!(nl.m() > p - 1.0)) {
      e.reason = "requires m > p - 1";
    } else {
      e.applicable = true;
      const double G = threshold_G(s, p, nl.m());
      e.values = {{"m", nl.m()}, {"G", G}};
      e.energy_class = true;
      e.bounded = N < G;
    }
    rep.entries.push_back(std::move(e));
  }

  {  // conjugate exponent table, p >= 2
    TheoremEntry e;
    e.key = "conjugate_exponent";
    if (!(p >= 2.0)) {
      e.reason = "requires p >= 2";
    } else if (!convex_ok) {
      e.reason = "convexity of (f - f(0))^(1/(p-1)) fails";
    } else {
      e.applicable = true;
      const double w_dim = sp * (1.0 + pc);
      e.values = {{"energy_dimension", w_dim}, {"spp_conjugate", sp * pc}};
      e.energy_class = N < w_dim;
      const std::string caveat = *e.energy_class ? "" : " (dimension condition N < sp(1+p') not met)";
      if (N < sp * pc) {
        e.bounded = *e.energy_class;
        e.lq_range = "bounded" + caveat;
      } else if (N == sp * pc) {
        e.bounded = false;
        e.lq_range = "1 <= q < inf" + caveat;
      } else {
        e.bounded = false;
        const double bound = N * (p - 1.0) * (p - 1.0) / (N * (p - 1.0) - sp * p);
        e.values.emplace_back("lq_bound", bound);
        e.lq_range = "1 <= q < " + format_number(bound) + caveat;
      }
    }
    rep.entries.push_back(std::move(e));
  }

  std::optional<double> tau;
  std::string tau_problem;
  try {
    tau = tau_limit(nl).value;
  } catch (const NoLimit& err) {
    tau_problem = err.what();
  }

  {  // ratio f f'' / f'^2
    TheoremEntry e;
    e.key = "convex_ratio";
    if (!tau) {
      e.reason = "tau limit not found: " + tau_problem;
    } else if (!(*tau > (p - 2.0) / (p - 1.0))) {
      e.reason = "requires tau > (p-2)/(p-1)";
    } else if (!convex_ok) {
      e.reason = p >= 2.0 ? "convexity of (f - f(0))^(1/(p-1)) fails" : "convexity of f fails";
    } else {
      e.applicable = true;
      const double ns = convex_dimension_threshold(s, p, *tau);
      const auto [glo, ghi] = gamma_interval(p, *tau);
      e.values = {{"tau", *tau}, {"N_sp", ns}, {"linf_threshold", linf}, {"gamma_lo", glo},
                  {"gamma_hi", ghi}};
      e.energy_class = true;
      double bound = ns;
      if (*tau < 1.0) {
        bound = subunit_tau_threshold(s, p, *tau);
        e.values.emplace_back("growth_exponent", growth_exponent(*tau));
        e.values.emplace_back("subunit_threshold", bound);
      }
      e.bounded = N < bound;
      if (!*e.bounded && N >= ns) {
        const double q0 = convex_q0(N, s, p, *tau);
        e.values.emplace_back("q0", q0);
        e.lq_range = "1 <= q < " + format_number(q0);
      } else if (!*e.bounded) {
        e.lq_range = "not determined";
      } else {
        e.lq_range = "bounded";
      }
    }
    rep.entries.push_back(std::move(e));

    TheoremEntry g;
    g.key = "gamma_family";
    if (!rep.entries.back().applicable) {
      g.reason = "needs the convex_ratio hypotheses";
    } else {
      g.applicable = true;
      const auto [glo, ghi] = gamma_interval(p, *tau);
      const double gamma = 0.5 * (glo + ghi);
      const double crit = (2.0 * gamma + 1.0) * sp;
      g.values = {{"gamma", gamma}, {"critical_dimension", crit}};
      g.energy_class = true;
      g.bounded = N < crit;
      if (*g.bounded) {
        g.lq_range = "bounded";
      } else {
        const double qs = q_star(N, s, p, gamma);
        g.values.emplace_back("q_star", qs);
        g.lq_range = "1 <= q < " + format_number(qs);
      }
    }
    rep.entries.push_back(std::move(g));
  }
  return rep;
}

}  // namespace fracgelfand
