#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fracgelfand/branch.hpp"
#include "fracgelfand/commands.hpp"
#include "fracgelfand/dirichlet_solver.hpp"
#include "fracgelfand/errors.hpp"
#include "fracgelfand/nonlocal_operator.hpp"
#include "fracgelfand/regularity.hpp"
#include "fracgelfand/stability.hpp"

namespace py = pybind11;
using namespace fracgelfand;

namespace {

MonotoneOptions monotone_options(int max_outer, double tol, double cap) {
  MonotoneOptions opts;
  opts.max_outer = max_outer;
  opts.tol = tol;
  opts.cap = cap;
  return opts;
}

py::dict entry_dict(const TheoremEntry& e) {
  py::dict d;
  d["applicable"] = e.applicable;
  if (!e.applicable) d["reason"] = e.reason;
  if (e.energy_class) d["energy_class"] = *e.energy_class;
  if (e.bounded) d["bounded"] = *e.bounded;
  for (const auto& [k, v] : e.values) d[py::str(k)] = v;
  if (!e.lq_range.empty()) d["lq_range"] = e.lq_range;
  return d;
}

}  // namespace

PYBIND11_MODULE(_fracgelfand, m) {
  m.doc() = "Discrete fractional p-Laplacian Gelfand problem";
  m.attr("__version__") = FRACGELFAND_VERSION;

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<BadGeometry>(m, "BadGeometry", base.ptr());
  py::register_exception<ParameterOutOfRange>(m, "ParameterOutOfRange", base.ptr());
  py::register_exception<ShapeMismatch>(m, "ShapeMismatch", base.ptr());
  py::register_exception<SingularWeight>(m, "SingularWeight", base.ptr());
  py::register_exception<NotConvex>(m, "NotConvex", base.ptr());
  py::register_exception<NoLimit>(m, "NoLimit", base.ptr());
  py::register_exception<BadBracket>(m, "BadBracket", base.ptr());
  py::register_exception<NoConvergence>(m, "NoConvergence", base.ptr());
  py::register_exception<ExpansionFailed>(m, "ExpansionFailed", base.ptr());
  py::register_exception<InsufficientPoints>(m, "InsufficientPoints", base.ptr());
  py::register_exception<SingularB>(m, "SingularB", base.ptr());
  py::register_exception<BadTestFunction>(m, "BadTestFunction", base.ptr());
  py::register_exception<RangeError>(m, "RangeError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());

  py::class_<Mesh>(m, "Mesh")
      .def_readonly("a", &Mesh::a)
      .def_readonly("b", &Mesh::b)
      .def_readonly("n", &Mesh::n)
      .def_readonly("h", &Mesh::h)
      .def("nodes", &Mesh::nodes);
  m.def("build_mesh", &build_mesh, py::arg("a"), py::arg("b"), py::arg("n"));

  py::class_<KernelWeights>(m, "KernelWeights")
      .def_readonly("mesh", &KernelWeights::mesh)
      .def_readonly("s", &KernelWeights::s)
      .def_readonly("p", &KernelWeights::p)
      .def_readonly("W", &KernelWeights::W)
      .def_readonly("T", &KernelWeights::T)
      .def("size", &KernelWeights::size);
  m.def("build_kernel_weights", &build_kernel_weights, py::arg("mesh"), py::arg("s"), py::arg("p"));

  py::class_<Nonlinearity>(m, "Nonlinearity")
      .def_static("exponential", &Nonlinearity::exponential)
      .def_static("power", &Nonlinearity::power, py::arg("m"))
      .def_property_readonly("name", &Nonlinearity::name)
      .def_property_readonly("m", &Nonlinearity::m)
      .def("f", [](const Nonlinearity& nl, double t) { return nl.f(t); })
      .def("fprime", [](const Nonlinearity& nl, double t) { return nl.fprime(t); });

  m.def("apply_operator", &apply_operator, py::arg("kw"), py::arg("u"));
  m.def("discrete_seminorm_p", &discrete_seminorm_p, py::arg("kw"), py::arg("u"));
  m.def("discrete_energy", &discrete_energy, py::arg("kw"), py::arg("u"));

  py::class_<SolveResult>(m, "SolveResult")
      .def_readonly("u", &SolveResult::u)
      .def_readonly("iterations", &SolveResult::iterations)
      .def_readonly("residual", &SolveResult::residual)
      .def_readonly("energy_history", &SolveResult::energy_history);
  m.def(
      "solve_dirichlet",
      [](const KernelWeights& kw, const Eigen::VectorXd& g, double tol, int max_iter,
         std::optional<double> eps_reg) {
        SolveOptions opts;
        opts.tol = tol;
        opts.max_iter = max_iter;
        opts.eps_reg = eps_reg;
        return solve_dirichlet(kw, g, opts);
      },
      py::arg("kw"), py::arg("g"), py::arg("tol") = 1e-10, py::arg("max_iter") = 200,
      py::arg("eps_reg") = py::none());

  py::class_<MonotoneResult>(m, "MonotoneResult")
      .def_property_readonly("converged", &MonotoneResult::converged)
      .def_readonly("u", &MonotoneResult::u)
      .def_readonly("iterations", &MonotoneResult::iterations)
      .def_readonly("norms", &MonotoneResult::norms)
      .def_readonly("residual", &MonotoneResult::residual);
  m.def(
      "monotone_iteration",
      [](const KernelWeights& kw, const Nonlinearity& nl, double lambda, int max_outer,
         double tol, double cap) {
        return monotone_iteration(kw, nl, lambda, Eigen::VectorXd::Zero(kw.size()), std::nullopt,
                                  monotone_options(max_outer, tol, cap));
      },
      py::arg("kw"), py::arg("nl"), py::arg("lam"), py::arg("max_outer") = 500,
      py::arg("tol") = 1e-9, py::arg("cap") = 1e8);

  m.def("lambda_hat", &lambda_hat, py::arg("kw"), py::arg("nl"));

  py::class_<LambdaStarBracket>(m, "LambdaStarBracket")
      .def_readonly("lambda_lo", &LambdaStarBracket::lambda_lo)
      .def_readonly("lambda_hi", &LambdaStarBracket::lambda_hi)
      .def_property_readonly("width", &LambdaStarBracket::width)
      .def_readonly("u_lo", &LambdaStarBracket::u_lo);
  m.def(
      "estimate_lambda_star",
      [](const KernelWeights& kw, const Nonlinearity& nl, double tol, int max_outer) {
        const Problem problem{kw, nl, monotone_options(max_outer, 1e-9, 1e8)};
        return estimate_lambda_star(problem, tol);
      },
      py::arg("kw"), py::arg("nl"), py::arg("tol") = 1e-3, py::arg("max_outer") = 20000);

  py::class_<BranchPoint>(m, "BranchPoint")
      .def_readonly("lam", &BranchPoint::lambda)
      .def_readonly("u", &BranchPoint::u)
      .def_readonly("sup_norm", &BranchPoint::sup_norm)
      .def_readonly("seminorm_p", &BranchPoint::seminorm_p)
      .def_readonly("energy", &BranchPoint::energy)
      .def_readonly("stability_ratio", &BranchPoint::stability_ratio)
      .def_readonly("outer_iters", &BranchPoint::outer_iters)
      .def_readonly("converged", &BranchPoint::converged);
  py::class_<Branch>(m, "Branch")
      .def_readonly("points", &Branch::points)
      .def_readonly("min_order_gap", &Branch::min_order_gap);
  m.def(
      "trace_branch",
      [](const KernelWeights& kw, const Nonlinearity& nl, const std::vector<double>& lambdas,
         bool stability, int max_outer) {
        const Problem problem{kw, nl, monotone_options(max_outer, 1e-9, 1e8)};
        BranchOptions opts;
        opts.stability = stability;
        return trace_branch(problem, lambdas, opts);
      },
      py::arg("kw"), py::arg("nl"), py::arg("lambdas"), py::arg("stability") = false,
      py::arg("max_outer") = 20000);

  py::class_<StabilityResult>(m, "StabilityResult")
      .def_readonly("rho", &StabilityResult::rho)
      .def_readonly("phi_min", &StabilityResult::phi_min)
      .def_readonly("eps_cap", &StabilityResult::eps_cap)
      .def_readonly("stable", &StabilityResult::stable)
      .def_readonly("rho_constrained", &StabilityResult::rho_constrained);
  m.def(
      "stability_ratio",
      [](const KernelWeights& kw, const Eigen::VectorXd& u, const Nonlinearity& nl, double lambda,
         std::optional<double> eps_cap, bool constrained) {
        return stability_ratio(kw, u, nl, lambda, eps_cap, constrained);
      },
      py::arg("kw"), py::arg("u"), py::arg("nl"), py::arg("lam"), py::arg("eps_cap") = py::none(),
      py::arg("constrained") = false);

  m.def("threshold_G", &threshold_G, py::arg("s"), py::arg("p"), py::arg("m"));
  m.def("threshold_beta", &threshold_beta, py::arg("sigma"), py::arg("p"));
  m.def("linf_threshold", &linf_threshold, py::arg("s"), py::arg("p"));
  m.def("convex_dimension_threshold", &convex_dimension_threshold, py::arg("s"), py::arg("p"),
        py::arg("tau"));
  m.def("compute_alpha0", &compute_alpha0, py::arg("S"), py::arg("N"), py::arg("s"), py::arg("p"),
        py::arg("g_norm"));

  m.def(
      "bootstrap_sequence",
      [](const std::string& kind, double N, double s, double p, double extra, double q0,
         int max_steps) {
        BootstrapParams prm;
        prm.kind = bootstrap_kind_from_string(kind);
        prm.N = N;
        prm.s = s;
        prm.p = p;
        prm.m = extra;
        prm.gamma = extra;
        prm.q0 = q0;
        prm.max_steps = max_steps;
        const auto run = bootstrap_sequence(prm);
        py::dict d;
        d["q"] = run.q;
        d["verdict"] = to_string(run.verdict);
        d["escape_step"] = run.escape_step;
        d["fixed_point"] = run.fixed_point;
        return d;
      },
      py::arg("kind"), py::arg("N"), py::arg("s"), py::arg("p"), py::arg("extra") = 0.0,
      py::arg("q0") = 1.0, py::arg("max_steps") = 10000,
      "extra is m for power_barrier and gamma for gamma_weighted");

  m.def(
      "dimension_report",
      [](double N, double s, double p, const Nonlinearity& nl) {
        const auto rep = dimension_report(N, s, p, nl);
        py::dict common, theorems;
        for (const auto& [k, v] : rep.common) common[py::str(k)] = v;
        for (const auto& e : rep.entries) theorems[py::str(e.key)] = entry_dict(e);
        py::dict d;
        d["N"] = rep.N;
        d["nonlinearity"] = rep.nonlinearity;
        d["common"] = common;
        d["theorems"] = theorems;
        return d;
      },
      py::arg("N"), py::arg("s"), py::arg("p"), py::arg("nl"));

  m.def("command_names", &command_names);
  m.def(
      "run_command",
      [](const std::string& command, const std::string& config_path) {
        const auto out = run_command(command, config_path);
        return py::make_tuple(out.exit_code, out.files, out.message);
      },
      py::arg("command"), py::arg("config_path"),
      "Returns (exit_code, written files, message).");
}
