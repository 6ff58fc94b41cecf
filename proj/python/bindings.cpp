#include <optional>
#include <string>
#include <vector>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hjlab/bernstein.hpp"
#include "hjlab/counterexample.hpp"
#include "hjlab/exponents.hpp"
#include "hjlab/field_io.hpp"
#include "hjlab/manufactured.hpp"
#include "hjlab/solver.hpp"
#include "hjlab/source.hpp"

namespace py = pybind11;
using namespace hjlab;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

ScalarField to_field(const Array& a) {
  const int d = static_cast<int>(a.ndim());
  if (d < 1 || d > 3) throw ConfigurationError("arrays must have 1 to 3 axes");
  const int n = static_cast<int>(a.shape(0));
  for (int j = 1; j < d; ++j) {
    if (a.shape(j) != n) throw ConfigurationError("arrays must be cubic (n points per axis)");
  }
  return ScalarField(GridSpec(d, n), std::vector<double>(a.data(), a.data() + a.size()));
}

Array to_array(const ScalarField& u) {
  std::vector<py::ssize_t> shape(static_cast<std::size_t>(u.grid().dim()), u.grid().n());
  Array out(shape);
  std::copy(u.values().begin(), u.values().end(), out.mutable_data());
  return out;
}

py::dict exponents_dict(const Exponents& e) {
  py::dict d;
  d["gamma"] = e.gamma;
  d["q"] = e.q;
  d["d"] = e.d;
  d["delta"] = e.delta;
  d["delta_max"] = e.delta_max;
  d["p"] = e.p;
  d["p_formula"] = e.p_formula;
  d["beta"] = e.beta;
  d["eta"] = e.eta;
  d["used_fallback"] = e.used_fallback;
  d["superlevel_exponent"] = e.superlevel_exponent;
  return d;
}

Hamiltonian make_hamiltonian(double gamma, double c1, double perturbation) {
  if (perturbation == 0.0) return Hamiltonian(gamma, c1);
  return Hamiltonian(gamma, c1, cosine_perturbation(perturbation));
}

}  // namespace

PYBIND11_MODULE(_hjlab, m) {
  m.doc() = "Spectral solver and diagnostics for -Lap u + H(Du) + lambda = f on the unit torus";

  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigurationError>(m, "ConfigurationError", PyExc_ValueError);
  // Translators run newest first, so derived types are registered after their bases.
  auto domain = py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<AdmissibilityError>(m, "AdmissibilityError", domain.ptr());
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  m.def(
      "derive_exponents",
      [](double gamma, double q, int d, std::optional<double> delta) {
        return exponents_dict(derive_exponents<double>(gamma, q, d, delta));
      },
      py::arg("gamma"), py::arg("q"), py::arg("d"), py::arg("delta") = py::none());

  m.def(
      "gradient",
      [](const Array& u) {
        const ScalarField f = to_field(u);
        const SpectrumWorkspace ws(f.grid());
        const VectorField du = gradient(f, ws);
        py::list out;
        for (int j = 0; j < du.dim(); ++j) out.append(to_array(du[j]));
        return out;
      },
      py::arg("u"));
  m.def(
      "laplacian",
      [](const Array& u) {
        const ScalarField f = to_field(u);
        const SpectrumWorkspace ws(f.grid());
        return to_array(laplacian(f, ws));
      },
      py::arg("u"));
  m.def(
      "lq_norm", [](const Array& u, double q) { return lq_norm(to_field(u), q); }, py::arg("u"), py::arg("q"));
  m.def(
      "superlevel_measure", [](const Array& u, double k) { return superlevel_measure(to_field(u), k); },
      py::arg("u"), py::arg("k"));

  m.def(
      "generate_source",
      [](int dim, int n, std::uint64_t seed, int band_limit, double m_target, double q) {
        const SpectrumWorkspace ws(GridSpec(dim, n));
        return to_array(generate_source(seed, band_limit, m_target, q, ws));
      },
      py::arg("dim"), py::arg("n"), py::arg("seed"), py::arg("band_limit"), py::arg("M_target"), py::arg("q"));

  m.def(
      "manufactured",
      [](int dim, int n, double gamma) {
        const GridSpec grid(dim, n);
        const ManufacturedSolution ms = default_manufactured(dim);
        return py::make_tuple(to_array(manufactured_field(ms, grid)),
                              to_array(manufactured_source(ms, Hamiltonian(gamma), grid)));
      },
      py::arg("dim"), py::arg("n"), py::arg("gamma"),
      "Returns (u*, f*) of the built-in manufactured solution; f* solves with lambda = 0.");

  m.def(
      "solve",
      [](const Array& f, double gamma, double q, double c1, double perturbation, double newton_tol,
         std::size_t max_newton_steps) {
        ErgodicProblem problem{to_field(f), make_hamiltonian(gamma, c1, perturbation), q};
        SolveSettings settings;
        settings.newton_tol = newton_tol;
        settings.max_newton_steps = max_newton_steps;
        settings.validate();
        const SpectrumWorkspace ws(problem.f.grid());
        ErgodicSolution sol = [&] {
          py::gil_scoped_release release;
          return solve(problem, settings, ws);
        }();
        const RegularityReport r = regularity_report(sol, problem, ws);
        py::dict out;
        out["u"] = to_array(sol.u);
        out["lambda"] = sol.lambda;
        out["residual_inf"] = sol.residual_inf;
        out["residual_l2"] = sol.residual_l2;
        out["relax_steps"] = sol.relax_steps;
        out["newton_steps"] = sol.newton_steps;
        out["converged"] = sol.converged;
        out["integral_identity"] = integral_identity_check(sol, problem, ws);
        out["norm_lap_q"] = r.norm_lap_q;
        out["norm_gradpow_q"] = r.norm_gradpow_q;
        out["norm_du_l1"] = r.norm_du_l1;
        out["norm_f_eff_q"] = r.norm_f_eff_q;
        out["K_emp"] = r.k_emp;
        out["M_emp"] = r.m_emp;
        return out;
      },
      py::arg("f"), py::arg("gamma"), py::arg("q") = 4.0, py::arg("c1") = 1.0, py::arg("perturbation") = 0.0,
      py::arg("newton_tol") = 1e-10, py::arg("max_newton_steps") = 30);

  m.def(
      "superlevel_curve",
      [](const Array& u, double gamma, double q, std::optional<double> delta, std::vector<double> k_grid) {
        const ScalarField f = to_field(u);
        const SpectrumWorkspace ws(f.grid());
        const Exponents exps = derive_exponents<double>(gamma, q, f.grid().dim(), delta);
        const VectorField du = gradient(f, ws);
        if (k_grid.empty()) k_grid = default_k_grid(du, exps);
        const SuperlevelCurve c = superlevel_curve(du, exps, k_grid);
        py::dict out;
        out["k"] = c.k;
        out["Y"] = c.y;
        out["omega_arg"] = c.omega_arg;
        return out;
      },
      py::arg("u"), py::arg("gamma"), py::arg("q"), py::arg("delta") = py::none(),
      py::arg("k_grid") = std::vector<double>{});

  m.def(
      "f_alternative",
      [](int d) {
        const Alternative a = f_alternative(d);
        return py::make_tuple(a.z_star, a.f_star);
      },
      py::arg("d"));
  m.def(
      "alternative_roots", [](int d, double omega) { return f_alternative(d).roots(omega); }, py::arg("d"),
      py::arg("omega"));
  m.def("k_star", &k_star, py::arg("du_l1"), py::arg("t_star"), py::arg("delta"));

  m.def("c_constant", &c_constant, py::arg("gamma"), py::arg("d"));
  m.def("critical_q", &critical_q, py::arg("gamma"), py::arg("d"));
  m.def(
      "ball_norms",
      [](double gamma, int d, double eps, double q) {
        const BallNorms b = ball_norms(make_profile(gamma, d, eps), q);
        return py::make_tuple(b.norm_f, b.norm_grad_pow);
      },
      py::arg("gamma"), py::arg("d"), py::arg("eps"), py::arg("q"));
  m.def(
      "divergence_fit",
      [](double gamma, int d, std::vector<double> eps) {
        const DivergenceFit fit = divergence_fit(norm_table(gamma, d, critical_q(gamma, d), eps));
        return py::make_tuple(fit.slope, fit.intercept, fit.max_relative_residual);
      },
      py::arg("gamma"), py::arg("d"), py::arg("eps"));

  m.def(
      "write_field", [](const std::string& path, const Array& u) { write_field(path, to_field(u)); }, py::arg("path"),
      py::arg("u"));
  m.def(
      "read_field", [](const std::string& path) { return to_array(read_field(path)); }, py::arg("path"));
}
