#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "squall/barriers.hpp"
#include "squall/cli.hpp"
#include "squall/errors.hpp"
#include "squall/estimates.hpp"
#include "squall/fixedpoint.hpp"
#include "squall/mesh.hpp"
#include "squall/plap.hpp"
#include "squall/system.hpp"

namespace py = pybind11;
using namespace squall;

PYBIND11_MODULE(_core, m) {
  m.doc() =
      "Singular quasilinear elliptic systems: frozen-coefficient solves, "
      "barrier construction, and invariant-box fixed-point iteration.";
  m.attr("__version__") = kToolVersion;

  // base first: translators run newest-first, so subclasses match before it
  py::register_exception<Error>(m, "SquallError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<NonIntegrableExponent>(m, "NonIntegrableExponent",
                                                PyExc_ValueError);
  py::register_exception<HypothesisViolation>(m, "HypothesisViolation",
                                              PyExc_ValueError);
  py::register_exception<BarrierFailure>(m, "BarrierFailure",
                                         PyExc_RuntimeError);
  py::register_exception<EnvelopeViolation>(m, "EnvelopeViolation",
                                            PyExc_ValueError);
  py::register_exception<AdmissibilityError>(m, "AdmissibilityError",
                                             PyExc_ValueError);
  py::register_exception<ClosureFailure>(m, "ClosureFailure",
                                         PyExc_RuntimeError);
  py::register_exception<CalibrationError>(m, "CalibrationError",
                                           PyExc_RuntimeError);
  py::register_exception<PlapIterationLimit>(m, "PlapIterationLimit",
                                             PyExc_RuntimeError);

  py::class_<Mesh, std::shared_ptr<Mesh>>(m, "Mesh")
      .def_property_readonly("dim", &Mesh::dim)
      .def("node_count", &Mesh::node_count)
      .def("nodes_per_axis", &Mesh::nodes_per_axis, py::arg("axis"))
      .def("cell_count", &Mesh::cell_count)
      .def("node_coords", &Mesh::node_coords, py::arg("node"))
      .def("dist", &Mesh::dist, py::arg("node"))
      .def("is_boundary", &Mesh::is_boundary, py::arg("node"))
      .def("node_weight", &Mesh::node_weight, py::arg("node"))
      .def("volume", &Mesh::volume)
      .def("inradius", &Mesh::inradius)
      .def("diameter", &Mesh::diameter)
      .def("min_spacing", &Mesh::min_spacing);
  m.def("interval_mesh", &interval_mesh, py::arg("a"), py::arg("b"),
        py::arg("n"));
  m.def("rectangle_mesh", &rectangle_mesh, py::arg("ax"), py::arg("bx"),
        py::arg("ay"), py::arg("by"), py::arg("nx"), py::arg("ny"));
  m.def("refine", [](MeshPtr mesh) { return refine(*mesh); }, py::arg("mesh"));

  py::class_<ScalarField>(m, "ScalarField")
      .def_readwrite("values", &ScalarField::values)
      .def_property_readonly("mesh",
                             [](const ScalarField& f) { return f.mesh; })
      .def("__len__",
           [](const ScalarField& f) { return f.values.size(); })
      .def("__getitem__", [](const ScalarField& f, int n) {
        if (n < 0 || static_cast<std::size_t>(n) >= f.values.size())
          throw py::index_error();
        return f.values[n];
      });
  m.def("make_field", &make_field, py::arg("mesh"), py::arg("fill") = 0.0);
  m.def("norm_sup_grad", &norm_sup_grad, py::arg("field"));
  m.def("norm_lr", &norm_lr, py::arg("field"), py::arg("r"));
  m.def(
      "integrate_singular",
      [](MeshPtr mesh, double mu) { return integrate_singular(*mesh, mu); },
      py::arg("mesh"), py::arg("mu"));

  py::class_<ConstantLoad>(m, "ConstantLoad")
      .def(py::init<double>(), py::arg("value") = 1.0)
      .def_readwrite("value", &ConstantLoad::value);
  py::class_<SingularLoad>(m, "SingularLoad")
      .def(py::init<double, double, double>(), py::arg("c0") = 0.0,
           py::arg("c1") = 1.0, py::arg("mu") = 0.0)
      .def_readwrite("c0", &SingularLoad::c0)
      .def_readwrite("c1", &SingularLoad::c1)
      .def_readwrite("mu", &SingularLoad::mu);
  py::class_<BandedLoad>(m, "BandedLoad")
      .def(py::init<double, double>(), py::arg("s") = 0.0,
           py::arg("band") = 0.1)
      .def_readwrite("s", &BandedLoad::s)
      .def_readwrite("band", &BandedLoad::band);
  py::class_<NodalLoad>(m, "NodalLoad")
      .def(py::init<ScalarField>(), py::arg("field"))
      .def_readwrite("field", &NodalLoad::field);
  py::class_<CellLoad>(m, "CellLoad")
      .def(py::init<std::vector<double>>(), py::arg("values"))
      .def_readwrite("values", &CellLoad::values);

  py::class_<PlapConfig>(m, "PlapConfig")
      .def(py::init<>())
      .def_readwrite("eps_reg", &PlapConfig::eps_reg)
      .def_readwrite("tol", &PlapConfig::tol)
      .def_readwrite("max_iter", &PlapConfig::max_iter)
      .def_readwrite("line_search_shrink", &PlapConfig::line_search_shrink)
      .def_readwrite("collect_history", &PlapConfig::collect_history);

  m.def(
      "plap_solve",
      [](MeshPtr mesh, double p, const Load& g, const PlapConfig& cfg) {
        return plap_solve(mesh, p, g, cfg);
      },
      py::arg("mesh"), py::arg("p"), py::arg("load"),
      py::arg("config") = PlapConfig());
  m.def(
      "plap_residual",
      [](MeshPtr mesh, double p, const ScalarField& u, const Load& g) {
        return plap_residual(mesh, p, u, g);
      },
      py::arg("mesh"), py::arg("p"), py::arg("u"), py::arg("load"));

  py::class_<Term>(m, "Term")
      .def(py::init<>())
      .def_readwrite("coeff", &Term::coeff)
      .def_readwrite("pow_s1", &Term::pow_s1)
      .def_readwrite("pow_s2", &Term::pow_s2)
      .def_readwrite("pow_xi1", &Term::pow_xi1)
      .def_readwrite("pow_xi2", &Term::pow_xi2);
  py::class_<NonlinearityRule>(m, "NonlinearityRule")
      .def(py::init<>())
      .def_readwrite("terms", &NonlinearityRule::terms)
      .def("__call__", &NonlinearityRule::operator(), py::arg("s1"),
           py::arg("s2"), py::arg("xi1"), py::arg("xi2"))
      .def("__str__", &NonlinearityRule::str);
  m.def("parse_rule", &parse_rule, py::arg("text"));

  py::class_<SystemSpec>(m, "SystemSpec")
      .def(py::init<>())
      .def_readwrite("N", &SystemSpec::N)
      .def_readwrite("p", &SystemSpec::p)
      .def_readwrite("alpha", &SystemSpec::alpha)
      .def_readwrite("beta", &SystemSpec::beta)
      .def_readwrite("gamma", &SystemSpec::gamma)
      .def_readwrite("theta", &SystemSpec::theta)
      .def_readwrite("m", &SystemSpec::m)
      .def_readwrite("M", &SystemSpec::M)
      .def_readwrite("r", &SystemSpec::r)
      .def_readwrite("f", &SystemSpec::f)
      .def_readwrite("f_is_auto", &SystemSpec::f_is_auto)
      .def("__repr__", &write_spec_config);
  m.def("apply_auto_rules",
        [](SystemSpec& spec) { apply_auto_rules(spec); }, py::arg("spec"));
  m.def("validate_spec_shape", &validate_spec_shape, py::arg("spec"));
  m.def("eval_f", &eval_f, py::arg("spec"), py::arg("i"), py::arg("s1"),
        py::arg("s2"), py::arg("xi1"), py::arg("xi2"));

  py::class_<ConditionCheck>(m, "ConditionCheck")
      .def_readonly("name", &ConditionCheck::name)
      .def_readonly("pass_", &ConditionCheck::pass)
      .def_readonly("margin", &ConditionCheck::margin);
  py::class_<AdmissibilityReport>(m, "AdmissibilityReport")
      .def_readonly("checks", &AdmissibilityReport::checks)
      .def_readonly("admissible", &AdmissibilityReport::admissible);
  m.def("validate_cdt", &validate_cdt, py::arg("spec"));

  py::class_<EnvelopeReport>(m, "EnvelopeReport")
      .def_readonly("samples", &EnvelopeReport::samples)
      .def_readonly("worst_lower", &EnvelopeReport::worst_lower)
      .def_readonly("worst_upper", &EnvelopeReport::worst_upper);
  m.def("check_envelope", &check_envelope, py::arg("spec"),
        py::arg("samples"), py::arg("seed") = 20260814u);

  m.def("parse_spec_config", &parse_spec_config, py::arg("text"));
  m.def("write_spec_config", &write_spec_config, py::arg("spec"));
  m.def("load_spec_config", &load_spec_config, py::arg("path"));
  m.def("save_spec_config", &save_spec_config, py::arg("spec"),
        py::arg("path"));

  py::class_<TorsionResult>(m, "TorsionResult")
      .def_readonly("w", &TorsionResult::w)
      .def_readonly("L_hat", &TorsionResult::L_hat);
  m.def("build_y", &build_y, py::arg("mesh"), py::arg("p"), py::arg("s"),
        py::arg("config") = PlapConfig());
  m.def(
      "build_z",
      [](MeshPtr mesh, double p, double s, double delta,
         const PlapConfig& cfg, int max_halvings) {
        double used = 0.0;
        ScalarField z = build_z(mesh, p, s, delta, cfg, &used, max_halvings);
        return py::make_tuple(z, used);
      },
      py::arg("mesh"), py::arg("p"), py::arg("s"), py::arg("delta"),
      py::arg("config") = PlapConfig(), py::arg("max_halvings") = 6);
  m.def("build_torsion", &build_torsion, py::arg("mesh"), py::arg("p"),
        py::arg("config") = PlapConfig());

  py::class_<BarrierSet>(m, "BarrierSet")
      .def_readonly("mesh", &BarrierSet::mesh)
      .def_readonly("y", &BarrierSet::y)
      .def_readonly("z", &BarrierSet::z)
      .def_readonly("w_hat", &BarrierSet::w_hat)
      .def_readonly("w_sing", &BarrierSet::w_sing)
      .def_readonly("c0", &BarrierSet::c0)
      .def_readonly("c1", &BarrierSet::c1)
      .def_readonly("c2", &BarrierSet::c2)
      .def_readonly("c3", &BarrierSet::c3)
      .def_readonly("delta", &BarrierSet::delta)
      .def_readonly("gamma_sing", &BarrierSet::gamma_sing)
      .def_readonly("L_hat", &BarrierSet::L_hat);
  m.def("build_barrier_set", &build_barrier_set, py::arg("mesh"),
        py::arg("spec"), py::arg("gamma_sing") = -1.0,
        py::arg("config") = PlapConfig());

  py::class_<Lemma2Row>(m, "BarrierCheckRow")
      .def_readonly("min_z_over_d", &Lemma2Row::min_z_over_d)
      .def_readonly("max_z_over_d", &Lemma2Row::max_z_over_d)
      .def_readonly("min_y_over_d", &Lemma2Row::min_y_over_d)
      .def_readonly("max_y_over_d", &Lemma2Row::max_y_over_d)
      .def_readonly("z_le_y", &Lemma2Row::z_le_y)
      .def_readonly("z_positive", &Lemma2Row::z_positive)
      .def_readonly("c0_bound_holds", &Lemma2Row::c0_bound_holds)
      .def_readonly("c1_bound_holds", &Lemma2Row::c1_bound_holds)
      .def_readonly("squeeze_holds", &Lemma2Row::squeeze_holds);
  py::class_<Lemma2Report>(m, "BarrierCheckReport")
      .def_readonly("rows", &Lemma2Report::rows)
      .def_readonly("pass_", &Lemma2Report::pass);
  m.def("verify_barriers", &verify_lemma2, py::arg("barrier_set"));
  m.def("barrier_report_text", &barrier_report_text, py::arg("barrier_set"));

  py::class_<CalibrationSample>(m, "CalibrationSample")
      .def_readonly("id", &CalibrationSample::id)
      .def_readonly("grad_sup", &CalibrationSample::grad_sup)
      .def_readonly("load_norm", &CalibrationSample::load_norm)
      .def_readonly("ratio", &CalibrationSample::ratio)
      .def_readonly("ok", &CalibrationSample::ok)
      .def_readonly("note", &CalibrationSample::note);
  py::class_<CalibrationReport>(m, "CalibrationReport")
      .def_readonly("k_p", &CalibrationReport::k_p)
      .def_readonly("safety", &CalibrationReport::safety)
      .def_readonly("hardy_constant", &CalibrationReport::hardy_constant)
      .def_readonly("samples", &CalibrationReport::samples);
  m.def("default_calibration_loads", &default_calibration_loads,
        py::arg("count"), py::arg("seed"), py::arg("mu_min") = -0.3);
  m.def(
      "calibrate_kp",
      [](MeshPtr mesh, double p, const std::vector<Load>& problems, double r,
         double safety, const PlapConfig& cfg) {
        return calibrate_kp(mesh, p, problems, r, safety, cfg);
      },
      py::arg("mesh"), py::arg("p"), py::arg("problems"), py::arg("r"),
      py::arg("safety") = 1.5, py::arg("config") = PlapConfig());
  m.def("check_hardy", &check_hardy, py::arg("p"), py::arg("mu"),
        py::arg("u"));

  py::class_<Rectangle>(m, "Rectangle")
      .def_readonly("C", &Rectangle::C)
      .def_readonly("lower", &Rectangle::lower)
      .def_readonly("upper", &Rectangle::upper)
      .def_readonly("grad_cap", &Rectangle::grad_cap);
  m.def("make_rectangle", &make_rectangle, py::arg("barrier_set"),
        py::arg("C"));
  m.def(
      "closure_holds",
      [](const SystemSpec& spec, const BarrierSet& bs, double k_grad,
         double C) { return closure_holds(spec, bs, k_grad, C); },
      py::arg("spec"), py::arg("barrier_set"), py::arg("k_grad"),
      py::arg("C"));
  m.def("select_C", &select_C, py::arg("spec"), py::arg("barrier_set"),
        py::arg("k_grad"));

  py::class_<MembershipReport>(m, "MembershipReport")
      .def_readonly("in_rectangle", &MembershipReport::in_rectangle)
      .def_readonly("grad_within_cap", &MembershipReport::grad_within_cap)
      .def_readonly("worst_lower", &MembershipReport::worst_lower)
      .def_readonly("worst_upper", &MembershipReport::worst_upper)
      .def_readonly("worst_grad", &MembershipReport::worst_grad);
  m.def("membership", &membership, py::arg("rectangle"), py::arg("u"),
        py::arg("v"));
  m.def(
      "apply_T",
      [](const SystemSpec& spec, MeshPtr mesh, const ScalarField& w1,
         const ScalarField& w2, const PlapConfig& cfg) {
        return apply_T(spec, mesh, w1, w2, cfg);
      },
      py::arg("spec"), py::arg("mesh"), py::arg("w1"), py::arg("w2"),
      py::arg("config") = PlapConfig());

  py::enum_<FixpointStatus>(m, "FixpointStatus")
      .value("running", FixpointStatus::running)
      .value("converged", FixpointStatus::converged)
      .value("iteration_limit", FixpointStatus::iteration_limit)
      .value("left_set", FixpointStatus::left_set);
  py::class_<FixpointState>(m, "FixpointState")
      .def_readonly("iterate", &FixpointState::iterate)
      .def_readonly("k", &FixpointState::k)
      .def_readonly("residual_history", &FixpointState::residual_history)
      .def_readonly("clamp_history", &FixpointState::clamp_history)
      .def_readonly("membership_history", &FixpointState::membership_history)
      .def_readonly("in_rectangle", &FixpointState::in_rectangle)
      .def_readonly("grad_within_cap", &FixpointState::grad_within_cap)
      .def_readonly("certificate", &FixpointState::certificate)
      .def_readonly("status", &FixpointState::status);
  m.def(
      "iterate",
      [](const SystemSpec& spec, MeshPtr mesh, const Rectangle& rect,
         double damping, double tol, int max_iter, const PlapConfig& cfg) {
        return iterate(spec, mesh, rect, damping, tol, max_iter, cfg);
      },
      py::arg("spec"), py::arg("mesh"), py::arg("rectangle"),
      py::arg("damping") = 0.5, py::arg("tol") = 1e-6,
      py::arg("max_iter") = 200, py::arg("config") = PlapConfig());
}
