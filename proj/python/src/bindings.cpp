#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "linctl/cli.hpp"
#include "linctl/lqr.hpp"
#include "linctl/lti.hpp"
#include "linctl/nonlinear.hpp"
#include "linctl/observability.hpp"
#include "linctl/reachability.hpp"
#include "linctl/stability.hpp"
#include "linctl/synthesis.hpp"

namespace py = pybind11;
using namespace linctl;

namespace {

py::dict trajectory_dict(const Trajectory& traj) {
  py::dict d;
  d["grid"] = traj.grid;
  d["states"] = traj.states;
  d["controls"] = traj.controls;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Linear control toolkit: controllability, observability, stabilization, LQR";

  auto base = py::register_exception<Error>(m, "LinctlError");
  auto input = py::register_exception<InputError>(m, "InputError", base.ptr());
  py::register_exception<DimensionError>(m, "DimensionError", input.ptr());
  py::register_exception<ParseError>(m, "ParseError", input.ptr());
  auto pre = py::register_exception<PreconditionError>(m, "PreconditionError", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<NoCertificateError>(m, "NoCertificateError", base.ptr());
  py::register_exception<FiniteCostViolationError>(m, "FiniteCostViolationError", base.ptr());
  py::register_exception<LinearTestInapplicableError>(m, "LinearTestInapplicableError", base.ptr());
  py::register_exception<UncontrollableIntervalError>(m, "UncontrollableIntervalError", base.ptr());
  auto num = py::register_exception<NumericalError>(m, "NumericalError", base.ptr());
  py::register_exception<ConditioningError>(m, "ConditioningError", base.ptr());
  py::register_exception<ConvergenceError>(m, "ConvergenceError", base.ptr());
  py::register_exception<EscapeTimeError>(m, "EscapeTimeError", base.ptr());
  py::register_exception<DivergenceError>(m, "DivergenceError", base.ptr());
  py::register_exception<SingularEquationError>(m, "SingularEquationError", base.ptr());
  py::register_exception<NumericalInconsistencyError>(m, "NumericalInconsistencyError", base.ptr());
  py::register_exception<EvaluationError>(m, "EvaluationError", base.ptr());
  (void)pre;
  (void)num;

  py::class_<ToleranceConfig>(m, "ToleranceConfig")
      .def(py::init<>())
      .def_readwrite("rank_rtol", &ToleranceConfig::rank_rtol)
      .def_readwrite("residual_tol", &ToleranceConfig::residual_tol)
      .def_readwrite("ode_step", &ToleranceConfig::ode_step)
      .def_readwrite("fixed_point_tol", &ToleranceConfig::fixed_point_tol)
      .def_readwrite("max_iter", &ToleranceConfig::max_iter)
      .def_readwrite("gramian_floor_factor", &ToleranceConfig::gramian_floor_factor);

  py::class_<LtiSystem>(m, "LtiSystem")
      .def(py::init<Matrix, Matrix, std::optional<Matrix>>(), py::arg("A"), py::arg("B"),
           py::arg("C") = py::none())
      .def_property_readonly("A", &LtiSystem::A)
      .def_property_readonly("B", &LtiSystem::B)
      .def_property_readonly("C", &LtiSystem::C)
      .def_property_readonly("n", &LtiSystem::n)
      .def_property_readonly("p", &LtiSystem::p)
      .def_property_readonly("m", &LtiSystem::m);

  py::class_<ControllabilityReport>(m, "ControllabilityReport")
      .def_readonly("kalman_matrix", &ControllabilityReport::kalman_matrix)
      .def_readonly("rank", &ControllabilityReport::rank)
      .def_readonly("controllable", &ControllabilityReport::controllable)
      .def_readonly("reachable_basis", &ControllabilityReport::reachable_basis)
      .def_readonly("unreachable_basis", &ControllabilityReport::unreachable_basis);

  py::class_<GramianReport>(m, "GramianReport")
      .def_readonly("gramian", &GramianReport::gramian)
      .def_readonly("min_eigenvalue", &GramianReport::min_eigenvalue)
      .def_readonly("max_eigenvalue", &GramianReport::max_eigenvalue)
      .def_readonly("invertible", &GramianReport::invertible);

  m.def("kalman_test", &kalman_test, py::arg("sys"), py::arg("cfg") = ToleranceConfig{});
  m.def("hautus_test", [](const LtiSystem& sys, const ToleranceConfig& cfg) {
    const HautusReport r = hautus_test(sys, cfg);
    py::list records;
    for (const HautusRecord& rec : r.records) {
      records.append(py::make_tuple(rec.eigenvalue, rec.rank, rec.pass));
    }
    return py::make_tuple(r.pass, records);
  }, py::arg("sys"), py::arg("cfg") = ToleranceConfig{});
  m.def("is_stabilizable", &is_stabilizable, py::arg("A"), py::arg("B"), py::arg("cfg") = ToleranceConfig{});
  m.def("controllability_gramian",
        py::overload_cast<const LtiSystem&, double, double, const ToleranceConfig&>(&controllability_gramian),
        py::arg("sys"), py::arg("t0"), py::arg("t1"), py::arg("cfg") = ToleranceConfig{});
  m.def("min_energy_control", [](const LtiSystem& sys, double t0, double t1, const Vector& x0, const Vector& x1,
                                 int points, const ToleranceConfig& cfg) {
    const MinEnergyControl mec = min_energy_control(sys, t0, t1, x0, x1, cfg);
    const Trajectory traj = simulate(sys, x0, mec.control, uniform_grid(t0, t1, points), cfg);
    py::dict d = trajectory_dict(traj);
    d["cost"] = mec.predicted_cost;
    d["z"] = mec.z;
    return d;
  }, py::arg("sys"), py::arg("t0"), py::arg("t1"), py::arg("x0"), py::arg("x1"), py::arg("points") = 101,
     py::arg("cfg") = ToleranceConfig{});

  m.def("observability_test", [](const Matrix& A, const Matrix& C, double horizon, const ToleranceConfig& cfg) {
    const ObservabilityReport r = observability_test(A, C, horizon, cfg);
    return py::make_tuple(r.observable, r.rank);
  }, py::arg("A"), py::arg("C"), py::arg("horizon") = 1.0, py::arg("cfg") = ToleranceConfig{});
  m.def("detectability_test", [](const Matrix& A, const Matrix& C, const ToleranceConfig& cfg) {
    const DetectabilityReport r = detectability_test(A, C, cfg);
    return py::make_tuple(r.detectable, r.witness_L);
  }, py::arg("A"), py::arg("C"), py::arg("cfg") = ToleranceConfig{});

  m.def("spectral_abscissa", &spectral_abscissa, py::arg("A"));
  m.def("eigenvalues", &eigenvalues, py::arg("A"));
  m.def("expm", &expm, py::arg("A"));
  m.def("lyapunov_certificate", [](const Matrix& A, const Matrix& R, const ToleranceConfig& cfg) {
    return *lyapunov_certificate(A, R, cfg).lyapunov_Q;
  }, py::arg("A"), py::arg("R"), py::arg("cfg") = ToleranceConfig{});

  m.def("characteristic_polynomial", [](const Matrix& A) { return characteristic_polynomial(A).coefficients(); },
        py::arg("A"));
  m.def("pole_place", [](const Matrix& A, const Matrix& B, const ComplexList& roots) {
    return pole_place(A, B, MonicPolynomial::from_roots(roots)).F;
  }, py::arg("A"), py::arg("B"), py::arg("roots"));
  m.def("design_observer", [](const Matrix& A, const Matrix& C, const ComplexList& roots) {
    return design_observer(A, C, MonicPolynomial::from_roots(roots)).L;
  }, py::arg("A"), py::arg("C"), py::arg("roots"));
  m.def("gramian_stabilizer", [](const Matrix& A, const Matrix& B, double lambda) {
    const GramianStabilizer g = gramian_stabilizer(A, B, lambda);
    py::dict d;
    d["Q"] = g.Q;
    d["P"] = g.P;
    d["K"] = g.K;
    d["closed_loop_abscissa"] = g.closed_loop_abscissa;
    return d;
  }, py::arg("A"), py::arg("B"), py::arg("lambda_"));

  m.def("riccati_finite", [](const LtiSystem& sys, const Matrix& P0, double horizon, const ToleranceConfig& cfg) {
    const RiccatiSolution sol = riccati_finite(LqrProblem(sys, P0, horizon), cfg);
    return py::make_tuple(sol.grid(), sol.samples());
  }, py::arg("sys"), py::arg("P0"), py::arg("horizon"), py::arg("cfg") = ToleranceConfig{});
  m.def("lqr_cost", [](const LtiSystem& sys, const Matrix& P0, double horizon, const Vector& xi) {
    const LqrProblem prob(sys, P0, horizon);
    return lqr_trajectory(prob, riccati_finite(prob), xi).cost;
  }, py::arg("sys"), py::arg("P0"), py::arg("horizon"), py::arg("xi"));
  m.def("are_solve", [](const LtiSystem& sys, const ToleranceConfig& cfg) {
    const AreSolution s = are_solve(sys, cfg);
    py::dict d;
    d["P"] = s.P;
    d["residual"] = s.residual;
    d["closed_loop_abscissa"] = s.closed_loop_abscissa;
    return d;
  }, py::arg("sys"), py::arg("cfg") = ToleranceConfig{});

  m.def("steer_pendulum", [](const Vector& x0, const Vector& x1, double t1, double mass, double gravity) {
    const VectorField vf = pendulum_field(mass, gravity);
    Vector xe(2);
    xe << 3.141592653589793, 0.0;
    const ReferenceTrajectory ref = ReferenceTrajectory::equilibrium(vf, xe, Vector::Zero(1), 0.0, t1);
    const SteeringResult r = steer_nonlinear(vf, ref, x0, x1);
    py::dict d = trajectory_dict(r.trajectory);
    d["iterations"] = r.iterations;
    d["terminal_error"] = r.terminal_error;
    d["error_history"] = r.error_history;
    return d;
  }, py::arg("x0"), py::arg("x1"), py::arg("t1") = 1.0, py::arg("mass") = 1.0, py::arg("gravity") = 1.0);

  m.def("run_cli", [](std::vector<std::string> args) {
    args.insert(args.begin(), "linctl");
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return py::make_tuple(code, out.str(), err.str());
  }, py::arg("args"));
}
