#pragma once

#include <functional>
#include <vector>

#include "linctl/errors.hpp"
#include "linctl/numkernel.hpp"
#include "linctl/systems.hpp"

namespace linctl {

using FieldFunction = std::function<Vector(const Vector& x, const Vector& u)>;
using FieldJacobian = std::function<Matrix(const Vector& x, const Vector& u)>;

/// Control system x' = f(x, u). Missing partials are replaced by central
/// differences with relative step 1e-6.
class VectorField {
 public:
  VectorField(int n, int p, FieldFunction f, FieldJacobian fx = {}, FieldJacobian fu = {});

  int n() const { return n_; }
  int p() const { return p_; }

  /// Throws EvaluationError on non-finite output.
  Vector operator()(const Vector& x, const Vector& u) const;
  Matrix fx(const Vector& x, const Vector& u) const;
  Matrix fu(const Vector& x, const Vector& u) const;

 private:
  int n_;
  int p_;
  FieldFunction f_;
  FieldJacobian fx_;
  FieldJacobian fu_;
};

/// Reference pair (xbar, ubar) on [t0, t1] solving xbar' = f(xbar, ubar).
class ReferenceTrajectory {
 public:
  /// Checks the residual ||xbar' - f(xbar, ubar)|| <= 1e-6 on a verification grid.
  ReferenceTrajectory(const VectorField& vf, double t0, double t1, VectorFunction xbar,
                      VectorFunction ubar);

  /// Constant reference at an equilibrium; requires ||f(xe, ue)|| <= 1e-6.
  static ReferenceTrajectory equilibrium(const VectorField& vf, const Vector& xe, const Vector& ue,
                                         double t0, double t1);

  double t0() const { return t0_; }
  double t1() const { return t1_; }
  Vector xbar(double t) const { return xbar_(t); }
  Vector ubar(double t) const { return ubar_(t); }

 private:
  double t0_;
  double t1_;
  VectorFunction xbar_;
  VectorFunction ubar_;
};

/// A(t) = f_x(xbar(t), ubar(t)), B(t) = f_u(xbar(t), ubar(t)).
LtvSystem linearize_along(const VectorField& vf, const ReferenceTrajectory& ref);

struct SteeringOptions {
  double trust_radius = 0.1;  // delta; divergence beyond 10 delta
};

struct SteeringResult {
  Trajectory trajectory;  // nonlinear states and controls on the integration grid
  ControlSignal control;  // ubar + delta u of the last iterate
  int iterations = 0;
  double terminal_error = 0.0;
  bool converged = false;
  std::vector<double> error_history;
  double max_control_deviation = 0.0;  // sup-norm of delta u on the grid
};

/// The iterate left the trust ball; the history of iterates is kept.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& message, std::vector<Vector> iterates,
                  std::vector<double> errors)
      : Error("DivergenceError", ErrorCategory::kNumerical, message),
        iterates_(std::move(iterates)),
        errors_(std::move(errors)) {}
  const std::vector<Vector>& iterates() const noexcept { return iterates_; }
  const std::vector<double>& errors() const noexcept { return errors_; }

 private:
  std::vector<Vector> iterates_;
  std::vector<double> errors_;
};

/// Steers x0 at t0 to x1 at t1 near the reference with the fixed-point map
/// phi <- phi - H(phi) + x1, H being the nonlinear terminal state under
/// ubar + du(phi) and du the minimum-energy control of the linearization.
SteeringResult steer_nonlinear(const VectorField& vf, const ReferenceTrajectory& ref,
                               const Vector& x0, const Vector& x1, const ToleranceConfig& cfg = {},
                               const SteeringOptions& opts = {});

/// m theta'' + m g sin(theta) = u as (theta, theta').
VectorField pendulum_field(double m = 1.0, double g = 1.0);

/// x1' = x2, x2' = u.
VectorField double_integrator_field();

/// One monomial coeff * prod x_i^a_i * prod u_j^b_j added to component `component`.
struct PolynomialTerm {
  int component = 0;
  double coeff = 0.0;
  std::vector<int> x_powers;  // length n, or empty for all zero
  std::vector<int> u_powers;  // length p, or empty for all zero
};

VectorField polynomial_field(int n, int p, std::vector<PolynomialTerm> terms);

}  // namespace linctl
