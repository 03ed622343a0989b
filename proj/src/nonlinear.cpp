#include "linctl/nonlinear.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include "linctl/reachability.hpp"

namespace linctl {

namespace {

constexpr double kRelativeStep = 1e-6;
constexpr double kReferenceTol = 1e-6;

double fd_step(double value) { return kRelativeStep * std::max(1.0, std::abs(value)); }

}  // namespace

VectorField::VectorField(int n, int p, FieldFunction f, FieldJacobian fx, FieldJacobian fu)
    : n_(n), p_(p), f_(std::move(f)), fx_(std::move(fx)), fu_(std::move(fu)) {
  if (n <= 0 || p < 0) throw DimensionError("vector field dimensions must be positive");
  if (!f_) throw InputError("vector field callable is empty");
}

Vector VectorField::operator()(const Vector& x, const Vector& u) const {
  if (x.size() != n_ || u.size() != p_) throw DimensionError("vector field argument size mismatch");
  Vector value = f_(x, u);
  if (value.size() != n_ || !value.allFinite()) {
    throw EvaluationError("vector field returned a non-finite or mis-sized value");
  }
  return value;
}

Matrix VectorField::fx(const Vector& x, const Vector& u) const {
  if (fx_) {
    Matrix J = fx_(x, u);
    if (J.rows() != n_ || J.cols() != n_ || !J.allFinite()) {
      throw EvaluationError("state partial returned a non-finite or mis-sized value");
    }
    return J;
  }
  Matrix J(n_, n_);
  for (int i = 0; i < n_; ++i) {
    const double h = fd_step(x(i));
    Vector xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    J.col(i) = ((*this)(xp, u) - (*this)(xm, u)) / (xp(i) - xm(i));
  }
  return J;
}

Matrix VectorField::fu(const Vector& x, const Vector& u) const {
  if (fu_) {
    Matrix J = fu_(x, u);
    if (J.rows() != n_ || J.cols() != p_ || !J.allFinite()) {
      throw EvaluationError("control partial returned a non-finite or mis-sized value");
    }
    return J;
  }
  Matrix J(n_, p_);
  for (int j = 0; j < p_; ++j) {
    const double h = fd_step(u(j));
    Vector up = u, um = u;
    up(j) += h;
    um(j) -= h;
    J.col(j) = ((*this)(x, up) - (*this)(x, um)) / (up(j) - um(j));
  }
  return J;
}

ReferenceTrajectory::ReferenceTrajectory(const VectorField& vf, double t0, double t1,
                                         VectorFunction xbar, VectorFunction ubar)
    : t0_(t0), t1_(t1), xbar_(std::move(xbar)), ubar_(std::move(ubar)) {
  if (!(t0 < t1)) throw DomainError("reference interval must satisfy t0 < t1");
  if (!xbar_ || !ubar_) throw InputError("reference callables are empty");
  constexpr int kChecks = 200;
  const double span = t1 - t0;
  const double h = 1e-5 * span;
  for (int k = 0; k < kChecks; ++k) {
    const double t = t0 + (k + 0.5) * span / kChecks;
    const Vector derivative = (xbar_(t + h) - xbar_(t - h)) / (2.0 * h);
    const Vector x = xbar_(t);
    if (x.size() != vf.n()) throw DimensionError("reference state has the wrong dimension");
    const double residual = (derivative - vf(x, ubar_(t))).norm();
    if (!(residual <= kReferenceTol)) {
      throw PreconditionError("reference does not solve the dynamics (residual " +
                              std::to_string(residual) + " at t = " + std::to_string(t) + ")");
    }
  }
}

ReferenceTrajectory ReferenceTrajectory::equilibrium(const VectorField& vf, const Vector& xe,
                                                     const Vector& ue, double t0, double t1) {
  if (xe.size() != vf.n() || ue.size() != vf.p()) throw DimensionError("equilibrium size mismatch");
  if (!(vf(xe, ue).norm() <= kReferenceTol)) {
    throw PreconditionError("(x_e, u_e) is not an equilibrium of the vector field");
  }
  return ReferenceTrajectory(
      vf, t0, t1, [xe](double) { return xe; }, [ue](double) { return ue; });
}

LtvSystem linearize_along(const VectorField& vf, const ReferenceTrajectory& ref) {
  return LtvSystem(
      ref.t0(), ref.t1(),
      [vf, ref](double t) { return vf.fx(ref.xbar(t), ref.ubar(t)); },
      [vf, ref](double t) { return vf.fu(ref.xbar(t), ref.ubar(t)); });
}

SteeringResult steer_nonlinear(const VectorField& vf, const ReferenceTrajectory& ref,
                               const Vector& x0, const Vector& x1, const ToleranceConfig& cfg,
                               const SteeringOptions& opts) {
  const int n = vf.n();
  if (x0.size() != n || x1.size() != n) throw DimensionError("steering endpoints must have size n");
  const double t0 = ref.t0();
  const double t1 = ref.t1();
  const double delta = opts.trust_radius;
  if (!(delta > 0.0)) throw InputError("trust radius must be positive");
  const Vector dx0 = x0 - ref.xbar(t0);
  if (dx0.norm() > delta || (x1 - ref.xbar(t1)).norm() > delta) {
    throw PreconditionError("endpoints lie outside the trust radius around the reference");
  }

  const LtvSystem lin = linearize_along(vf, ref);
  auto phi = std::make_shared<const TerminalResolvent>(lin, t0, t1, cfg);
  const GramianReport gramian = controllability_gramian(lin, *phi, cfg);
  if (!gramian.invertible) {
    throw LinearTestInapplicableError("linearization is not controllable on the interval");
  }
  const Matrix free_flight = phi->values().front();
  const std::vector<double>& grid = phi->nodes();

  const auto make_du = [lin, phi](const Vector& z) {
    return [lin, phi, z](double s) -> Vector {
      return lin.B(s).transpose() * (phi->at(s).transpose() * z);
    };
  };

  const auto run = [&](const std::function<Vector(double)>& du, Trajectory& traj, double& du_max) {
    const auto rhs = [&](double s, const Vector& x) -> Vector {
      return vf(x, ref.ubar(s) + du(s));
    };
    traj.grid = grid;
    traj.states.assign(1, x0);
    traj.controls.clear();
    du_max = 0.0;
    Vector x = x0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      if (k > 0) {
        x = rk4_integrate(rhs, grid[k - 1], grid[k], x, cfg.ode_step);
        traj.states.push_back(x);
      }
      const Vector dk = du(grid[k]);
      du_max = std::max(du_max, dk.cwiseAbs().maxCoeff());
      traj.controls.push_back(ref.ubar(grid[k]) + dk);
    }
    return x;
  };

  Vector target = x1;
  std::vector<Vector> iterates;
  std::vector<double> errors;
  Trajectory traj;
  Vector z;
  double du_max = 0.0;
  double error = 0.0;
  int k = 0;
  bool converged = false;
  while (k < cfg.max_iter) {
    ++k;
    iterates.push_back(target);
    z = gramian_solve(gramian, (target - ref.xbar(t1)) - free_flight * dx0);
    Vector terminal;
    try {
      terminal = run(make_du(z), traj, du_max);
    } catch (const EvaluationError&) {
      throw DivergenceError("nonlinear simulation blew up", iterates, errors);
    }
    error = (terminal - x1).norm();
    errors.push_back(error);
    if (error <= cfg.fixed_point_tol) {
      converged = true;
      break;
    }
    if (k == cfg.max_iter) break;
    target = target - terminal + x1;
    if (!target.allFinite() || (target - x1).norm() > 10.0 * delta) {
      iterates.push_back(target);
      throw DivergenceError("fixed-point iterate left the trust ball", iterates, errors);
    }
  }

  const auto du = make_du(z);
  ControlSignal control(t0, t1, vf.p(), [ref, du](double s) -> Vector { return ref.ubar(s) + du(s); });
  SteeringResult result{std::move(traj), std::move(control), k, error, converged, std::move(errors),
                        du_max};
  return result;
}

VectorField pendulum_field(double m, double g) {
  if (!(m > 0.0)) throw InputError("pendulum mass must be positive");
  return VectorField(
      2, 1,
      [m, g](const Vector& x, const Vector& u) {
        Vector f(2);
        f << x(1), -g * std::sin(x(0)) + u(0) / m;
        return f;
      },
      [g](const Vector& x, const Vector&) {
        Matrix J(2, 2);
        J << 0.0, 1.0, -g * std::cos(x(0)), 0.0;
        return J;
      },
      [m](const Vector&, const Vector&) {
        Matrix J(2, 1);
        J << 0.0, 1.0 / m;
        return J;
      });
}

VectorField double_integrator_field() {
  return VectorField(
      2, 1,
      [](const Vector& x, const Vector& u) {
        Vector f(2);
        f << x(1), u(0);
        return f;
      },
      [](const Vector&, const Vector&) {
        Matrix J(2, 2);
        J << 0.0, 1.0, 0.0, 0.0;
        return J;
      },
      [](const Vector&, const Vector&) {
        Matrix J(2, 1);
        J << 0.0, 1.0;
        return J;
      });
}

VectorField polynomial_field(int n, int p, std::vector<PolynomialTerm> terms) {
  for (PolynomialTerm& term : terms) {
    if (term.component < 0 || term.component >= n) throw InputError("polynomial term component out of range");
    if (term.x_powers.empty()) term.x_powers.assign(n, 0);
    if (term.u_powers.empty()) term.u_powers.assign(p, 0);
    if (static_cast<int>(term.x_powers.size()) != n || static_cast<int>(term.u_powers.size()) != p) {
      throw DimensionError("polynomial term exponent lists have the wrong length");
    }
    for (int a : term.x_powers) if (a < 0) throw InputError("negative exponent in polynomial term");
    for (int b : term.u_powers) if (b < 0) throw InputError("negative exponent in polynomial term");
    if (!std::isfinite(term.coeff)) throw InputError("polynomial coefficient must be finite");
  }
  return VectorField(n, p, [n, terms](const Vector& x, const Vector& u) {
    Vector f = Vector::Zero(n);
    for (const PolynomialTerm& term : terms) {
      double value = term.coeff;
      for (std::size_t i = 0; i < term.x_powers.size(); ++i) value *= std::pow(x(i), term.x_powers[i]);
      for (std::size_t j = 0; j < term.u_powers.size(); ++j) value *= std::pow(u(j), term.u_powers[j]);
      f(term.component) += value;
    }
    return f;
  });
}

}  // namespace linctl
