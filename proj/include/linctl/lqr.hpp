#pragma once

#include <span>
#include <vector>

#include "linctl/numkernel.hpp"
#include "linctl/systems.hpp"

namespace linctl {

/// Minimise  int_0^T ||C x||^2 + ||u||^2 ds + <P0 x(T), x(T)>.
struct LqrProblem {
  LqrProblem(LtiSystem sys, Matrix P0, double horizon);

  LtiSystem sys;
  Matrix P0;
  double horizon;
};

/// Right-hand side of P' = -(P A + A^T P - P B B^T P + C^T C).
Matrix riccati_rhs(const LtiSystem& sys, const Matrix& P);

/// Residual A^T P + P A - P B B^T P + C^T C.
Matrix are_residual(const LtiSystem& sys, const Matrix& P);

/// Samples of P_T(t) on an increasing grid over [0, T].
class RiccatiSolution {
 public:
  RiccatiSolution(LtiSystem sys, std::vector<double> grid, std::vector<Matrix> P);

  const std::vector<double>& grid() const { return grid_; }
  const std::vector<Matrix>& samples() const { return P_; }
  double horizon() const { return grid_.back(); }
  bool terminal_matches_P0 = false;
  double max_residual = 0.0;  // central-difference residual of the Riccati equation

  /// Cubic Hermite interpolation between samples.
  Matrix at(double t) const;

 private:
  LtiSystem sys_;
  std::vector<double> grid_;
  std::vector<Matrix> P_;
  std::vector<Matrix> slopes_;
};

/// Backward RK4 from P(T) = P0 with step min(ode_step, T / density).
RiccatiSolution riccati_finite(const LqrProblem& prob, const ToleranceConfig& cfg = {},
                               int density = 2000);

struct LqrTrajectory {
  Trajectory trajectory;        // optimal state and control -B^T P x
  std::vector<Vector> adjoint;  // P_T(t) x(t)
  double cost = 0.0;
};

/// Closed-loop trajectory from x(0) = xi. An empty grid means the solution grid.
LqrTrajectory lqr_trajectory(const LqrProblem& prob, const RiccatiSolution& sol, const Vector& xi,
                             std::span<const double> grid = {}, const ToleranceConfig& cfg = {});

/// Simpson quadrature of the running cost plus the terminal term.
double evaluate_cost(const LqrProblem& prob, const Trajectory& traj);

struct AreSolution {
  Matrix P;
  double residual = 0.0;  // ||A^T P + P A - P B B^T P + C^T C||_F
  double closed_loop_abscissa = 0.0;
  double horizon_used = 0.0;
  bool from_identity = false;  // stabilizing solution reached from P0 = I
};

/// Infinite-horizon value matrix as the limit of P_T(0) under horizon
/// doubling. Throws FiniteCostViolationError if (A, B) is not stabilizable.
AreSolution are_solve(const LtiSystem& sys, const ToleranceConfig& cfg = {},
                      double initial_horizon = 1.0);

}  // namespace linctl
