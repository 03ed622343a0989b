#include "linctl/lqr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "linctl/reachability.hpp"
#include "linctl/stability.hpp"

namespace linctl {

namespace {

constexpr double kEscapeNorm = 1e12;
constexpr double kHorizonCap = 1048576.0;  // 2^20
constexpr double kStagnationHorizon = 1024.0;
constexpr double kEps = std::numeric_limits<double>::epsilon();

void symmetrize(Matrix& P) { P = (0.5 * (P + P.transpose())).eval(); }

// Forward-in-horizon generator: dP/dtau = P A + A^T P - P B B^T P + C^T C.
struct HorizonFlow {
  Matrix A, At, BBt, CtC;

  explicit HorizonFlow(const LtiSystem& sys)
      : A(sys.A()),
        At(sys.A().transpose()),
        BBt(sys.B() * sys.B().transpose()),
        CtC(sys.C().transpose() * sys.C()) {}

  Matrix operator()(double, const Matrix& P) const {
    return P * A + At * P - P * BBt * P + CtC;
  }
};

}  // namespace

LqrProblem::LqrProblem(LtiSystem sys_in, Matrix P0_in, double horizon_in)
    : sys(std::move(sys_in)), P0(std::move(P0_in)), horizon(horizon_in) {
  if (P0.rows() != sys.n() || P0.cols() != sys.n()) {
    throw DimensionError("terminal weight P0 must be n x n");
  }
  require_finite(P0, "P0");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw DomainError("horizon must be positive and finite");
  if ((P0 - P0.transpose()).cwiseAbs().maxCoeff() > 1e-10) {
    throw PreconditionError("terminal weight P0 is not symmetric");
  }
  if (min_symmetric_eigenvalue(P0) < -1e-10 * (1.0 + P0.norm())) {
    throw PreconditionError("terminal weight P0 is not positive semidefinite");
  }
}

Matrix riccati_rhs(const LtiSystem& sys, const Matrix& P) { return -HorizonFlow(sys)(0.0, P); }

Matrix are_residual(const LtiSystem& sys, const Matrix& P) { return HorizonFlow(sys)(0.0, P); }

RiccatiSolution::RiccatiSolution(LtiSystem sys, std::vector<double> grid, std::vector<Matrix> P)
    : sys_(std::move(sys)), grid_(std::move(grid)), P_(std::move(P)) {
  if (grid_.size() < 2 || grid_.size() != P_.size()) {
    throw InputError("Riccati samples must match a grid of at least two points");
  }
  slopes_.reserve(P_.size());
  for (const Matrix& Pk : P_) slopes_.push_back(riccati_rhs(sys_, Pk));
}

Matrix RiccatiSolution::at(double t) const {
  const double slack = 1e-12 * std::max(1.0, horizon());
  if (t < grid_.front() - slack || t > grid_.back() + slack) {
    throw DomainError("time " + std::to_string(t) + " outside the Riccati horizon");
  }
  t = std::clamp(t, grid_.front(), grid_.back());
  auto it = std::upper_bound(grid_.begin(), grid_.end(), t);
  std::size_t k = it == grid_.begin() ? 0 : static_cast<std::size_t>(it - grid_.begin()) - 1;
  if (k + 1 >= grid_.size()) k = grid_.size() - 2;
  const double h = grid_[k + 1] - grid_[k];
  const double s = (t - grid_[k]) / h;
  const double s2 = s * s;
  const double s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * P_[k] + (s3 - 2 * s2 + s) * h * slopes_[k] +
         (-2 * s3 + 3 * s2) * P_[k + 1] + (s3 - s2) * h * slopes_[k + 1];
}

RiccatiSolution riccati_finite(const LqrProblem& prob, const ToleranceConfig& cfg, int density) {
  if (density < 2) throw InputError("grid density must be at least 2");
  const double T = prob.horizon;
  const double max_step = std::min(cfg.ode_step, T / density);
  const int steps = std::max(2, static_cast<int>(std::ceil(T / max_step - 1e-9)));
  const double h = T / steps;

  std::vector<double> grid(steps + 1);
  for (int k = 0; k <= steps; ++k) grid[k] = k * h;
  grid[steps] = T;

  const LtiSystem& sys = prob.sys;
  const auto rhs = [&sys](double, const Matrix& P) -> Matrix { return riccati_rhs(sys, P); };
  std::vector<Matrix> P(steps + 1);
  P[steps] = prob.P0;
  for (int k = steps - 1; k >= 0; --k) {
    Matrix next = rk4_step(rhs, grid[k + 1], P[k + 1], -h);
    symmetrize(next);
    const double norm = next.norm();
    if (!std::isfinite(norm) || norm > kEscapeNorm) {
      throw EscapeTimeError("Riccati solution blew up at t = " + std::to_string(grid[k]));
    }
    if (min_symmetric_eigenvalue(next) < -1e-9 * (1.0 + norm)) {
      throw NumericalError("Riccati solution lost positive semidefiniteness at t = " +
                           std::to_string(grid[k]));
    }
    P[k] = std::move(next);
  }

  RiccatiSolution sol(sys, grid, P);
  sol.terminal_matches_P0 = (P[steps] - prob.P0).norm() == 0.0;
  double worst = 0.0;
  for (int k = 1; k < steps; ++k) {
    const Matrix fd = (P[k + 1] - P[k - 1]) / (2.0 * h);
    worst = std::max(worst, (fd - riccati_rhs(sys, P[k])).norm());
  }
  sol.max_residual = worst;
  return sol;
}

LqrTrajectory lqr_trajectory(const LqrProblem& prob, const RiccatiSolution& sol, const Vector& xi,
                             std::span<const double> grid, const ToleranceConfig& cfg) {
  const LtiSystem& sys = prob.sys;
  if (xi.size() != sys.n()) throw DimensionError("initial state must have dimension n");
  std::vector<double> g = grid.empty() ? sol.grid() : std::vector<double>(grid.begin(), grid.end());
  const double T = sol.horizon();
  const double slack = 1e-12 * std::max(1.0, T);
  if (std::abs(T - prob.horizon) > slack) throw DomainError("Riccati solution horizon differs from the problem");
  if (g.size() < 2 || std::abs(g.front()) > slack || std::abs(g.back() - T) > slack) {
    throw DomainError("trajectory grid must span [0, T] of the Riccati solution");
  }
  for (std::size_t k = 1; k < g.size(); ++k) {
    if (!(g[k] > g[k - 1])) throw DomainError("trajectory grid must be strictly increasing");
  }

  const Matrix& A = sys.A();
  const Matrix BBt = sys.B() * sys.B().transpose();
  const auto rhs = [&](double t, const Vector& x) -> Vector { return A * x - BBt * (sol.at(t) * x); };

  LqrTrajectory out;
  out.trajectory.grid = g;
  Vector x = xi;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (k > 0) x = rk4_integrate(rhs, g[k - 1], g[k], x, cfg.ode_step);
    const Matrix Pk = sol.at(g[k]);
    const Vector y = Pk * x;
    out.trajectory.states.push_back(x);
    out.trajectory.controls.push_back(-sys.B().transpose() * y);
    out.adjoint.push_back(y);
  }
  out.cost = evaluate_cost(prob, out.trajectory);
  return out;
}

double evaluate_cost(const LqrProblem& prob, const Trajectory& traj) {
  traj.validate();
  if (!traj.has_controls()) throw InputError("cost evaluation needs the control samples");
  const Matrix& C = prob.sys.C();
  std::vector<double> running(traj.grid.size());
  for (std::size_t k = 0; k < traj.grid.size(); ++k) {
    if (traj.states[k].size() != prob.sys.n() || traj.controls[k].size() != prob.sys.p()) {
      throw DimensionError("trajectory dimensions do not match the system");
    }
    running[k] = (C * traj.states[k]).squaredNorm() + traj.controls[k].squaredNorm();
  }
  const Vector& xT = traj.final_state();
  return integrate_simpson(traj.grid, running) + xT.dot(prob.P0 * xT);
}

namespace {

struct DoublingResult {
  Matrix P;
  double horizon = 0.0;
};

double are_scale(const LtiSystem& sys, const Matrix& P) {
  const double PB = (P * sys.B()).norm();
  return 2.0 * sys.A().norm() * P.norm() + PB * PB + (sys.C().transpose() * sys.C()).norm();
}

DoublingResult horizon_doubling(const LtiSystem& sys, const Matrix& P_start, double T0,
                                const ToleranceConfig& cfg) {
  const HorizonFlow flow(sys);
  const auto advance = [&](Matrix P, double from, double to) {
    const int steps = std::max(1, static_cast<int>(std::ceil((to - from) / cfg.ode_step - 1e-9)));
    const double h = (to - from) / steps;
    for (int k = 0; k < steps; ++k) {
      P = rk4_step(flow, from + k * h, P, h);
      symmetrize(P);
    }
    const double norm = P.norm();
    if (!std::isfinite(norm) || norm > kEscapeNorm) {
      throw ConvergenceError("Riccati iteration diverged while extending the horizon");
    }
    return P;
  };

  double T = T0;
  Matrix P = advance(P_start, 0.0, T);
  double previous_change = -1.0;
  while (true) {
    if (2.0 * T > kHorizonCap * T0) {
      throw ConvergenceError("Riccati limit not reached within the horizon cap");
    }
    Matrix next = advance(P, T, 2.0 * T);
    const double change = (next - P).norm();
    P = std::move(next);
    T *= 2.0;
    const double scale = cfg.residual_tol * std::max(1.0, P.norm());
    if (change <= scale || are_residual(sys, P).norm() <= scale) return {P, T};
    if (T >= kStagnationHorizon * T0 && previous_change > 0.0 && change > 0.5 * previous_change) {
      // stalled at the rounding floor of a large P
      if (are_residual(sys, P).norm() <= 1e3 * kEps * are_scale(sys, P)) return {P, T};
      throw ConvergenceError("Riccati iteration converges sub-exponentially; no stabilizing limit");
    }
    previous_change = change;
  }
}

}  // namespace

AreSolution are_solve(const LtiSystem& sys, const ToleranceConfig& cfg, double initial_horizon) {
  if (!(initial_horizon > 0.0)) throw InputError("initial horizon must be positive");
  if (!is_stabilizable(sys.A(), sys.B(), cfg)) {
    throw FiniteCostViolationError("(A, B) is not stabilizable; the finite cost condition fails");
  }
  const int n = sys.n();
  const Matrix BBt = sys.B() * sys.B().transpose();

  const auto finish = [&](const DoublingResult& r, bool from_identity) {
    AreSolution out;
    out.P = r.P;
    out.residual = are_residual(sys, r.P).norm();
    out.closed_loop_abscissa = spectral_abscissa(sys.A() - BBt * r.P);
    out.horizon_used = r.horizon;
    out.from_identity = from_identity;
    return out;
  };

  AreSolution sol = finish(horizon_doubling(sys, Matrix::Zero(n, n), initial_horizon, cfg), false);
  if (sol.closed_loop_abscissa < -kStabilityMargin) return sol;

  sol = finish(horizon_doubling(sys, Matrix::Identity(n, n), initial_horizon, cfg), true);
  if (!(sol.closed_loop_abscissa < -kStabilityMargin)) {
    throw ConvergenceError("Riccati limit does not stabilize the closed loop");
  }
  return sol;
}

}  // namespace linctl
