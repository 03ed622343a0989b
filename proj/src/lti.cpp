#include "linctl/lti.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

namespace linctl {

LtiSystem::LtiSystem(Matrix A, Matrix B, std::optional<Matrix> C)
    : A_(std::move(A)), B_(std::move(B)) {
  require_square(A_, "A");
  if (A_.rows() == 0) throw DimensionError("system order must be positive");
  if (B_.rows() != A_.rows()) {
    throw DimensionError("B must have " + std::to_string(A_.rows()) + " rows, got " +
                         std::to_string(B_.rows()));
  }
  C_ = C ? std::move(*C) : Matrix::Identity(A_.rows(), A_.rows());
  if (C_.cols() != A_.rows()) {
    throw DimensionError("C must have " + std::to_string(A_.rows()) + " columns, got " +
                         std::to_string(C_.cols()));
  }
  require_finite(A_, "A");
  require_finite(B_, "B");
  require_finite(C_, "C");
}

LtvSystem::LtvSystem(double t0, double t1, MatrixFunction A_of, MatrixFunction B_of)
    : t0_(t0), t1_(t1), A_of_(std::move(A_of)), B_of_(std::move(B_of)) {
  if (!(t1_ > t0_)) throw DomainError("time-varying system needs t0 < t1");
  if (!A_of_ || !B_of_) throw InputError("time-varying system needs both samplers");
  const Matrix A0 = A_of_(t0_);
  const Matrix B0 = B_of_(t0_);
  require_square(A0, "A(t0)");
  if (B0.rows() != A0.rows()) throw DimensionError("B(t0) row count differs from A(t0)");
  n_ = static_cast<int>(A0.rows());
  p_ = static_cast<int>(B0.cols());
}

LtvSystem LtvSystem::from_lti(const LtiSystem& sys, double t0, double t1) {
  Matrix A = sys.A();
  Matrix B = sys.B();
  return LtvSystem(
      t0, t1, [A](double) { return A; }, [B](double) { return B; });
}

bool LtvSystem::contains(double t) const {
  const double slack = 1e-12 * (1.0 + std::abs(t0_) + std::abs(t1_));
  return t >= t0_ - slack && t <= t1_ + slack;
}

Matrix LtvSystem::A(double t) const {
  if (!contains(t)) throw DomainError("A(t) sampled outside the system interval");
  Matrix A = A_of_(t);
  if (A.rows() != n_ || A.cols() != n_) throw DimensionError("A(t) changed dimension");
  return A;
}

Matrix LtvSystem::B(double t) const {
  if (!contains(t)) throw DomainError("B(t) sampled outside the system interval");
  Matrix B = B_of_(t);
  if (B.rows() != n_ || B.cols() != p_) throw DimensionError("B(t) changed dimension");
  return B;
}

ControlSignal::ControlSignal(double t0, double t1, int p, VectorFunction u_of)
    : t0_(t0), t1_(t1), p_(p), u_of_(std::move(u_of)) {
  if (!(t1_ >= t0_)) throw DomainError("control interval must satisfy t0 <= t1");
  if (p_ < 0) throw DimensionError("control dimension must be non-negative");
  if (!u_of_) throw InputError("control signal needs a sampler");
}

ControlSignal ControlSignal::zero(int p, double t0, double t1) {
  return ControlSignal(t0, t1, p, [p](double) { return Vector::Zero(p); });
}

ControlSignal ControlSignal::constant(const Vector& u, double t0, double t1) {
  return ControlSignal(t0, t1, static_cast<int>(u.size()), [u](double) { return u; });
}

ControlSignal ControlSignal::sampled(std::vector<double> grid, std::vector<Vector> values) {
  if (grid.size() != values.size() || grid.empty()) {
    throw DimensionError("sampled control needs one value per grid point");
  }
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (!(grid[k] > grid[k - 1])) throw InputError("sampled control grid must increase");
  }
  const int p = static_cast<int>(values.front().size());
  for (const Vector& v : values) {
    if (v.size() != p) throw DimensionError("sampled control values change dimension");
  }
  const double t0 = grid.front();
  const double t1 = grid.back();
  return ControlSignal(t0, t1, p, [grid = std::move(grid), values = std::move(values)](double t) {
    if (t <= grid.front()) return values.front();
    if (t >= grid.back()) return values.back();
    const auto it = std::upper_bound(grid.begin(), grid.end(), t);
    const std::size_t k = static_cast<std::size_t>(it - grid.begin()) - 1;
    const double w = (t - grid[k]) / (grid[k + 1] - grid[k]);
    return Vector((1.0 - w) * values[k] + w * values[k + 1]);
  });
}

Vector ControlSignal::operator()(double t) const {
  const double slack = 1e-12 * (1.0 + std::abs(t0_) + std::abs(t1_));
  if (t < t0_ - slack || t > t1_ + slack) {
    throw DomainError("control sampled outside its interval");
  }
  Vector u = u_of_(t);
  if (u.size() != p_) throw DimensionError("control sampler returned the wrong dimension");
  return u;
}

void Trajectory::validate() const {
  if (states.size() != grid.size()) throw InputError("trajectory: one state per grid point");
  if (!controls.empty() && controls.size() != grid.size()) {
    throw InputError("trajectory: one control per grid point");
  }
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (!(grid[k] > grid[k - 1])) throw InputError("trajectory grid must be strictly increasing");
  }
}

std::vector<double> uniform_grid(double t0, double t1, int count) {
  if (count < 2) throw InputError("uniform grid needs at least two points");
  std::vector<double> grid(count);
  for (int k = 0; k < count; ++k) {
    grid[k] = t0 + (t1 - t0) * static_cast<double>(k) / (count - 1);
  }
  grid.back() = t1;
  return grid;
}

namespace {

void check_grid(std::span<const double> grid) {
  if (grid.empty()) throw InputError("simulation grid is empty");
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (!(grid[k] > grid[k - 1])) throw InputError("simulation grid must be strictly increasing");
  }
}

template <class Rhs>
Trajectory integrate_on_grid(const Rhs& rhs, const Vector& x0, const ControlSignal& u,
                             std::span<const double> grid, const ToleranceConfig& cfg) {
  Trajectory traj;
  traj.grid.assign(grid.begin(), grid.end());
  traj.states.reserve(grid.size());
  traj.controls.reserve(grid.size());
  traj.states.push_back(x0);
  traj.controls.push_back(u(grid[0]));
  Vector x = x0;
  for (std::size_t k = 1; k < grid.size(); ++k) {
    x = rk4_integrate(rhs, grid[k - 1], grid[k], std::move(x), cfg.ode_step);
    traj.states.push_back(x);
    traj.controls.push_back(u(grid[k]));
  }
  return traj;
}

void check_control_covers(const ControlSignal& u, std::span<const double> grid) {
  const double slack = 1e-12 * (1.0 + std::abs(u.t0()) + std::abs(u.t1()));
  if (grid.front() < u.t0() - slack || grid.back() > u.t1() + slack) {
    throw DomainError("simulation grid extends beyond the control interval");
  }
}

}  // namespace

Trajectory simulate(const LtiSystem& sys, const Vector& x0, const ControlSignal& u,
                    std::span<const double> grid, const ToleranceConfig& cfg) {
  check_grid(grid);
  if (x0.size() != sys.n()) throw DimensionError("initial state has the wrong dimension");
  if (u.p() != sys.p()) throw DimensionError("control dimension differs from B's column count");
  check_control_covers(u, grid);
  const Matrix& A = sys.A();
  const Matrix& B = sys.B();
  auto rhs = [&](double t, const Vector& x) -> Vector { return A * x + B * u(t); };
  return integrate_on_grid(rhs, x0, u, grid, cfg);
}

Trajectory simulate(const LtvSystem& sys, const Vector& x0, const ControlSignal& u,
                    std::span<const double> grid, const ToleranceConfig& cfg) {
  check_grid(grid);
  if (!sys.contains(grid.front()) || !sys.contains(grid.back())) {
    throw DomainError("simulation grid lies outside the system interval");
  }
  if (x0.size() != sys.n()) throw DimensionError("initial state has the wrong dimension");
  if (u.p() != sys.p()) throw DimensionError("control dimension differs from B's column count");
  check_control_covers(u, grid);
  auto rhs = [&](double t, const Vector& x) -> Vector { return sys.A(t) * x + sys.B(t) * u(t); };
  return integrate_on_grid(rhs, x0, u, grid, cfg);
}

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  traj.validate();
  const Eigen::Index n = traj.states.empty() ? 0 : traj.states.front().size();
  const Eigen::Index p = traj.has_controls() ? traj.controls.front().size() : 0;
  out << "t";
  for (Eigen::Index i = 1; i <= n; ++i) out << ",x" << i;
  for (Eigen::Index i = 1; i <= p; ++i) out << ",u" << i;
  out << '\n';
  for (std::size_t k = 0; k < traj.grid.size(); ++k) {
    out << format_double(traj.grid[k]);
    for (Eigen::Index i = 0; i < n; ++i) out << ',' << format_double(traj.states[k](i));
    for (Eigen::Index i = 0; i < p; ++i) out << ',' << format_double(traj.controls[k](i));
    out << '\n';
  }
}

}  // namespace linctl
