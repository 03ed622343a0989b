#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "linctl/types.hpp"

namespace linctl {

/// Constant triple (A, B, C) of x' = Ax + Bu, y = Cx. C defaults to I_n.
class LtiSystem {
 public:
  LtiSystem(Matrix A, Matrix B, std::optional<Matrix> C = std::nullopt);

  const Matrix& A() const { return A_; }
  const Matrix& B() const { return B_; }
  const Matrix& C() const { return C_; }

  int n() const { return static_cast<int>(A_.rows()); }
  int p() const { return static_cast<int>(B_.cols()); }
  int m() const { return static_cast<int>(C_.rows()); }

 private:
  Matrix A_;
  Matrix B_;
  Matrix C_;
};

using MatrixFunction = std::function<Matrix(double)>;
using VectorFunction = std::function<Vector(double)>;

/// Time-varying pair (A(t), B(t)) on the closed interval [t0, t1].
class LtvSystem {
 public:
  LtvSystem(double t0, double t1, MatrixFunction A_of, MatrixFunction B_of);

  /// Constant coefficients viewed as a time-varying system on [t0, t1].
  static LtvSystem from_lti(const LtiSystem& sys, double t0, double t1);

  double t0() const { return t0_; }
  double t1() const { return t1_; }
  int n() const { return n_; }
  int p() const { return p_; }

  /// Samplers. Throw DomainError outside [t0, t1].
  Matrix A(double t) const;
  Matrix B(double t) const;

  bool contains(double t) const;

 private:
  double t0_;
  double t1_;
  int n_ = 0;
  int p_ = 0;
  MatrixFunction A_of_;
  MatrixFunction B_of_;
};

/// Control u(t) in R^p on [t0, t1]. Callables must be reentrant.
class ControlSignal {
 public:
  ControlSignal(double t0, double t1, int p, VectorFunction u_of);

  static ControlSignal zero(int p, double t0, double t1);
  static ControlSignal constant(const Vector& u, double t0, double t1);
  /// Piecewise-linear interpolation of samples on a strictly increasing grid.
  static ControlSignal sampled(std::vector<double> grid, std::vector<Vector> values);

  double t0() const { return t0_; }
  double t1() const { return t1_; }
  int p() const { return p_; }

  Vector operator()(double t) const;

 private:
  double t0_;
  double t1_;
  int p_;
  VectorFunction u_of_;
};

/// States (and optionally controls) sampled on a strictly increasing grid.
struct Trajectory {
  std::vector<double> grid;
  std::vector<Vector> states;
  std::vector<Vector> controls;  // empty when absent

  bool has_controls() const { return !controls.empty(); }
  const Vector& final_state() const { return states.back(); }

  /// Throws InputError when lengths disagree or the grid is not increasing.
  void validate() const;
};

/// Uniform grid with `count` points from t0 to t1 inclusive.
std::vector<double> uniform_grid(double t0, double t1, int count);

}  // namespace linctl
