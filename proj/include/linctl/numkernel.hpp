#pragma once

// Dense kernels shared by the analysis and synthesis modules: matrix
// exponential, spectra, tolerance-aware rank, Sylvester solves, fixed-step
// Runge-Kutta integration and Simpson quadrature.

#include <cmath>
#include <span>
#include <vector>

#include "linctl/errors.hpp"
#include "linctl/systems.hpp"
#include "linctl/types.hpp"

namespace linctl {

/// e^A by scaling and squaring with the degree-13 Pade approximant.
Matrix expm(const Matrix& A);

/// All eigenvalues of a square matrix, with multiplicity.
ComplexList eigenvalues(const Matrix& A);

/// Lexicographic (real part, then imaginary part) ordering.
ComplexList sorted_spectrum(ComplexList values);

/// Largest elementwise distance between two spectra after greedy matching.
/// Returns +inf when sizes differ.
double spectrum_distance(const ComplexList& a, const ComplexList& b);

/// Count of singular values above rank_rtol * max(rows, cols) * sigma_max.
int numerical_rank(const Matrix& A, const ToleranceConfig& cfg = {});

/// X with A X + X Bm = R via the vectorized (Kronecker) linear system.
/// Throws SingularEquationError when spec(A) and spec(-Bm) intersect.
Matrix solve_sylvester(const Matrix& A, const Matrix& Bm, const Matrix& R,
                       const ToleranceConfig& cfg = {});

/// Frobenius residual of A X + X Bm - R.
double sylvester_residual(const Matrix& A, const Matrix& Bm, const Matrix& R,
                          const Matrix& X);

/// Throws InputError if any entry is NaN or infinite.
void require_finite(const Matrix& M, const char* what);
void require_square(const Matrix& M, const char* what);

/// One classical fourth-order Runge-Kutta step of x' = rhs(t, x).
template <class State, class Rhs>
State rk4_step(const Rhs& rhs, double t, const State& x, double h) {
  const State k1 = rhs(t, x);
  const State k2 = rhs(t + 0.5 * h, State(x + (0.5 * h) * k1));
  const State k3 = rhs(t + 0.5 * h, State(x + (0.5 * h) * k2));
  const State k4 = rhs(t + h, State(x + h * k3));
  return State(x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

/// Integrates from t to t_end (either direction) in equal steps no longer
/// than max_step.
template <class State, class Rhs>
State rk4_integrate(const Rhs& rhs, double t, double t_end, State x, double max_step) {
  const double span = t_end - t;
  if (span == 0.0) return x;
  const int steps = std::max(1, static_cast<int>(std::ceil(std::abs(span) / max_step - 1e-9)));
  const double h = span / steps;
  for (int k = 0; k < steps; ++k) {
    x = rk4_step(rhs, t + k * h, x, h);
  }
  return x;
}

/// Uniform nodes on [t0, t1] with an even number (>= 2) of intervals, each
/// no longer than max_spacing.
std::vector<double> simpson_nodes(double t0, double t1, double max_spacing);

/// Composite Simpson weights matching simpson_nodes.
std::vector<double> simpson_weights(std::span<const double> nodes);

/// Composite Simpson rule on an arbitrary increasing grid. Pairs of
/// intervals use the non-uniform three-point rule; a trailing single
/// interval reuses the last three points.
double integrate_simpson(std::span<const double> grid, std::span<const double> values);

/// State-transition matrix R(t, s) of x' = A(t) x, integrated by RK4 with
/// step <= cfg.ode_step. R(s, s) = I exactly.
Matrix resolvent(const LtvSystem& sys, double s, double t, const ToleranceConfig& cfg = {});

/// Samples of s -> R(t1, s) on a Simpson grid of [t0, t1], obtained by one
/// backward sweep of d/ds R(t1, s) = -R(t1, s) A(s). Between nodes the
/// map is evaluated by cubic Hermite interpolation.
class TerminalResolvent {
 public:
  TerminalResolvent(const LtvSystem& sys, double t0, double t1, const ToleranceConfig& cfg = {});

  double t0() const { return nodes_.front(); }
  double t1() const { return nodes_.back(); }
  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<Matrix>& values() const { return values_; }

  /// R(t1, s) for s in [t0, t1].
  Matrix at(double s) const;

 private:
  std::vector<double> nodes_;
  std::vector<Matrix> values_;
  std::vector<Matrix> slopes_;
};

}  // namespace linctl
