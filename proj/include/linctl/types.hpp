#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace linctl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Complex = std::complex<double>;

/// Spectrum of a real matrix: closed under conjugation, multiplicities kept.
using ComplexList = std::vector<Complex>;

/// Numerical tolerances shared by every module.
struct ToleranceConfig {
  double rank_rtol = 1e-10;        // relative singular-value cutoff factor
  double residual_tol = 1e-10;     // matrix-equation residual bound
  double ode_step = 1e-3;          // default integration step (seconds)
  double fixed_point_tol = 1e-10;  // nonlinear steering stopping tolerance
  int max_iter = 50;
  // Gramian invertibility: sigma_min of the sampled square-root factor must
  // exceed this many units of its rounding floor.
  double gramian_floor_factor = 4096.0;

  /// Throws InputError unless every field is strictly positive.
  void validate() const;
};

}  // namespace linctl
