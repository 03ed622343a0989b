#pragma once

#include <optional>

#include "linctl/numkernel.hpp"

namespace linctl {

/// omega < -kStabilityMargin declares stability; |omega| <= kStabilityMargin
/// is reported as marginal (and unstable).
inline constexpr double kStabilityMargin = 1e-9;

struct StabilityReport {
  double omega = 0.0;  // spectral abscissa
  bool stable = false;
  bool marginal = false;
  std::optional<Matrix> lyapunov_Q;
  double residual = 0.0;  // ||A^T Q + Q A + R||_F when Q is present
};

/// Largest real part over the spectrum of A.
double spectral_abscissa(const Matrix& A);

StabilityReport stability_report(const Matrix& A);

/// Solves A^T Q + Q A = -R for stable A. Throws NoCertificateError when A
/// is not stable, since the defining integral then diverges.
StabilityReport lyapunov_certificate(const Matrix& A, const Matrix& R,
                                     const ToleranceConfig& cfg = {});

/// For observable (A, C): true iff Q solves A^T Q + Q A = -C^T C within
/// residual_tol, in which case A is stable.
bool lyapunov_stability_test(const Matrix& A, const Matrix& C, const Matrix& Q_candidate,
                             const ToleranceConfig& cfg = {});

/// Throws InputError unless M is symmetric to `tol`.
void require_symmetric(const Matrix& M, const char* what, double tol = 1e-10);

/// Smallest eigenvalue of the symmetric part of M.
double min_symmetric_eigenvalue(const Matrix& M);

}  // namespace linctl
