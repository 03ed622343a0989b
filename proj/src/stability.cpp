#include "linctl/stability.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>

#include "linctl/observability.hpp"

namespace linctl {

double spectral_abscissa(const Matrix& A) {
  require_square(A, "A");
  double omega = -std::numeric_limits<double>::infinity();
  for (const Complex& lambda : eigenvalues(A)) omega = std::max(omega, lambda.real());
  return omega;
}

StabilityReport stability_report(const Matrix& A) {
  StabilityReport report;
  report.omega = spectral_abscissa(A);
  report.stable = report.omega < -kStabilityMargin;
  report.marginal = std::abs(report.omega) <= kStabilityMargin;
  return report;
}

void require_symmetric(const Matrix& M, const char* what, double tol) {
  require_square(M, what);
  require_finite(M, what);
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > tol) {
    throw InputError(std::string(what) + " must be symmetric");
  }
}

double min_symmetric_eigenvalue(const Matrix& M) {
  if (M.size() == 0) return 0.0;
  const Matrix S = 0.5 * (M + M.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(S, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

StabilityReport lyapunov_certificate(const Matrix& A, const Matrix& R, const ToleranceConfig& cfg) {
  require_square(A, "A");
  if (R.rows() != A.rows() || R.cols() != A.cols()) {
    throw DimensionError("R must have the same shape as A");
  }
  require_symmetric(R, "R");
  StabilityReport report = stability_report(A);
  if (!report.stable) {
    throw NoCertificateError("A is not stable (spectral abscissa " + std::to_string(report.omega) +
                             "); the Lyapunov integral diverges");
  }
  Matrix Q = solve_sylvester(A.transpose(), A, -R, cfg);
  Q = (0.5 * (Q + Q.transpose())).eval();
  report.residual = (A.transpose() * Q + Q * A + R).norm();
  report.lyapunov_Q = std::move(Q);
  return report;
}

bool lyapunov_stability_test(const Matrix& A, const Matrix& C, const Matrix& Q_candidate,
                             const ToleranceConfig& cfg) {
  require_square(A, "A");
  if (C.cols() != A.rows()) throw DimensionError("C must have as many columns as A has rows");
  if (Q_candidate.rows() != A.rows() || Q_candidate.cols() != A.cols()) {
    throw DimensionError("Q must have the same shape as A");
  }
  const ObservabilityReport obs = observability_test(A, C, 1.0, cfg);
  if (!obs.observable) throw PreconditionError("(A, C) is not observable");
  if ((Q_candidate - Q_candidate.transpose()).cwiseAbs().maxCoeff() > 1e-10) {
    throw PreconditionError("Q candidate is not symmetric");
  }
  if (min_symmetric_eigenvalue(Q_candidate) < -1e-10 * (1.0 + Q_candidate.norm())) {
    throw PreconditionError("Q candidate is not positive semidefinite");
  }

  const Matrix R = C.transpose() * C;
  const double residual = (A.transpose() * Q_candidate + Q_candidate * A + R).norm();
  const bool solves = residual <= cfg.residual_tol * (1.0 + R.norm());
  if (!solves) return false;
  if (!stability_report(A).stable) {
    throw NumericalInconsistencyError(
        "a semidefinite Lyapunov solution exists but the spectral abscissa is not negative");
  }
  return true;
}

}  // namespace linctl
