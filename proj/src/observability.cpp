#include "linctl/observability.hpp"

#include <algorithm>

#include "linctl/stability.hpp"
#include "linctl/synthesis.hpp"

namespace linctl {

Matrix observability_matrix(const Matrix& A, const Matrix& C) {
  require_square(A, "A");
  if (C.cols() != A.rows()) throw DimensionError("C must have as many columns as A has rows");
  return kalman_matrix(A.transpose(), C.transpose()).transpose();
}

ObservabilityReport observability_test(const Matrix& A, const Matrix& C, double horizon,
                                       const ToleranceConfig& cfg) {
  if (!(horizon > 0.0)) throw DomainError("observability horizon must be positive");
  ObservabilityReport report;
  report.observability_matrix = observability_matrix(A, C);
  report.rank = numerical_rank(report.observability_matrix, cfg);
  report.observable = report.rank == A.rows();
  const LtiSystem dual(A.transpose(), C.transpose());
  report.gramian = controllability_gramian(dual, 0.0, horizon, cfg);
  if (report.gramian.invertible != report.observable) {
    throw NumericalInconsistencyError(
        "observability rank test and Gramian disagree (ill-conditioned pair)");
  }
  return report;
}

bool duality_check(const Matrix& A, const Matrix& C, const ToleranceConfig& cfg, double horizon) {
  const ObservabilityReport obs = observability_test(A, C, horizon, cfg);
  const ControllabilityReport ctrl = kalman_test(LtiSystem(A.transpose(), C.transpose()), cfg);
  return obs.observable == ctrl.controllable;
}

namespace {

// Target roots obtained by reflecting the spectrum into Re <= -1.
MonicPolynomial reflected_target(const Matrix& A) {
  ComplexList roots;
  for (const Complex& lambda : eigenvalues(A)) {
    const double re = -std::abs(lambda.real()) - 1.0;
    roots.emplace_back(re, lambda.imag());
  }
  return MonicPolynomial::from_roots(roots);
}

}  // namespace

DetectabilityReport detectability_test(const Matrix& A, const Matrix& C,
                                       const ToleranceConfig& cfg) {
  require_square(A, "A");
  if (C.cols() != A.rows()) throw DimensionError("C must have as many columns as A has rows");
  const int n = static_cast<int>(A.rows());
  const int m = static_cast<int>(C.rows());

  DetectabilityReport report;
  report.detectable = is_stabilizable(A.transpose(), C.transpose(), cfg);
  if (!report.detectable) return report;

  if (stability_report(A).stable) {
    report.witness_L = Matrix::Zero(n, m);
    return report;
  }

  Matrix L;
  try {
    const KalmanDecomposition dec = kalman_decomposition(LtiSystem(A.transpose(), C.transpose()), cfg);
    if (dec.r == n) {
      L = design_observer(A, C, reflected_target(A), cfg).L;
    } else {
      const FeedbackGain g = pole_place(dec.A1, dec.B1, reflected_target(dec.A1), cfg);
      Matrix F_tilde = Matrix::Zero(m, n);
      F_tilde.leftCols(dec.r) = g.F;
      L = (F_tilde * dec.T.transpose()).transpose();
    }
  } catch (const Error& e) {
    throw NumericalInconsistencyError(std::string("detectable pair but witness synthesis failed: ") +
                                      e.what());
  }
  if (!(spectral_abscissa(A + L * C) < -kStabilityMargin)) {
    throw NumericalInconsistencyError("detectable pair but witness gain is not stabilizing");
  }
  report.witness_L = std::move(L);
  return report;
}

}  // namespace linctl
