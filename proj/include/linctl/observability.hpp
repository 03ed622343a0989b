#pragma once

#include <optional>

#include "linctl/reachability.hpp"

namespace linctl {

struct ObservabilityReport {
  Matrix observability_matrix;  // [C; CA; ...; CA^{n-1}]
  int rank = 0;
  bool observable = false;
  GramianReport gramian;        // integral of e^{tA^T} C^T C e^{tA} over [0, T]
};

struct DetectabilityReport {
  bool detectable = false;
  std::optional<Matrix> witness_L;  // A + L C stable; absent when not detectable
};

Matrix observability_matrix(const Matrix& A, const Matrix& C);

/// Rank test and observability Gramian on [0, horizon]. The two verdicts
/// must agree; otherwise NumericalInconsistencyError is thrown.
ObservabilityReport observability_test(const Matrix& A, const Matrix& C, double horizon,
                                       const ToleranceConfig& cfg = {});

/// Whether observability of (A, C) agrees with controllability of (A^T, C^T).
bool duality_check(const Matrix& A, const Matrix& C, const ToleranceConfig& cfg = {},
                   double horizon = 1.0);

/// PBH test on the closed right half plane: rank [lambda I - A; C] = n for
/// every eigenvalue with Re(lambda) >= 0. When detectable, a gain L with
/// spectral_abscissa(A + L C) < 0 is returned as a witness.
DetectabilityReport detectability_test(const Matrix& A, const Matrix& C,
                                       const ToleranceConfig& cfg = {});

}  // namespace linctl
