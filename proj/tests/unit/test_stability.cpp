#include <gtest/gtest.h>

#include "linctl/stability.hpp"
#include "random_systems.hpp"

using namespace linctl;
using linctl::testing::Rng;

namespace {

// Simpson quadrature of e^{tA^T} R e^{tA} on [0, T].
Matrix lyapunov_quadrature(const Matrix& A, const Matrix& R, double T, int intervals) {
  const double h = T / intervals;
  const Matrix step = expm(h * A);
  Matrix E = Matrix::Identity(A.rows(), A.cols());
  Matrix sum = Matrix::Zero(A.rows(), A.cols());
  for (int k = 0; k <= intervals; ++k) {
    const double w = (k == 0 || k == intervals) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
    sum += w * E.transpose() * R * E;
    E = E * step;
  }
  return sum * h / 3.0;
}

}  // namespace

TEST(SpectralAbscissa, Examples) {
  Matrix A(2, 2);
  A << 0, 1, -1, 0;
  EXPECT_NEAR(spectral_abscissa(A), 0.0, 1e-15);
  const StabilityReport r = stability_report(A);
  EXPECT_FALSE(r.stable);
  EXPECT_TRUE(r.marginal);
  EXPECT_NEAR(spectral_abscissa(-Matrix::Identity(3, 3)), -1.0, 1e-15);
}

TEST(LyapunovCertificate, ScalarAndIdentity) {
  const StabilityReport r = lyapunov_certificate(-Matrix::Identity(2, 2), Matrix::Identity(2, 2));
  ASSERT_TRUE(r.lyapunov_Q.has_value());
  EXPECT_LT((*r.lyapunov_Q - 0.5 * Matrix::Identity(2, 2)).norm(), 1e-15);
  EXPECT_TRUE(r.stable);
}

TEST(LyapunovCertificate, UnstableHasNoCertificate) {
  Matrix A(2, 2);
  A << 0, 1, 1, 0;
  EXPECT_THROW(lyapunov_certificate(A, Matrix::Identity(2, 2)), NoCertificateError);
  Matrix rot(2, 2);
  rot << 0, 1, -1, 0;
  EXPECT_THROW(lyapunov_certificate(rot, Matrix::Identity(2, 2)), NoCertificateError);
}

TEST(LyapunovCertificate, RejectsAsymmetricWeight) {
  Matrix R = Matrix::Identity(2, 2);
  R(0, 1) = 1.0;
  EXPECT_THROW(lyapunov_certificate(-Matrix::Identity(2, 2), R), InputError);
}

TEST(LyapunovCertificate, RandomStableMatricesMatchQuadrature) {
  Rng rng(51);
  const ToleranceConfig cfg;
  for (int trial = 0; trial < 8; ++trial) {
    const int n = rng.integer(2, 5);
    const Matrix A = linctl::testing::random_stable(rng, n, 0.5, 1.0);
    const Matrix R = Matrix::Identity(n, n);
    const StabilityReport r = lyapunov_certificate(A, R, cfg);
    const Matrix& Q = *r.lyapunov_Q;
    EXPECT_LE(r.residual, cfg.residual_tol * (1.0 + R.norm()));
    EXPECT_GT(min_symmetric_eigenvalue(Q), 0.0);
    const Matrix quad = lyapunov_quadrature(A, R, 60.0, 24000);
    EXPECT_LT((Q - quad).norm(), 1e-6);
  }
}

TEST(LyapunovCertificate, UniqueSymmetricSolution) {
  Rng rng(52);
  const Matrix A = linctl::testing::random_stable(rng, 4);
  Matrix R = rng.matrix(4, 4);
  R = (R + R.transpose()).eval();
  const Matrix Q = *lyapunov_certificate(A, R).lyapunov_Q;
  EXPECT_LT((Q - Q.transpose()).norm(), 1e-14);
  EXPECT_LT((A.transpose() * Q + Q * A + R).norm(), 1e-10 * (1.0 + R.norm()));
}

TEST(LyapunovStabilityTest, AcceptsTrueSolution) {
  const Matrix A = -Matrix::Identity(2, 2);
  const Matrix C = Matrix::Identity(2, 2);
  EXPECT_TRUE(lyapunov_stability_test(A, C, 0.5 * Matrix::Identity(2, 2)));
  EXPECT_FALSE(lyapunov_stability_test(A, C, Matrix::Identity(2, 2)));
}

TEST(LyapunovStabilityTest, RandomObservablePairs) {
  Rng rng(53);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = rng.integer(2, 5);
    const Matrix A = linctl::testing::random_stable(rng, n);
    const Matrix C = rng.matrix(1, n);
    const Matrix Q = *lyapunov_certificate(A, C.transpose() * C).lyapunov_Q;
    EXPECT_TRUE(lyapunov_stability_test(A, C, 0.5 * (Q + Q.transpose())));
  }
}

TEST(LyapunovStabilityTest, Preconditions) {
  const Matrix A = -Matrix::Identity(2, 2);
  EXPECT_THROW(lyapunov_stability_test(A, Matrix::Zero(1, 2), Matrix::Zero(2, 2)), PreconditionError);
  EXPECT_THROW(lyapunov_stability_test(A, Matrix::Identity(2, 2), -Matrix::Identity(2, 2)),
               PreconditionError);
}
