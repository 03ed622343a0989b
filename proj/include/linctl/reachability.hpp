#pragma once

#include <vector>

#include "linctl/numkernel.hpp"
#include "linctl/systems.hpp"

namespace linctl {

struct ControllabilityReport {
  Matrix kalman_matrix;      // [B, AB, ..., A^{n-1} B]
  int rank = 0;
  bool controllable = false;
  Matrix reachable_basis;    // orthonormal columns spanning the reachable subspace
  Matrix unreachable_basis;  // orthonormal complement
};

struct HautusRecord {
  Complex eigenvalue;
  int rank = 0;  // rank of [lambda I - A, B] over the complex field
  bool pass = false;
};

struct HautusReport {
  std::vector<HautusRecord> records;
  bool pass = false;
};

/// Controllability Gramian on [t0, t1] together with its invertibility
/// verdict. The Gramian is assembled as R^T R from the QR factor R of the
/// Simpson-weighted samples of R(t1, s) B(s), which keeps its small
/// eigenvalues resolvable far below sqrt(machine epsilon).
struct GramianReport {
  Matrix gramian;
  double t0 = 0.0;
  double t1 = 0.0;
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;
  bool invertible = false;
  Matrix factor;       // upper triangular, gramian == factor^T factor
  double noise_floor = 0.0;  // rounding floor of sqrt(min_eigenvalue)
};

struct KalmanDecomposition {
  Matrix T;  // orthogonal; first r columns span the reachable subspace
  int r = 0;
  Matrix A1, A2, A3, B1;
  Matrix A_tilde;  // T^T A T
  Matrix B_tilde;  // T^T B
};

struct MinEnergyControl {
  ControlSignal control;
  double predicted_cost = 0.0;  // <z, Gramian z>
  Vector z;
  GramianReport gramian;
};

Matrix kalman_matrix(const Matrix& A, const Matrix& B);

ControllabilityReport kalman_test(const LtiSystem& sys, const ToleranceConfig& cfg = {});

/// Rank over C of [lambda I - A, B]. Complex lambda is handled through the
/// equivalent real system [[Re M, -Im M], [Im M, Re M]] whose rank is twice
/// the complex rank.
int hautus_rank(const Matrix& A, const Matrix& B, Complex lambda, const ToleranceConfig& cfg = {});

HautusReport hautus_test(const LtiSystem& sys, const ToleranceConfig& cfg = {});

/// Hautus test restricted to eigenvalues with Re(lambda) >= 0.
bool is_stabilizable(const Matrix& A, const Matrix& B, const ToleranceConfig& cfg = {});

GramianReport controllability_gramian(const LtiSystem& sys, double t0, double t1,
                                      const ToleranceConfig& cfg = {});
GramianReport controllability_gramian(const LtvSystem& sys, double t0, double t1,
                                      const ToleranceConfig& cfg = {});
/// Gramian on the interval of a precomputed terminal resolvent.
GramianReport controllability_gramian(const LtvSystem& sys, const TerminalResolvent& phi,
                                      const ToleranceConfig& cfg = {});

/// Solves Gramian * z = rhs through the stored triangular factor.
Vector gramian_solve(const GramianReport& report, const Vector& rhs);

/// Minimum-energy control u(s) = B(s)^T R(t1, s)^T z steering x0 at t0 to
/// x1 at t1. Throws UncontrollableIntervalError when the Gramian is singular.
MinEnergyControl min_energy_control(const LtiSystem& sys, double t0, double t1, const Vector& x0,
                                    const Vector& x1, const ToleranceConfig& cfg = {});
MinEnergyControl min_energy_control(const LtvSystem& sys, double t0, double t1, const Vector& x0,
                                    const Vector& x1, const ToleranceConfig& cfg = {});

KalmanDecomposition kalman_decomposition(const LtiSystem& sys, const ToleranceConfig& cfg = {});

namespace internal {

/// Builds the report from Simpson-weighted samples Y_k = R(t1, s_k) B(s_k)
/// and the transition norms ||R(t1, s_k)||_F used for the rounding floor.
GramianReport gramian_from_samples(const std::vector<Matrix>& samples,
                                   const std::vector<double>& weights,
                                   const std::vector<double>& floor_terms, double t0, double t1,
                                   const ToleranceConfig& cfg);

/// Orthonormal basis of range(M) and of its complement, with columns
/// sign-normalized so that their largest-magnitude entry is positive.
void range_bases(const Matrix& M, int rank, Matrix& range, Matrix& complement);

}  // namespace internal

}  // namespace linctl
