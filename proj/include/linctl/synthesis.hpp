#pragma once

#include <span>
#include <vector>

#include "linctl/numkernel.hpp"
#include "linctl/systems.hpp"

namespace linctl {

/// s^n - alpha_n s^{n-1} - ... - alpha_2 s - alpha_1, stored as
/// alpha = (alpha_1, ..., alpha_n).
class MonicPolynomial {
 public:
  MonicPolynomial() = default;
  static MonicPolynomial from_alpha(std::vector<double> alpha);
  /// Expands prod (s - r). Non-real roots must come in conjugate pairs.
  static MonicPolynomial from_roots(const ComplexList& roots);
  /// From the ordinary coefficients c_0..c_{n-1} of s^n + c_{n-1} s^{n-1} + ... + c_0.
  static MonicPolynomial from_coefficients(std::span<const double> c);

  int degree() const { return static_cast<int>(alpha_.size()); }
  const std::vector<double>& alpha() const { return alpha_; }
  /// c_0..c_{n-1}; equals -alpha.
  std::vector<double> coefficients() const;
  Complex evaluate(Complex s) const;
  /// Eigenvalues of the companion matrix.
  ComplexList roots() const;
  /// Companion matrix with ones on the superdiagonal and last row alpha.
  Matrix companion() const;

 private:
  std::vector<double> alpha_;
};

struct FeedbackGain {
  Matrix F;  // p x n, closed loop A + B F
  ComplexList achieved_spectrum;
  double residual = 0.0;  // relative coefficient distance of chi_{A+BF} to target
};

struct ObserverGain {
  Matrix L;  // n x m, error dynamics A + L C
  double closed_loop_abscissa = 0.0;
};

struct ControllerForm {
  Matrix A_sharp;
  Vector b_sharp;
  Matrix T;  // T^{-1} A T = A_sharp, T^{-1} b = b_sharp
};

struct GramianStabilizer {
  double lambda = 0.0;
  Matrix Q;
  Matrix P;
  Matrix K;  // -B^T P
  double riccati_residual = 0.0;   // relative residual of PA + A^T P + 2 lambda P - P B B^T P
  double inverse_residual = 0.0;   // ||P Q - I||_F
  double closed_loop_abscissa = 0.0;
  double min_admissible_lambda = 0.0;
};

/// Coefficient agreement required of a placed polynomial.
inline constexpr double kPlacementTol = 1e-6;

/// Characteristic polynomial det(sI - A), expanded from the spectrum.
MonicPolynomial characteristic_polynomial(const Matrix& A);

/// max_k |a_k - b_k| / max(1, max_k |b_k|) over the alpha coefficients.
double polynomial_distance(const MonicPolynomial& a, const MonicPolynomial& b);

ControllerForm controller_form(const Matrix& A, const Vector& b, const ToleranceConfig& cfg = {});

FeedbackGain pole_place(const Matrix& A, const Matrix& B, const MonicPolynomial& target,
                        const ToleranceConfig& cfg = {});

ObserverGain design_observer(const Matrix& A, const Matrix& C, const MonicPolynomial& target,
                             const ToleranceConfig& cfg = {});

struct ObserverTrajectory {
  std::vector<double> grid;
  std::vector<Vector> x;
  std::vector<Vector> x_hat;
};

/// Plant with observer-based feedback u = K x_hat and observer
/// x_hat' = (A + L C) x_hat - L y + B u.
class ObserverLoop {
 public:
  ObserverLoop(const Matrix& A, const Matrix& B, const Matrix& C, const Matrix& K, const Matrix& L);

  /// Coordinates (x, e = x_hat - x): [[A + BK, BK], [0, A + LC]].
  const Matrix& error_coordinates() const { return error_matrix_; }
  /// Coordinates (x, x_hat): [[A, BK], [-LC, A + LC + BK]].
  const Matrix& state_coordinates() const { return state_matrix_; }
  int n() const { return n_; }

  ObserverTrajectory simulate(const Vector& x0, const Vector& x_hat0, std::span<const double> grid,
                              const ToleranceConfig& cfg = {}) const;

 private:
  int n_;
  Matrix error_matrix_;
  Matrix state_matrix_;
};

ObserverLoop closed_loop_observer_system(const Matrix& A, const Matrix& B, const Matrix& C,
                                         const Matrix& K, const Matrix& L);

/// Feedback K = -B^T Q^{-1} where (A + lambda I) Q + Q (A + lambda I)^T = B B^T.
/// Closed-loop decay rate is at least lambda.
GramianStabilizer gramian_stabilizer(const Matrix& A, const Matrix& B, double lambda,
                                     const ToleranceConfig& cfg = {});

}  // namespace linctl
