#include "linctl/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include "linctl/lti.hpp"
#include "linctl/reachability.hpp"
#include "linctl/stability.hpp"

namespace linctl {

namespace {

// Coefficients of prod (s - r), lowest degree first, leading 1 included.
std::vector<Complex> expand_roots(const ComplexList& roots) {
  std::vector<Complex> c{Complex(1.0, 0.0)};
  for (const Complex& r : roots) {
    std::vector<Complex> next(c.size() + 1, Complex(0.0, 0.0));
    for (std::size_t k = 0; k < c.size(); ++k) {
      next[k + 1] += c[k];
      next[k] -= r * c[k];
    }
    c = std::move(next);
  }
  return c;
}

void require_conjugate_pairs(const ComplexList& roots) {
  std::vector<bool> used(roots.size(), false);
  for (std::size_t i = 0; i < roots.size(); ++i) {
    if (used[i]) continue;
    const Complex r = roots[i];
    const double tol = 1e-9 * (1.0 + std::abs(r));
    if (std::abs(r.imag()) <= tol) {
      used[i] = true;
      continue;
    }
    bool matched = false;
    for (std::size_t j = i + 1; j < roots.size() && !matched; ++j) {
      if (!used[j] && std::abs(roots[j] - std::conj(r)) <= tol) {
        used[i] = used[j] = true;
        matched = true;
      }
    }
    if (!matched) throw InputError("non-real target roots must come in conjugate pairs");
  }
}

MonicPolynomial real_polynomial(const std::vector<Complex>& c, const char* what) {
  const std::size_t n = c.size() - 1;
  double scale = 1.0;
  for (const Complex& v : c) scale = std::max(scale, std::abs(v));
  std::vector<double> alpha(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (std::abs(c[k].imag()) > 1e-9 * scale) {
      throw NumericalError(std::string(what) + ": polynomial expansion left an imaginary residue");
    }
    alpha[k] = -c[k].real();
  }
  return MonicPolynomial::from_alpha(std::move(alpha));
}

bool is_controllable(const Matrix& A, const Matrix& B, const ToleranceConfig& cfg) {
  return numerical_rank(kalman_matrix(A, B), cfg) == A.rows();
}

Matrix place_single(const Matrix& A, const Vector& b, const MonicPolynomial& target,
                    const ToleranceConfig& cfg) {
  const ControllerForm form = controller_form(A, b, cfg);
  const int n = static_cast<int>(A.rows());
  const std::vector<double> alpha = characteristic_polynomial(A).alpha();
  Vector f_sharp(n);
  for (int k = 0; k < n; ++k) f_sharp(k) = target.alpha()[k] - alpha[k];
  Eigen::PartialPivLU<Matrix> lu(form.T.transpose());
  return lu.solve(f_sharp).transpose();
}

}  // namespace

MonicPolynomial MonicPolynomial::from_alpha(std::vector<double> alpha) {
  for (double a : alpha) {
    if (!std::isfinite(a)) throw InputError("polynomial coefficients must be finite");
  }
  MonicPolynomial p;
  p.alpha_ = std::move(alpha);
  return p;
}

MonicPolynomial MonicPolynomial::from_roots(const ComplexList& roots) {
  for (const Complex& r : roots) {
    if (!std::isfinite(r.real()) || !std::isfinite(r.imag())) {
      throw InputError("polynomial roots must be finite");
    }
  }
  require_conjugate_pairs(roots);
  return real_polynomial(expand_roots(roots), "from_roots");
}

MonicPolynomial MonicPolynomial::from_coefficients(std::span<const double> c) {
  std::vector<double> alpha(c.size());
  for (std::size_t k = 0; k < c.size(); ++k) alpha[k] = -c[k];
  return from_alpha(std::move(alpha));
}

std::vector<double> MonicPolynomial::coefficients() const {
  std::vector<double> c(alpha_.size());
  for (std::size_t k = 0; k < c.size(); ++k) c[k] = -alpha_[k];
  return c;
}

Complex MonicPolynomial::evaluate(Complex s) const {
  Complex value(1.0, 0.0);
  for (std::size_t k = alpha_.size(); k-- > 0;) value = value * s - alpha_[k];
  return value;
}

Matrix MonicPolynomial::companion() const {
  const int n = degree();
  Matrix M = Matrix::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) M(i, i + 1) = 1.0;
  for (int k = 0; k < n; ++k) M(n - 1, k) = alpha_[k];
  return M;
}

ComplexList MonicPolynomial::roots() const {
  if (degree() == 0) return {};
  return eigenvalues(companion());
}

MonicPolynomial characteristic_polynomial(const Matrix& A) {
  require_square(A, "A");
  return real_polynomial(expand_roots(eigenvalues(A)), "characteristic_polynomial");
}

double polynomial_distance(const MonicPolynomial& a, const MonicPolynomial& b) {
  if (a.degree() != b.degree()) throw DimensionError("polynomial degrees differ");
  double scale = 1.0;
  double diff = 0.0;
  for (int k = 0; k < a.degree(); ++k) {
    scale = std::max(scale, std::abs(b.alpha()[k]));
    diff = std::max(diff, std::abs(a.alpha()[k] - b.alpha()[k]));
  }
  return diff / scale;
}

ControllerForm controller_form(const Matrix& A, const Vector& b, const ToleranceConfig& cfg) {
  require_square(A, "A");
  if (b.size() != A.rows()) throw DimensionError("b must have as many rows as A");
  if (!is_controllable(A, b, cfg)) throw PreconditionError("(A, b) is not controllable");
  const int n = static_cast<int>(A.rows());
  const MonicPolynomial chi = characteristic_polynomial(A);

  ControllerForm form;
  form.T.resize(n, n);
  form.T.col(n - 1) = b;
  for (int j = n - 1; j >= 1; --j) {
    form.T.col(j - 1) = A * form.T.col(j) - chi.alpha()[j] * b;
  }
  form.A_sharp = chi.companion();
  form.b_sharp = Vector::Zero(n);
  form.b_sharp(n - 1) = 1.0;
  return form;
}

FeedbackGain pole_place(const Matrix& A, const Matrix& B, const MonicPolynomial& target,
                        const ToleranceConfig& cfg) {
  require_square(A, "A");
  require_finite(A, "A");
  require_finite(B, "B");
  if (B.rows() != A.rows()) throw DimensionError("B must have as many rows as A");
  const int n = static_cast<int>(A.rows());
  const int p = static_cast<int>(B.cols());
  if (target.degree() != n) {
    throw DimensionError("target polynomial degree " + std::to_string(target.degree()) +
                         " does not match system order " + std::to_string(n));
  }
  if (p == 0 || !is_controllable(A, B, cfg)) throw PreconditionError("(A, B) is not controllable");

  FeedbackGain gain;
  if (p == 1) {
    gain.F = place_single(A, B.col(0), target, cfg);
  } else {
    const double tol = cfg.rank_rtol * std::max(1.0, B.norm());
    int v = 0;
    while (v < p && B.col(v).norm() <= tol) ++v;
    const Vector b = B.col(v);

    Matrix X(n, n);
    Matrix U = Matrix::Zero(p, n);
    X.col(0) = b;
    for (int i = 1; i < n; ++i) {
      const Vector base = A * X.col(i - 1);
      bool extended = false;
      for (int j = -1; j < p && !extended; ++j) {
        Vector candidate = base;
        if (j >= 0) candidate += B.col(j);
        Matrix trial(n, i + 1);
        trial.leftCols(i) = X.leftCols(i);
        trial.col(i) = candidate;
        if (numerical_rank(trial, cfg) == i + 1) {
          X.col(i) = candidate;
          if (j >= 0) U(j, i - 1) = 1.0;
          extended = true;
        }
      }
      if (!extended) throw ConditioningError("input chain stalled at length " + std::to_string(i));
    }
    Eigen::PartialPivLU<Matrix> lu(X.transpose());
    const Matrix F1 = lu.solve(U.transpose()).transpose();

    Matrix f;
    try {
      f = place_single(A + B * F1, b, target, cfg);
    } catch (const PreconditionError&) {
      throw ConditioningError("reduced single-input pair lost controllability numerically");
    }
    gain.F = F1;
    gain.F.row(v) += f.row(0);
  }

  const Matrix closed = A + B * gain.F;
  gain.achieved_spectrum = eigenvalues(closed);
  gain.residual = polynomial_distance(characteristic_polynomial(closed), target);
  if (gain.residual > kPlacementTol) {
    throw ConditioningError("placed polynomial misses the target (relative residual " +
                            std::to_string(gain.residual) + ")");
  }
  return gain;
}

ObserverGain design_observer(const Matrix& A, const Matrix& C, const MonicPolynomial& target,
                             const ToleranceConfig& cfg) {
  require_square(A, "A");
  if (C.cols() != A.rows()) throw DimensionError("C must have as many columns as A has rows");
  if (target.degree() != A.rows()) throw DimensionError("target degree does not match system order");
  for (const Complex& r : target.roots()) {
    if (!(r.real() < 0.0)) throw PreconditionError("observer target polynomial is not Hurwitz");
  }
  if (!is_controllable(A.transpose(), C.transpose(), cfg)) {
    throw PreconditionError("(A, C) is not observable");
  }
  ObserverGain out;
  out.L = pole_place(A.transpose(), C.transpose(), target, cfg).F.transpose();
  out.closed_loop_abscissa = spectral_abscissa(A + out.L * C);
  if (!(out.closed_loop_abscissa < 0.0)) {
    throw ConditioningError("observer error dynamics are not stable after placement");
  }
  return out;
}

ObserverLoop::ObserverLoop(const Matrix& A, const Matrix& B, const Matrix& C, const Matrix& K,
                           const Matrix& L)
    : n_(static_cast<int>(A.rows())) {
  require_square(A, "A");
  const Eigen::Index n = A.rows();
  if (B.rows() != n) throw DimensionError("B must have as many rows as A");
  if (C.cols() != n) throw DimensionError("C must have as many columns as A has rows");
  if (K.rows() != B.cols() || K.cols() != n) throw DimensionError("K must be p x n");
  if (L.rows() != n || L.cols() != C.rows()) throw DimensionError("L must be n x m");
  const Matrix BK = B * K;
  const Matrix LC = L * C;
  error_matrix_ = Matrix::Zero(2 * n, 2 * n);
  error_matrix_.topLeftCorner(n, n) = A + BK;
  error_matrix_.topRightCorner(n, n) = BK;
  error_matrix_.bottomRightCorner(n, n) = A + LC;
  state_matrix_.resize(2 * n, 2 * n);
  state_matrix_ << A, BK, -LC, A + LC + BK;
}

ObserverTrajectory ObserverLoop::simulate(const Vector& x0, const Vector& x_hat0,
                                          std::span<const double> grid,
                                          const ToleranceConfig& cfg) const {
  if (x0.size() != n_ || x_hat0.size() != n_) throw DimensionError("initial states must have size n");
  if (grid.empty()) throw InputError("simulation grid is empty");
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (!(grid[k] > grid[k - 1])) throw InputError("simulation grid must be strictly increasing");
  }
  const Matrix& M = state_matrix_;
  const auto rhs = [&M](double, const Vector& z) -> Vector { return M * z; };
  Vector z(2 * n_);
  z << x0, x_hat0;
  ObserverTrajectory out;
  out.grid.assign(grid.begin(), grid.end());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (k > 0) z = rk4_integrate(rhs, grid[k - 1], grid[k], z, cfg.ode_step);
    out.x.push_back(z.head(n_));
    out.x_hat.push_back(z.tail(n_));
  }
  return out;
}

ObserverLoop closed_loop_observer_system(const Matrix& A, const Matrix& B, const Matrix& C,
                                         const Matrix& K, const Matrix& L) {
  return ObserverLoop(A, B, C, K, L);
}

GramianStabilizer gramian_stabilizer(const Matrix& A, const Matrix& B, double lambda,
                                     const ToleranceConfig& cfg) {
  require_square(A, "A");
  require_finite(A, "A");
  require_finite(B, "B");
  if (B.rows() != A.rows()) throw DimensionError("B must have as many rows as A");
  if (!std::isfinite(lambda) || !(lambda > 0.0)) throw InputError("lambda must be positive");
  if (B.cols() == 0 || !is_controllable(A, B, cfg)) {
    throw PreconditionError("(A, B) is not controllable");
  }
  const int n = static_cast<int>(A.rows());
  GramianStabilizer out;
  out.lambda = lambda;
  out.min_admissible_lambda = std::max(0.0, spectral_abscissa(-A)) + 1e-6;
  if (lambda < out.min_admissible_lambda) {
    throw PreconditionError("lambda too small for the weighted Gramian to converge; minimal admissible lambda is " +
                            format_double(out.min_admissible_lambda));
  }

  const Matrix I = Matrix::Identity(n, n);
  const Matrix S = A + lambda * I;
  Matrix Q = solve_sylvester(S, S.transpose(), B * B.transpose(), cfg);
  Q = (0.5 * (Q + Q.transpose())).eval();
  Eigen::LLT<Matrix> llt(Q);
  if (llt.info() != Eigen::Success || min_symmetric_eigenvalue(Q) <= 0.0) {
    throw ConditioningError("weighted Gramian is numerically singular");
  }
  Matrix P = llt.solve(I);
  P = (0.5 * (P + P.transpose())).eval();
  out.Q = Q;
  out.P = P;
  out.K = -B.transpose() * P;
  out.inverse_residual = (P * Q - I).norm();

  const Matrix PB = P * B;
  const Matrix res = P * A + A.transpose() * P + 2.0 * lambda * P - PB * PB.transpose();
  const double scale =
      std::max(1.0, 2.0 * P.norm() * (A.norm() + lambda) + PB.squaredNorm());
  out.riccati_residual = res.norm() / scale;

  out.closed_loop_abscissa = spectral_abscissa(A + B * out.K);
  if (out.closed_loop_abscissa > -lambda + 1e-6) {
    throw ConditioningError("closed loop misses the prescribed decay rate");
  }
  return out;
}

}  // namespace linctl
