#include "linctl/numkernel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

namespace linctl {

void ToleranceConfig::validate() const {
  if (!(rank_rtol > 0) || !(residual_tol > 0) || !(ode_step > 0) || !(fixed_point_tol > 0) ||
      !(gramian_floor_factor > 0) || max_iter < 1) {
    throw InputError("tolerance configuration: all fields must be strictly positive");
  }
}

void require_finite(const Matrix& M, const char* what) {
  if (!M.allFinite()) {
    throw InputError(std::string(what) + " contains NaN or infinite entries");
  }
}

void require_square(const Matrix& M, const char* what) {
  if (M.rows() != M.cols()) {
    throw DimensionError(std::string(what) + " must be square, got " + std::to_string(M.rows()) +
                         "x" + std::to_string(M.cols()));
  }
}

Matrix expm(const Matrix& A) {
  require_square(A, "expm argument");
  require_finite(A, "expm argument");
  const Eigen::Index n = A.rows();
  if (n == 0) return Matrix(0, 0);

  // Pade [13/13] coefficients and the backward-error bound for ||A||_1.
  static constexpr std::array<double, 14> b = {
      64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
      129060195264000.0,   10559470521600.0,    670442572800.0,     33522128640.0,
      1323241920.0,        40840800.0,          960960.0,           16380.0,
      182.0,               1.0};
  constexpr double theta13 = 5.371920351148152;

  const double norm1 = A.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm1 > theta13) {
    squarings = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
  }
  const Matrix As = A / std::ldexp(1.0, squarings);

  const Matrix I = Matrix::Identity(n, n);
  const Matrix A2 = As * As;
  const Matrix A4 = A2 * A2;
  const Matrix A6 = A4 * A2;

  const Matrix U = As * (A6 * (b[13] * A6 + b[11] * A4 + b[9] * A2) + b[7] * A6 + b[5] * A4 +
                         b[3] * A2 + b[1] * I);
  const Matrix V =
      A6 * (b[12] * A6 + b[10] * A4 + b[8] * A2) + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * I;

  Matrix E = (V - U).partialPivLu().solve(V + U);
  for (int k = 0; k < squarings; ++k) {
    E = E * E;
  }
  return E;
}

ComplexList eigenvalues(const Matrix& A) {
  require_square(A, "eigenvalue argument");
  require_finite(A, "eigenvalue argument");
  if (A.rows() == 0) return {};
  Eigen::EigenSolver<Matrix> solver(A, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("eigenvalue iteration did not converge");
  }
  const Eigen::VectorXcd& ev = solver.eigenvalues();
  return ComplexList(ev.data(), ev.data() + ev.size());
}

ComplexList sorted_spectrum(ComplexList values) {
  std::sort(values.begin(), values.end(), [](const Complex& a, const Complex& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return values;
}

double spectrum_distance(const ComplexList& a, const ComplexList& b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  std::vector<bool> used(b.size(), false);
  double worst = 0.0;
  for (const Complex& x : sorted_spectrum(a)) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_j = 0;
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (used[j]) continue;
      const double d = std::abs(x - b[j]);
      if (d < best) {
        best = d;
        best_j = j;
      }
    }
    used[best_j] = true;
    worst = std::max(worst, best);
  }
  return worst;
}

int numerical_rank(const Matrix& A, const ToleranceConfig& cfg) {
  require_finite(A, "rank argument");
  if (A.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(A);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  if (smax == 0.0) return 0;
  const double cutoff = cfg.rank_rtol * static_cast<double>(std::max(A.rows(), A.cols())) * smax;
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff) ++rank;
  }
  return rank;
}

namespace {

Matrix sylvester_operator(const Matrix& A, const Matrix& Bm) {
  const Eigen::Index n = A.rows();
  const Eigen::Index k = Bm.rows();
  // Column-major vec: vec(A X) = (I_k (x) A) vec X, vec(X Bm) = (Bm^T (x) I_n) vec X.
  Matrix K = Matrix::Zero(n * k, n * k);
  for (Eigen::Index j = 0; j < k; ++j) {
    K.block(j * n, j * n, n, n) += A;
    for (Eigen::Index i = 0; i < k; ++i) {
      K.block(j * n, i * n, n, n).diagonal().array() += Bm(i, j);
    }
  }
  return K;
}

}  // namespace

double sylvester_residual(const Matrix& A, const Matrix& Bm, const Matrix& R, const Matrix& X) {
  return (A * X + X * Bm - R).norm();
}

Matrix solve_sylvester(const Matrix& A, const Matrix& Bm, const Matrix& R,
                       const ToleranceConfig& cfg) {
  require_square(A, "Sylvester A");
  require_square(Bm, "Sylvester Bm");
  if (R.rows() != A.rows() || R.cols() != Bm.rows()) {
    throw DimensionError("Sylvester right-hand side must be " + std::to_string(A.rows()) + "x" +
                         std::to_string(Bm.rows()));
  }
  require_finite(A, "Sylvester A");
  require_finite(Bm, "Sylvester Bm");
  require_finite(R, "Sylvester R");
  const Eigen::Index n = A.rows();
  const Eigen::Index k = Bm.rows();
  if (n == 0 || k == 0) return Matrix::Zero(n, k);

  double separation = std::numeric_limits<double>::infinity();
  const ComplexList la = eigenvalues(A);
  const ComplexList lb = eigenvalues(Bm);
  for (const Complex& a : la) {
    for (const Complex& b : lb) {
      separation = std::min(separation, std::abs(a + b));
    }
  }
  if (separation <= cfg.residual_tol) {
    throw SingularEquationError("spectra of A and -Bm intersect (separation " +
                                std::to_string(separation) + "); no unique solution");
  }

  const Matrix K = sylvester_operator(A, Bm);
  const Eigen::PartialPivLU<Matrix> lu(K);
  const Eigen::Map<const Vector> rhs(R.data(), n * k);
  Vector x = lu.solve(rhs);
  // One step of iterative refinement.
  x += lu.solve(rhs - K * x);
  Matrix X = Eigen::Map<const Matrix>(x.data(), n, k);

  const double residual = sylvester_residual(A, Bm, R, X);
  if (!X.allFinite() || residual > cfg.residual_tol * (1.0 + R.norm())) {
    throw SingularEquationError("Sylvester residual " + std::to_string(residual) +
                                " exceeds tolerance; equation is numerically singular");
  }
  return X;
}

std::vector<double> simpson_nodes(double t0, double t1, double max_spacing) {
  if (!(t1 > t0)) throw DomainError("quadrature interval must satisfy t0 < t1");
  const double length = t1 - t0;
  int half = static_cast<int>(std::ceil(length / (2.0 * max_spacing) - 1e-9));
  half = std::max(half, 1);
  const int intervals = 2 * half;
  std::vector<double> nodes(intervals + 1);
  for (int k = 0; k <= intervals; ++k) {
    nodes[k] = t0 + length * static_cast<double>(k) / intervals;
  }
  nodes.back() = t1;
  return nodes;
}

std::vector<double> simpson_weights(std::span<const double> nodes) {
  const std::size_t intervals = nodes.size() - 1;
  if (nodes.size() < 3 || intervals % 2 != 0) {
    throw InputError("Simpson weights need an even number of uniform intervals");
  }
  const double d = (nodes.back() - nodes.front()) / static_cast<double>(intervals);
  std::vector<double> w(nodes.size());
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    double c = (k == 0 || k == intervals) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
    w[k] = c * d / 3.0;
  }
  return w;
}

double integrate_simpson(std::span<const double> grid, std::span<const double> values) {
  if (grid.size() != values.size()) throw DimensionError("quadrature grid/value size mismatch");
  const std::size_t n = grid.size();
  if (n < 2) return 0.0;
  if (n == 2) return 0.5 * (grid[1] - grid[0]) * (values[0] + values[1]);

  double total = 0.0;
  std::size_t i = 0;
  for (; i + 2 < n; i += 2) {
    const double h0 = grid[i + 1] - grid[i];
    const double h1 = grid[i + 2] - grid[i + 1];
    const double f0 = values[i], f1 = values[i + 1], f2 = values[i + 2];
    total += (h0 + h1) / 6.0 *
             ((2.0 - h1 / h0) * f0 + (h0 + h1) * (h0 + h1) / (h0 * h1) * f1 + (2.0 - h0 / h1) * f2);
  }
  if (i + 1 < n) {
    // Trailing interval [x_{n-2}, x_{n-1}] from the quadratic through the last three points.
    const double h0 = grid[n - 2] - grid[n - 3];
    const double h1 = grid[n - 1] - grid[n - 2];
    const double f0 = values[n - 3], f1 = values[n - 2], f2 = values[n - 1];
    total += h1 * (f2 * (2.0 * h1 + 3.0 * h0) / (6.0 * (h0 + h1)) +
                   f1 * (h1 + 3.0 * h0) / (6.0 * h0) - f0 * h1 * h1 / (6.0 * h0 * (h0 + h1)));
  }
  return total;
}

Matrix resolvent(const LtvSystem& sys, double s, double t, const ToleranceConfig& cfg) {
  if (!sys.contains(s) || !sys.contains(t)) {
    throw DomainError("resolvent times must lie inside [" + std::to_string(sys.t0()) + ", " +
                      std::to_string(sys.t1()) + "]");
  }
  const int n = sys.n();
  Matrix R = Matrix::Identity(n, n);
  if (s == t) return R;
  auto rhs = [&sys](double tau, const Matrix& X) -> Matrix { return sys.A(tau) * X; };
  return rk4_integrate(rhs, s, t, std::move(R), cfg.ode_step);
}

TerminalResolvent::TerminalResolvent(const LtvSystem& sys, double t0, double t1,
                                     const ToleranceConfig& cfg) {
  if (!(t1 > t0)) throw DomainError("terminal resolvent needs t0 < t1");
  if (!sys.contains(t0) || !sys.contains(t1)) {
    throw DomainError("terminal resolvent interval lies outside the system interval");
  }
  nodes_ = simpson_nodes(t0, t1, cfg.ode_step);
  const std::size_t count = nodes_.size();
  const int n = sys.n();
  values_.resize(count);
  slopes_.resize(count);

  // Phi(s) = R(t1, s) solves Phi' = -Phi A(s), Phi(t1) = I.
  auto rhs = [&sys](double s, const Matrix& Phi) -> Matrix { return -Phi * sys.A(s); };
  values_[count - 1] = Matrix::Identity(n, n);
  for (std::size_t k = count - 1; k > 0; --k) {
    const double h = nodes_[k - 1] - nodes_[k];
    values_[k - 1] = rk4_step(rhs, nodes_[k], values_[k], h);
  }
  for (std::size_t k = 0; k < count; ++k) {
    slopes_[k] = rhs(nodes_[k], values_[k]);
  }
}

Matrix TerminalResolvent::at(double s) const {
  const double lo = nodes_.front();
  const double hi = nodes_.back();
  const double slack = 1e-12 * (1.0 + std::abs(lo) + std::abs(hi));
  if (s < lo - slack || s > hi + slack) {
    throw DomainError("terminal resolvent queried outside its interval");
  }
  s = std::clamp(s, lo, hi);
  auto it = std::upper_bound(nodes_.begin(), nodes_.end(), s);
  std::size_t k = (it == nodes_.begin()) ? 0 : static_cast<std::size_t>(it - nodes_.begin()) - 1;
  if (k >= nodes_.size() - 1) k = nodes_.size() - 2;
  const double a = nodes_[k];
  const double h = nodes_[k + 1] - a;
  const double tau = (s - a) / h;
  if (tau == 0.0) return values_[k];
  if (tau == 1.0) return values_[k + 1];
  const double t2 = tau * tau;
  const double t3 = t2 * tau;
  const double h00 = 2 * t3 - 3 * t2 + 1;
  const double h10 = t3 - 2 * t2 + tau;
  const double h01 = -2 * t3 + 3 * t2;
  const double h11 = t3 - t2;
  return h00 * values_[k] + (h10 * h) * slopes_[k] + h01 * values_[k + 1] +
         (h11 * h) * slopes_[k + 1];
}

}  // namespace linctl
