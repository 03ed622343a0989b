#include "linctl/reachability.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <string>

#include <Eigen/QR>
#include <Eigen/SVD>

namespace linctl {

Matrix kalman_matrix(const Matrix& A, const Matrix& B) {
  require_square(A, "A");
  if (B.rows() != A.rows()) throw DimensionError("B must have as many rows as A");
  const Eigen::Index n = A.rows();
  const Eigen::Index p = B.cols();
  Matrix M(n, n * p);
  if (p == 0) return M;
  M.leftCols(p) = B;
  for (Eigen::Index i = 1; i < n; ++i) {
    M.middleCols(i * p, p) = A * M.middleCols((i - 1) * p, p);
  }
  return M;
}

namespace internal {

void range_bases(const Matrix& M, int rank, Matrix& range, Matrix& complement) {
  const Eigen::Index n = M.rows();
  Matrix Q = Matrix::Identity(n, n);
  if (M.cols() > 0 && rank > 0) {
    Eigen::ColPivHouseholderQR<Matrix> qr(M);
    Q = qr.householderQ() * Matrix::Identity(n, n);
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    Eigen::Index imax = 0;
    Q.col(j).cwiseAbs().maxCoeff(&imax);
    if (Q(imax, j) < 0) Q.col(j) = -Q.col(j);
  }
  range = Q.leftCols(rank);
  complement = Q.rightCols(n - rank);
}

GramianReport gramian_from_samples(const std::vector<Matrix>& samples,
                                   const std::vector<double>& weights,
                                   const std::vector<double>& floor_terms, double t0, double t1,
                                   const ToleranceConfig& cfg) {
  const Eigen::Index n = samples.front().rows();
  const Eigen::Index p = samples.front().cols();
  const Eigen::Index rows = std::max<Eigen::Index>(static_cast<Eigen::Index>(samples.size()) * p, n);
  Matrix Zt = Matrix::Zero(rows, n);
  double floor_sq = 0.0;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const double sw = std::sqrt(weights[k]);
    Zt.middleRows(static_cast<Eigen::Index>(k) * p, p) = sw * samples[k].transpose();
    floor_sq += weights[k] * floor_terms[k] * floor_terms[k];
  }

  GramianReport report;
  report.t0 = t0;
  report.t1 = t1;
  Eigen::HouseholderQR<Matrix> qr(Zt);
  report.factor = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
  Matrix G = report.factor.transpose() * report.factor;
  report.gramian = 0.5 * (G + G.transpose());

  Eigen::JacobiSVD<Matrix> svd(report.factor);
  const auto& sv = svd.singularValues();
  const double smax = sv(0);
  const double smin = sv(sv.size() - 1);
  report.max_eigenvalue = smax * smax;
  report.min_eigenvalue = smin * smin;
  report.noise_floor = std::numeric_limits<double>::epsilon() * std::sqrt(floor_sq);
  report.invertible = smin > 0.0 && smin > cfg.gramian_floor_factor * report.noise_floor;
  return report;
}

}  // namespace internal

ControllabilityReport kalman_test(const LtiSystem& sys, const ToleranceConfig& cfg) {
  ControllabilityReport report;
  report.kalman_matrix = kalman_matrix(sys.A(), sys.B());
  report.rank = numerical_rank(report.kalman_matrix, cfg);
  report.controllable = report.rank == sys.n();
  internal::range_bases(report.kalman_matrix, report.rank, report.reachable_basis,
                        report.unreachable_basis);
  return report;
}

int hautus_rank(const Matrix& A, const Matrix& B, Complex lambda, const ToleranceConfig& cfg) {
  require_square(A, "A");
  if (B.rows() != A.rows()) throw DimensionError("B must have as many rows as A");
  const Eigen::Index n = A.rows();
  const Eigen::Index p = B.cols();
  Matrix re(n, n + p);
  re.leftCols(n) = lambda.real() * Matrix::Identity(n, n) - A;
  re.rightCols(p) = B;
  if (lambda.imag() == 0.0) return numerical_rank(re, cfg);

  Matrix im = Matrix::Zero(n, n + p);
  im.leftCols(n).diagonal().setConstant(lambda.imag());
  Matrix doubled(2 * n, 2 * (n + p));
  doubled << re, -im, im, re;
  return numerical_rank(doubled, cfg) / 2;
}

HautusReport hautus_test(const LtiSystem& sys, const ToleranceConfig& cfg) {
  HautusReport report;
  report.pass = true;
  for (const Complex& lambda : eigenvalues(sys.A())) {
    HautusRecord rec;
    rec.eigenvalue = lambda;
    rec.rank = hautus_rank(sys.A(), sys.B(), lambda, cfg);
    rec.pass = rec.rank == sys.n();
    report.pass = report.pass && rec.pass;
    report.records.push_back(rec);
  }
  return report;
}

bool is_stabilizable(const Matrix& A, const Matrix& B, const ToleranceConfig& cfg) {
  for (const Complex& lambda : eigenvalues(A)) {
    if (lambda.real() < 0.0) continue;
    if (hautus_rank(A, B, lambda, cfg) < A.rows()) return false;
  }
  return true;
}

GramianReport controllability_gramian(const LtiSystem& sys, double t0, double t1,
                                      const ToleranceConfig& cfg) {
  if (!(t0 < t1)) throw DomainError("Gramian interval must satisfy t0 < t1");
  // Substituting tau = t1 - s, the integrand is e^{tau A} B B^T e^{tau A^T}.
  const std::vector<double> nodes = simpson_nodes(0.0, t1 - t0, cfg.ode_step);
  const std::vector<double> weights = simpson_weights(nodes);
  const Matrix step = expm((nodes[1] - nodes[0]) * sys.A());
  const double b_norm = sys.B().norm();

  std::vector<Matrix> samples(nodes.size());
  std::vector<double> floor_terms(nodes.size());
  Matrix Phi = Matrix::Identity(sys.n(), sys.n());
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    samples[k] = Phi * sys.B();
    floor_terms[k] = Phi.norm() * b_norm;
    Phi = step * Phi;
  }
  return internal::gramian_from_samples(samples, weights, floor_terms, t0, t1, cfg);
}

namespace {

GramianReport ltv_gramian(const LtvSystem& sys, const TerminalResolvent& phi, double t0,
                          double t1, const ToleranceConfig& cfg) {
  const std::vector<double>& nodes = phi.nodes();
  const std::vector<double> weights = simpson_weights(nodes);
  std::vector<Matrix> samples(nodes.size());
  std::vector<double> floor_terms(nodes.size());
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const Matrix Bk = sys.B(nodes[k]);
    samples[k] = phi.values()[k] * Bk;
    floor_terms[k] = phi.values()[k].norm() * Bk.norm();
  }
  return internal::gramian_from_samples(samples, weights, floor_terms, t0, t1, cfg);
}

void check_endpoints(int n, const Vector& x0, const Vector& x1) {
  if (x0.size() != n || x1.size() != n) {
    throw DimensionError("steering endpoints must have dimension " + std::to_string(n));
  }
}

void require_invertible(const GramianReport& g) {
  if (!g.invertible) {
    throw UncontrollableIntervalError(
        "controllability Gramian is not invertible on [" + std::to_string(g.t0) + ", " +
            std::to_string(g.t1) + "] (min eigenvalue " + std::to_string(g.min_eigenvalue) + ")",
        g.min_eigenvalue);
  }
}

}  // namespace

GramianReport controllability_gramian(const LtvSystem& sys, double t0, double t1,
                                      const ToleranceConfig& cfg) {
  if (!(t0 < t1)) throw DomainError("Gramian interval must satisfy t0 < t1");
  const TerminalResolvent phi(sys, t0, t1, cfg);
  return ltv_gramian(sys, phi, t0, t1, cfg);
}

GramianReport controllability_gramian(const LtvSystem& sys, const TerminalResolvent& phi,
                                      const ToleranceConfig& cfg) {
  return ltv_gramian(sys, phi, phi.t0(), phi.t1(), cfg);
}

Vector gramian_solve(const GramianReport& report, const Vector& rhs) {
  const auto R = report.factor.triangularView<Eigen::Upper>();
  const Vector y = R.transpose().solve(rhs);
  return R.solve(y);
}

namespace {

// int_0^T e^{sA} B B^T e^{sA^T} ds from one exponential of [[-A, BB^T], [0, A^T]].
Matrix van_loan_gramian(const Matrix& A, const Matrix& B, double T) {
  const Eigen::Index n = A.rows();
  Matrix M = Matrix::Zero(2 * n, 2 * n);
  M.topLeftCorner(n, n) = -A;
  M.topRightCorner(n, n) = B * B.transpose();
  M.bottomRightCorner(n, n) = A.transpose();
  const Matrix E = expm(T * M);
  const Matrix W = E.bottomRightCorner(n, n).transpose() * E.topRightCorner(n, n);
  return 0.5 * (W + W.transpose());
}

}  // namespace

MinEnergyControl min_energy_control(const LtiSystem& sys, double t0, double t1, const Vector& x0,
                                    const Vector& x1, const ToleranceConfig& cfg) {
  check_endpoints(sys.n(), x0, x1);
  GramianReport g = controllability_gramian(sys, t0, t1, cfg);
  require_invertible(g);
  const Vector free_flight = expm((t1 - t0) * sys.A()) * x0;
  const Vector d = x1 - free_flight;
  Vector z = gramian_solve(g, d);
  // refine against the Van Loan Gramian
  const Matrix W = van_loan_gramian(sys.A(), sys.B(), t1 - t0);
  for (int sweep = 0; sweep < 3; ++sweep) z += gramian_solve(g, d - W * z);
  const double cost = z.dot(W * z);

  const Matrix At = sys.A().transpose();
  const Matrix Bt = sys.B().transpose();
  ControlSignal u(t0, t1, sys.p(), [At, Bt, z, t1](double s) -> Vector {
    return Bt * (expm((t1 - s) * At) * z);
  });
  return MinEnergyControl{std::move(u), cost, z, std::move(g)};
}

MinEnergyControl min_energy_control(const LtvSystem& sys, double t0, double t1, const Vector& x0,
                                    const Vector& x1, const ToleranceConfig& cfg) {
  check_endpoints(sys.n(), x0, x1);
  if (!(t0 < t1)) throw DomainError("steering interval must satisfy t0 < t1");
  auto phi = std::make_shared<const TerminalResolvent>(sys, t0, t1, cfg);
  GramianReport g = ltv_gramian(sys, *phi, t0, t1, cfg);
  require_invertible(g);
  const Vector free_flight = phi->values().front() * x0;
  const Vector z = gramian_solve(g, x1 - free_flight);
  const double cost = (g.factor * z).squaredNorm();

  ControlSignal u(t0, t1, sys.p(), [sys, phi, z](double s) -> Vector {
    return sys.B(s).transpose() * (phi->at(s).transpose() * z);
  });
  return MinEnergyControl{std::move(u), cost, z, std::move(g)};
}

KalmanDecomposition kalman_decomposition(const LtiSystem& sys, const ToleranceConfig& cfg) {
  const ControllabilityReport ctrl = kalman_test(sys, cfg);
  const int n = sys.n();
  const int r = ctrl.rank;
  KalmanDecomposition out;
  out.r = r;
  out.T.resize(n, n);
  out.T << ctrl.reachable_basis, ctrl.unreachable_basis;
  out.A_tilde = out.T.transpose() * sys.A() * out.T;
  out.B_tilde = out.T.transpose() * sys.B();
  out.A1 = out.A_tilde.topLeftCorner(r, r);
  out.A2 = out.A_tilde.topRightCorner(r, n - r);
  out.A3 = out.A_tilde.bottomRightCorner(n - r, n - r);
  out.B1 = out.B_tilde.topRows(r);
  return out;
}

}  // namespace linctl
