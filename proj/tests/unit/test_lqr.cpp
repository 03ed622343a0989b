#include <gtest/gtest.h>

#include <cmath>

#include "linctl/lqr.hpp"
#include "linctl/lti.hpp"
#include "linctl/stability.hpp"
#include "random_systems.hpp"

using namespace linctl;
using linctl::testing::Rng;

namespace {

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

Matrix mat2(double a, double b, double c, double d) {
  Matrix M(2, 2);
  M << a, b, c, d;
  return M;
}

Matrix hamiltonian(const LtiSystem& sys) {
  const int n = sys.n();
  Matrix H(2 * n, 2 * n);
  H << sys.A(), -sys.B() * sys.B().transpose(), -sys.C().transpose() * sys.C(), -sys.A().transpose();
  return H;
}

// Costate at t = 0 of the two-point problem x(0) = xi, lambda(T) = P0 x(T).
Vector shooting_costate(const LqrProblem& prob, const Vector& xi) {
  const int n = prob.sys.n();
  const Matrix E = expm(prob.horizon * hamiltonian(prob.sys));
  const Matrix Exx = E.topLeftCorner(n, n), Exl = E.topRightCorner(n, n);
  const Matrix Elx = E.bottomLeftCorner(n, n), Ell = E.bottomRightCorner(n, n);
  const Matrix lhs = Ell - prob.P0 * Exl;
  const Vector rhs = (prob.P0 * Exx - Elx) * xi;
  return lhs.partialPivLu().solve(rhs);
}

// Stabilizing ARE solution from the stable invariant subspace of the Hamiltonian.
Matrix hamiltonian_are(const LtiSystem& sys) {
  const int n = sys.n();
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(hamiltonian(sys).cast<Complex>());
  Eigen::MatrixXcd V(2 * n, n);
  int col = 0;
  for (int k = 0; k < 2 * n; ++k) {
    if (es.eigenvalues()(k).real() < 0) V.col(col++) = es.eigenvectors().col(k);
  }
  EXPECT_EQ(col, n);
  const Eigen::MatrixXcd P = V.bottomRows(n) * V.topRows(n).inverse();
  return P.real();
}

}  // namespace

TEST(LqrProblem, Validation) {
  const LtiSystem sys(scalar(0), scalar(1));
  EXPECT_THROW(LqrProblem(sys, scalar(-1), 1.0), PreconditionError);
  EXPECT_THROW(LqrProblem(sys, scalar(0), 0.0), DomainError);
  EXPECT_THROW(LqrProblem(LtiSystem(Matrix::Zero(2, 2), Matrix::Ones(2, 1)), mat2(1, 1, 0, 1), 1.0),
               PreconditionError);
}

TEST(RiccatiFinite, ScalarTanh) {
  const LqrProblem prob(LtiSystem(scalar(0), scalar(1), scalar(1)), scalar(0), 2.0);
  const RiccatiSolution sol = riccati_finite(prob);
  EXPECT_TRUE(sol.terminal_matches_P0);
  for (std::size_t k = 0; k < sol.grid().size(); k += 97) {
    EXPECT_NEAR(sol.samples()[k](0, 0), std::tanh(2.0 - sol.grid()[k]), 1e-8);
  }
  EXPECT_NEAR(sol.at(0.123)(0, 0), std::tanh(2.0 - 0.123), 1e-8);
  EXPECT_LT(sol.max_residual, 1e-5);
}

TEST(RiccatiFinite, DegenerateCases) {
  const LqrProblem zero_weight(LtiSystem(mat2(0, 1, 1, 0), Matrix::Ones(2, 1), Matrix::Zero(1, 2)),
                               Matrix::Zero(2, 2), 1.5);
  const RiccatiSolution zero = riccati_finite(zero_weight);
  for (const Matrix& P : zero.samples()) EXPECT_EQ(P.norm(), 0.0);

  const LqrProblem no_input(LtiSystem(Matrix::Zero(2, 2), Matrix::Zero(2, 1)), Matrix::Zero(2, 2), 3.0);
  const RiccatiSolution sol = riccati_finite(no_input);
  for (std::size_t k = 0; k < sol.grid().size(); k += 101) {
    EXPECT_LT((sol.samples()[k] - (3.0 - sol.grid()[k]) * Matrix::Identity(2, 2)).norm(), 1e-12);
  }
}

TEST(RiccatiFinite, DynamicProgrammingRestart) {
  Rng rng(71);
  const LtiSystem sys(rng.matrix(3, 3), rng.matrix(3, 2), rng.matrix(2, 3));
  const Matrix P0 = Matrix::Identity(3, 3) * 0.5;
  const RiccatiSolution full = riccati_finite(LqrProblem(sys, P0, 2.0));
  for (double s : {0.5, 1.0, 1.5}) {
    const RiccatiSolution tail = riccati_finite(LqrProblem(sys, P0, 2.0 - s));
    EXPECT_LT((full.at(s) - tail.samples().front()).norm(), 1e-8 * (1.0 + full.at(s).norm()));
  }
}

TEST(RiccatiFinite, CostateMatchesShooting) {
  Rng rng(72);
  for (int trial = 0; trial < 5; ++trial) {
    const int n = rng.integer(1, 4);
    const LtiSystem sys(rng.matrix(n, n), rng.matrix(n, rng.integer(1, 2)), rng.matrix(n, n));
    Matrix G = rng.matrix(n, n);
    const LqrProblem prob(sys, G * G.transpose(), 1.0);
    const RiccatiSolution sol = riccati_finite(prob);
    const Vector xi = rng.vector(n);
    EXPECT_LT((sol.samples().front() * xi - shooting_costate(prob, xi)).norm(), 1e-7 * (1.0 + xi.norm()));
  }
}

TEST(RiccatiFinite, MonotoneInHorizon) {
  const LtiSystem sys(mat2(0, 1, 1, 0), (Matrix(2, 1) << 0, 1).finished());
  Matrix prev = Matrix::Zero(2, 2);
  for (double T : {0.5, 1.0, 2.0, 4.0}) {
    const Matrix P = riccati_finite(LqrProblem(sys, Matrix::Zero(2, 2), T)).samples().front();
    EXPECT_GE(min_symmetric_eigenvalue(P - prev), -1e-10);
    prev = P;
  }
}

TEST(RiccatiFinite, LargeTerminalWeight) {
  // coth branch
  const LqrProblem prob(LtiSystem(scalar(0), scalar(1), scalar(1)), scalar(50.0), 1.0);
  const RiccatiSolution sol = riccati_finite(prob);
  EXPECT_NEAR(sol.samples().front()(0, 0), 1.0 / std::tanh(1.0 + std::atanh(1.0 / 50.0)), 1e-8);
}

TEST(LqrTrajectory, ValueIdentityAndAdjoint) {
  Rng rng(73);
  for (int trial = 0; trial < 5; ++trial) {
    const int n = rng.integer(1, 4);
    const LtiSystem sys(rng.matrix(n, n), rng.matrix(n, 1), Matrix::Identity(n, n));
    const LqrProblem prob(sys, Matrix::Identity(n, n), 1.5);
    const RiccatiSolution sol = riccati_finite(prob);
    const Vector xi = rng.vector(n);
    const LqrTrajectory opt = lqr_trajectory(prob, sol, xi);
    const double value = xi.dot(sol.samples().front() * xi);
    EXPECT_NEAR(opt.cost, value, 1e-6 * (1.0 + value));
    for (std::size_t k = 0; k < opt.adjoint.size(); k += 250) {
      EXPECT_LT((opt.adjoint[k] - sol.samples()[k] * opt.trajectory.states[k]).norm(), 1e-12);
    }
    const Vector u0 = -sys.B().transpose() * sol.samples().front() * xi;
    EXPECT_LT((opt.trajectory.controls.front() - u0).norm(), 1e-12);
  }
}

TEST(LqrTrajectory, PerturbationsCostMore) {
  const LtiSystem sys(mat2(0, 1, 1, 0), (Matrix(2, 1) << 0, 1).finished());
  const LqrProblem prob(sys, Matrix::Identity(2, 2), 2.0);
  const RiccatiSolution sol = riccati_finite(prob);
  Vector xi(2);
  xi << 0.4, -0.2;
  const LqrTrajectory opt = lqr_trajectory(prob, sol, xi);
  const std::vector<double>& grid = opt.trajectory.grid;
  for (int k = 1; k <= 5; ++k) {
    const double eps = 0.05 * k;
    std::vector<Vector> values;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      values.push_back(opt.trajectory.controls[i] + Vector::Constant(1, eps * std::sin(k * grid[i])));
    }
    const ControlSignal u = ControlSignal::sampled(grid, values);
    const Trajectory traj = simulate(sys, xi, u, grid);
    EXPECT_GT(evaluate_cost(prob, traj), opt.cost);
  }
}

TEST(LqrTrajectory, ValueIsQuadratic) {
  Rng rng(74);
  const LtiSystem sys(rng.matrix(3, 3), rng.matrix(3, 1));
  const LqrProblem prob(sys, Matrix::Zero(3, 3), 1.0);
  const RiccatiSolution sol = riccati_finite(prob);
  const Vector x = rng.vector(3), y = rng.vector(3);
  const auto V = [&](const Vector& v) { return lqr_trajectory(prob, sol, v).cost; };
  const double lhs = V(x + y) + V(x - y);
  const double rhs = 2.0 * V(x) + 2.0 * V(y);
  EXPECT_NEAR(lhs, rhs, 1e-7 * (1.0 + std::abs(rhs)));
}

TEST(LqrTrajectory, GridMustSpanHorizon) {
  const LqrProblem prob(LtiSystem(scalar(0), scalar(1)), scalar(0), 1.0);
  const RiccatiSolution sol = riccati_finite(prob);
  const std::vector<double> grid{0.0, 0.5};
  EXPECT_THROW(lqr_trajectory(prob, sol, Vector::Ones(1), grid), DomainError);
}

TEST(AreSolve, ScalarFixtures) {
  const AreSolution a = are_solve(LtiSystem(scalar(0), scalar(1), scalar(1)));
  EXPECT_NEAR(a.P(0, 0), 1.0, 1e-8);
  EXPECT_FALSE(a.from_identity);
  EXPECT_LT(a.closed_loop_abscissa, 0.0);

  const AreSolution b = are_solve(LtiSystem(scalar(1), scalar(1), scalar(0)));
  EXPECT_NEAR(b.P(0, 0), 2.0, 1e-8);
  EXPECT_TRUE(b.from_identity);
  EXPECT_NEAR(b.closed_loop_abscissa, -1.0, 1e-8);
}

TEST(AreSolve, MatchesHamiltonianOracle) {
  const LtiSystem pendulum(mat2(0, 1, 1, 0), (Matrix(2, 1) << 0, 1).finished());
  const AreSolution p = are_solve(pendulum);
  EXPECT_LT((p.P - hamiltonian_are(pendulum)).norm(), 1e-7);
  EXPECT_LT(p.residual, 1e-7);

  Rng rng(75);
  for (int trial = 0; trial < 8; ++trial) {
    const int n = rng.integer(1, 4);
    const LtiSystem sys(rng.matrix(n, n), rng.matrix(n, rng.integer(1, 2)), Matrix::Identity(n, n));
    const AreSolution s = are_solve(sys);
    const Matrix oracle = hamiltonian_are(sys);
    EXPECT_LT((s.P - oracle).norm(), 1e-6 * (1.0 + oracle.norm())) << "trial " << trial;
    EXPECT_LT(s.closed_loop_abscissa, 0.0);
  }
}

TEST(AreSolve, NotStabilizable) {
  Matrix A = Matrix::Zero(2, 2);
  A.diagonal() << 1.0, 2.0;
  EXPECT_THROW(are_solve(LtiSystem(A, (Matrix(2, 1) << 1, 0).finished())), FiniteCostViolationError);
}
