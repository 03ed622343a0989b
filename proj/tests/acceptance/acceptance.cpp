#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "linctl/cli.hpp"
#include "linctl/lqr.hpp"
#include "linctl/lti.hpp"
#include "linctl/nonlinear.hpp"
#include "linctl/observability.hpp"
#include "linctl/reachability.hpp"
#include "linctl/stability.hpp"
#include "linctl/synthesis.hpp"
#include "charpoly_oracle.hpp"
#include "random_systems.hpp"

using namespace linctl;
using linctl::testing::Rng;
using linctl::testing::charpoly_by_interpolation;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail = what;
    pass = pass && ok;
  }
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

Matrix mat2(double a, double b, double c, double d) {
  Matrix M(2, 2);
  M << a, b, c, d;
  return M;
}

Matrix col2(double a, double b) {
  Matrix M(2, 1);
  M << a, b;
  return M;
}

ComplexList stable_roots(Rng& rng, int n) {
  ComplexList roots;
  while (static_cast<int>(roots.size()) < n) {
    if (n - static_cast<int>(roots.size()) >= 2 && rng.chance(0.3)) {
      const double re = rng.uniform(-3.0, -0.5), im = rng.uniform(0.3, 2.0);
      roots.emplace_back(re, im);
      roots.emplace_back(re, -im);
    } else {
      roots.emplace_back(-0.5 - 0.6 * static_cast<double>(roots.size()) - rng.uniform(0.0, 0.3), 0.0);
    }
  }
  return roots;
}

// Simpson on a uniform grid with an even number of intervals.
double simpson(const std::vector<double>& f, double h) {
  const std::size_t N = f.size() - 1;
  double s = f.front() + f.back();
  for (std::size_t k = 1; k < N; ++k) s += (k % 2 == 1 ? 4.0 : 2.0) * f[k];
  return s * h / 3.0;
}

Verdict controllability_equivalence() {
  Verdict v;
  Rng rng(1001);
  int disagreements = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = rng.integer(1, 6), p = rng.integer(1, 3);
    const linctl::testing::Pair pair = linctl::testing::random_pair(rng, n, p);
    const LtiSystem sys(pair.A, pair.B);
    const bool kalman = kalman_test(sys).controllable;
    const bool hautus = hautus_test(sys).pass;
    const bool gramian = controllability_gramian(sys, 0.0, 1.0).invertible;
    if (kalman != hautus || kalman != gramian) ++disagreements;
  }
  v.require(disagreements == 0, std::to_string(disagreements) + " disagreements");
  return v;
}

Verdict pendulum_fixture() {
  Verdict v;
  const VectorField vf = pendulum_field();
  const ReferenceTrajectory ref =
      ReferenceTrajectory::equilibrium(vf, col2(std::numbers::pi, 0.0), Vector::Zero(1), 0.0, 1.0);
  const LtvSystem lin = linearize_along(vf, ref);
  v.require(lin.A(0.5) == mat2(0, 1, 1, 0), "A differs");
  v.require(lin.B(0.5) == col2(0, 1), "B differs");
  const ControllabilityReport r = kalman_test(LtiSystem(lin.A(0.0), lin.B(0.0)));
  v.require(r.rank == 2, "Kalman rank " + std::to_string(r.rank));
  return v;
}

Verdict duality() {
  Verdict v;
  Rng rng(1003);
  int disagreements = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = rng.integer(1, 6), m = rng.integer(1, 3);
    const linctl::testing::Pair pair = linctl::testing::random_pair(rng, n, m);
    const Matrix A = pair.A.transpose(), C = pair.B.transpose();
    const bool obs = observability_test(A, C, 1.0).observable;
    const bool ctrl = kalman_test(LtiSystem(A.transpose(), C.transpose())).controllable;
    if (obs != ctrl || !duality_check(A, C)) ++disagreements;
  }
  v.require(disagreements == 0, std::to_string(disagreements) + " disagreements");
  return v;
}

Verdict lyapunov() {
  Verdict v;
  Rng rng(1004);
  const ToleranceConfig cfg;
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = rng.integer(1, 6);
    const Matrix A = linctl::testing::random_stable(rng, n, 0.5, 1.0);
    const Matrix R = Matrix::Identity(n, n);
    const StabilityReport r = lyapunov_certificate(A, R, cfg);
    const Matrix& Q = *r.lyapunov_Q;
    v.require(r.residual <= cfg.residual_tol * (1.0 + R.norm()), "residual " + num(r.residual));
    v.require(min_symmetric_eigenvalue(Q) >= 0.0, "Q not PSD");
    const int N = 24000;
    const double T = 60.0, h = T / N;
    const Matrix step = expm(h * A);
    Matrix E = Matrix::Identity(n, n), sum = Matrix::Zero(n, n);
    for (int k = 0; k <= N; ++k) {
      const double w = (k == 0 || k == N) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
      sum += w * E.transpose() * R * E;
      E = E * step;
    }
    worst = std::max(worst, (Q - sum * h / 3.0).norm());
  }
  v.require(worst <= 1e-6, "quadrature gap " + num(worst));
  return v;
}

Verdict pole_placement() {
  Verdict v;
  Rng rng(1005);
  double worst = 0.0;
  int attempted = 0;
  while (attempted < 100) {
    const int n = rng.integer(1, 5), p = rng.integer(1, 3);
    const Matrix A = rng.matrix(n, n), B = rng.matrix(n, p);
    if (!kalman_test(LtiSystem(A, B)).controllable) continue;
    ++attempted;
    const MonicPolynomial target = MonicPolynomial::from_roots(stable_roots(rng, n));
    try {
      const FeedbackGain g = pole_place(A, B, target);
      const std::vector<double> c = charpoly_by_interpolation(A + B * g.F);
      double scale = 1.0, diff = 0.0;
      for (int k = 0; k < n; ++k) {
        scale = std::max(scale, std::abs(target.coefficients()[k]));
        diff = std::max(diff, std::abs(c[k] - target.coefficients()[k]));
      }
      worst = std::max(worst, diff / scale);
    } catch (const Error& e) {
      v.require(false, std::string("pole_place threw ") + e.name());
    }
  }
  v.require(worst <= 1e-6, "relative coefficient gap " + num(worst));
  const FeedbackGain di = pole_place(mat2(0, 1, 0, 0), col2(0, 1),
                                     MonicPolynomial::from_roots({Complex(-1, 0), Complex(-1, 0)}));
  v.require(std::abs(di.F(0, 0) + 1.0) < 1e-12 && std::abs(di.F(0, 1) + 2.0) < 1e-12, "double integrator F");
  return v;
}

Verdict observer_loop() {
  Verdict v;
  Rng rng(1006);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = rng.integer(2, 4);
    const Matrix A = rng.matrix(n, n), B = rng.matrix(n, 1), C = rng.matrix(1, n);
    const Matrix K = pole_place(A, B, MonicPolynomial::from_roots(stable_roots(rng, n))).F;
    const Matrix L = design_observer(A, C, MonicPolynomial::from_roots(stable_roots(rng, n))).L;
    const ObserverLoop loop(A, B, C, K, L);
    ComplexList expected = eigenvalues(A + B * K);
    for (const Complex& z : eigenvalues(A + L * C)) expected.push_back(z);
    worst = std::max(worst, spectrum_distance(eigenvalues(loop.error_coordinates()), expected));
  }
  v.require(worst <= 1e-8, "separation gap " + num(worst));

  const Matrix A = mat2(0, 1, 1, 0), B = col2(0, 1);
  Matrix C(1, 2);
  C << 1, 0;
  const Matrix K = pole_place(A, B, MonicPolynomial::from_roots({Complex(-1, 0), Complex(-1.5, 0)})).F;
  const ObserverGain og = design_observer(A, C, MonicPolynomial::from_roots({Complex(-2, 0), Complex(-3, 0)}));
  const ObserverLoop loop(A, B, C, K, og.L);
  const ObserverTrajectory traj = loop.simulate(col2(0.5, 0.0), col2(0.0, 0.2), uniform_grid(0.0, 8.0, 81));
  const std::size_t mid = traj.grid.size() / 2;
  const double e_mid = (traj.x_hat[mid] - traj.x[mid]).norm();
  const double e_end = (traj.x_hat.back() - traj.x.back()).norm();
  const double rate = -(std::log(e_end) - std::log(e_mid)) / (traj.grid.back() - traj.grid[mid]);
  v.require(rate >= 0.9 * std::abs(og.closed_loop_abscissa), "error decay rate " + num(rate));
  return v;
}

Verdict riccati_finite_horizon() {
  Verdict v;
  const LqrProblem scalar(LtiSystem(Matrix::Zero(1, 1), Matrix::Ones(1, 1), Matrix::Ones(1, 1)),
                          Matrix::Zero(1, 1), 2.0);
  const RiccatiSolution sol = riccati_finite(scalar);
  double tanh_err = 0.0;
  for (std::size_t k = 0; k < sol.grid().size(); ++k) {
    tanh_err = std::max(tanh_err, std::abs(sol.samples()[k](0, 0) - std::tanh(2.0 - sol.grid()[k])));
  }
  v.require(tanh_err <= 1e-8, "tanh error " + num(tanh_err));

  Rng rng(1007);
  double dp_err = 0.0, value_err = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const int n = rng.integer(1, 4);
    const LtiSystem sys(rng.matrix(n, n), rng.matrix(n, rng.integer(1, 2)), rng.matrix(n, n));
    const LqrProblem prob(sys, Matrix::Identity(n, n), 1.5);
    const RiccatiSolution full = riccati_finite(prob);
    const RiccatiSolution tail = riccati_finite(LqrProblem(sys, prob.P0, 1.0));
    dp_err = std::max(dp_err, (full.at(0.5) - tail.samples().front()).norm() / (1.0 + full.at(0.5).norm()));
    const Vector xi = rng.vector(n);
    const double value = xi.dot(full.samples().front() * xi);
    value_err = std::max(value_err, std::abs(lqr_trajectory(prob, full, xi).cost - value) / (1.0 + value));
  }
  v.require(dp_err <= 1e-8, "restart gap " + num(dp_err));
  v.require(value_err <= 1e-6, "value identity gap " + num(value_err));
  return v;
}

Verdict algebraic_riccati() {
  Verdict v;
  const AreSolution a = are_solve(LtiSystem(Matrix::Zero(1, 1), Matrix::Ones(1, 1), Matrix::Ones(1, 1)));
  v.require(std::abs(a.P(0, 0) - 1.0) <= 1e-8, "P=1 fixture gave " + num(a.P(0, 0)));
  const AreSolution b = are_solve(LtiSystem(Matrix::Ones(1, 1), Matrix::Ones(1, 1), Matrix::Zero(1, 1)));
  v.require(std::abs(b.P(0, 0) - 2.0) <= 1e-8, "P=2 fixture gave " + num(b.P(0, 0)));

  Rng rng(1008);
  int done = 0;
  double worst = 0.0, omega = -1e300, worst_P = 0.0;
  int over = 0;
  while (done < 50) {
    const int n = rng.integer(1, 5), p = rng.integer(1, 2);
    const Matrix A = rng.matrix(n, n), B = rng.matrix(n, p);
    if (!is_stabilizable(A, B)) continue;
    ++done;
    const LtiSystem sys(A, B, rng.matrix(rng.integer(1, n), n));
    try {
      const AreSolution s = are_solve(sys);
      worst = std::max(worst, s.residual);
      if (s.residual > 1e-6) {
        ++over;
        worst_P = std::max(worst_P, s.P.norm());
      }
      omega = std::max(omega, s.closed_loop_abscissa);
    } catch (const Error& e) {
      v.require(false, std::string("are_solve threw ") + e.name());
    }
  }
  v.require(worst <= 1e-6, std::to_string(over) + " of 50 draws with residual above 1e-6 (worst " + num(worst) +
                              ", largest ||P|| " + num(worst_P) + ")");
  v.require(omega < 0.0, "closed-loop abscissa " + num(omega));
  return v;
}

Verdict gramian_stabilization() {
  Verdict v;
  const GramianStabilizer s = gramian_stabilizer(Matrix::Ones(1, 1), Matrix::Ones(1, 1), 2.0);
  v.require(std::abs(s.Q(0, 0) - 1.0 / 6.0) <= 1e-10 && std::abs(s.P(0, 0) - 6.0) <= 1e-10, "scalar fixture");

  Rng rng(1009);
  const double lambdas[] = {0.5, 1.0, 2.0};
  int done = 0;
  while (done < 50) {
    const int n = rng.integer(1, 5), p = rng.integer(1, 2);
    Matrix A = rng.matrix(n, n);
    const Matrix B = rng.matrix(n, p);
    if (!kalman_test(LtiSystem(A, B)).controllable) continue;
    const double lambda = lambdas[done % 3];
    // keep lambda above the admissibility bound omega(-A)
    const double excess = spectral_abscissa(-A) - 0.4 * lambda;
    if (excess > 0.0) A += excess * Matrix::Identity(n, n);
    ++done;
    const GramianStabilizer gs = gramian_stabilizer(A, B, lambda);
    v.require(gs.closed_loop_abscissa <= -lambda + 1e-6, "abscissa " + num(gs.closed_loop_abscissa));
    const LtiSystem closed(A + B * gs.K, Matrix::Zero(n, 1));
    const std::vector<double> grid = uniform_grid(0.0, 3.0, 31);
    const Trajectory traj = simulate(closed, rng.vector(n), ControlSignal::zero(1, 0.0, 3.0), grid);
    const double V0 = traj.states.front().dot(gs.P * traj.states.front());
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double V = traj.states[k].dot(gs.P * traj.states[k]);
      v.require(V <= std::exp(-2.0 * lambda * grid[k]) * V0 * (1.0 + 1e-9) + 1e-300, "Lyapunov decay");
    }
  }
  return v;
}

Verdict min_energy_steering() {
  Verdict v;
  Rng rng(1010);
  const ToleranceConfig cfg;
  double worst_endpoint = 0.0, hardest = 1e300;
  int beaten = 0, tasks = 0, missed = 0;
  while (tasks < 100) {
    const int n = rng.integer(1, 5), p = rng.integer(1, 3);
    const Matrix A = rng.matrix(n, n), B = rng.matrix(n, p);
    const LtiSystem sys(A, B);
    if (!kalman_test(sys).controllable) continue;
    ++tasks;
    const double T = rng.uniform(0.5, 2.0);
    const Vector x0 = rng.vector(n), x1 = rng.vector(n);
    MinEnergyControl mec = [&] {
      try {
        return min_energy_control(sys, 0.0, T, x0, x1, cfg);
      } catch (const UncontrollableIntervalError&) {
        return MinEnergyControl{ControlSignal::zero(p, 0.0, T), 0.0, Vector::Zero(n), {}};
      }
    }();
    const std::vector<double> grid = uniform_grid(0.0, T, 401);
    const double h = grid[1] - grid[0];
    const Trajectory traj = simulate(sys, x0, mec.control, grid);
    const double endpoint = (traj.final_state() - x1).norm();
    worst_endpoint = std::max(worst_endpoint, endpoint);
    if (endpoint > 1e-6) {
      ++missed;
      hardest = std::min(hardest, mec.gramian.min_eigenvalue);
    }

    std::vector<double> energy(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) energy[k] = mec.control(grid[k]).squaredNorm();
    const double base = simpson(energy, h);

    // admissible perturbation: arbitrary w plus the minimum-energy correction of its endpoint
    bool all = true;
    for (int j = 0; j < 20; ++j) {
      const Vector a = rng.vector(p), b = rng.vector(p);
      const double freq = rng.uniform(0.5, 6.0), amp = rng.uniform(0.01, 1.0);
      const ControlSignal w(0.0, T, p, [=](double t) -> Vector {
        return amp * (a * std::sin(freq * t) + b * std::cos(0.5 * freq * t));
      });
      const Vector drift = simulate(sys, Vector::Zero(n), w, std::vector<double>{0.0, T}).final_state();
      const Vector z = gramian_solve(mec.gramian, -drift);
      std::vector<double> perturbed(grid.size());
      for (std::size_t k = 0; k < grid.size(); ++k) {
        const Vector corr = B.transpose() * expm((T - grid[k]) * A.transpose()) * z;
        perturbed[k] = (mec.control(grid[k]) + w(grid[k]) + corr).squaredNorm();
      }
      if (!(simpson(perturbed, h) > base)) all = false;
    }
    if (all) ++beaten;
  }
  v.require(worst_endpoint <= 1e-6, std::to_string(missed) + " of 100 tasks above 1e-6 (worst " +
                                        num(worst_endpoint) + ", Gramian min eigenvalue " + num(hardest) + ")");
  v.require(beaten == tasks, std::to_string(tasks - beaten) + " tasks with a cheaper perturbation");
  return v;
}

Verdict nonlinear_steering() {
  Verdict v;
  const VectorField vf = pendulum_field();
  const Vector xe = col2(std::numbers::pi, 0.0);
  const ReferenceTrajectory ref = ReferenceTrajectory::equilibrium(vf, xe, Vector::Zero(1), 0.0, 1.0);
  try {
    const SteeringResult r = steer_nonlinear(vf, ref, xe + col2(0.05, 0.0), xe + col2(-0.05, 0.0));
    v.require(r.converged && r.iterations <= 20, std::to_string(r.iterations) + " iterations");
    v.require(r.terminal_error <= 1e-8, "terminal error " + num(r.terminal_error));
    for (std::size_t k = 1; k < r.error_history.size(); ++k) {
      v.require(r.error_history[k] <= 0.5 * r.error_history[k - 1], "error ratio above 0.5");
    }
  } catch (const Error& e) {
    v.require(false, std::string("steer_nonlinear threw ") + e.name());
  }
  return v;
}

Verdict cli_determinism() {
  Verdict v;
  const std::string fx = LINCTL_FIXTURES;
  const auto run = [](std::vector<std::string> args, std::string& out) {
    args.insert(args.begin(), "linctl");
    std::ostringstream o, e;
    const int code = cli::run(args, o, e);
    out = o.str();
    return code;
  };
  const std::vector<std::vector<std::string>> ok{
      {"analyze", fx + "/pendulum.json"},
      {"steer", fx + "/di.json", "--x0", "0,0", "--x1", "1,0"},
      {"lqr", fx + "/pendulum.json", "--x0", "0.1,0"},
      {"are", fx + "/scalar.json"}};
  for (const auto& args : ok) {
    std::string a, b;
    const int ca = run(args, a), cb = run(args, b);
    v.require(ca == 0 && cb == 0, args[0] + " failed");
    v.require(a == b, args[0] + " output not byte-identical");
  }
  std::string sink;
  v.require(run({"analyze", fx + "/malformed.json"}, sink) == cli::kExitInput, "malformed input exit code");
  v.require(run({"gramian-stab", fx + "/uncontrollable.json", "--lambda", "1"}, sink) == cli::kExitPrecondition,
            "uncontrollable input exit code");
  v.require(run({"steer", fx + "/uncontrollable.json", "--x0", "0,0", "--x1", "1,1"}, sink) ==
                cli::kExitPrecondition,
            "uncontrollable steering exit code");
  return v;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"controllability equivalence", controllability_equivalence},
      {"pendulum fixtures", pendulum_fixture},
      {"duality", duality},
      {"lyapunov certificate", lyapunov},
      {"pole placement", pole_placement},
      {"observer closed loop", observer_loop},
      {"riccati finite horizon", riccati_finite_horizon},
      {"algebraic riccati", algebraic_riccati},
      {"gramian stabilization", gramian_stabilization},
      {"minimum-energy steering", min_energy_steering},
      {"nonlinear steering", nonlinear_steering},
      {"cli determinism", cli_determinism},
  };
  int failures = 0;
  int index = 0;
  for (const auto& [name, check] : criteria) {
    ++index;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("uncaught: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %2d %s (%.2fs)%s%s\n", v.pass ? "PASS" : "FAIL", index, name.c_str(), secs,
                v.detail.empty() ? "" : ": ", v.detail.c_str());
    std::fflush(stdout);
    if (!v.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
