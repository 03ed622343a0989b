#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

namespace linctl::testing {

// Coefficients of det(sI - M), lowest degree first, by sampling the
// determinant on a circle and inverting the discrete Fourier transform.
// Everything runs in long double.
inline std::vector<double> charpoly_by_interpolation(const Eigen::MatrixXd& M, double radius = 2.0) {
  using LC = std::complex<long double>;
  using CMat = Eigen::Matrix<LC, Eigen::Dynamic, Eigen::Dynamic>;
  const int n = static_cast<int>(M.rows());
  const int N = n + 1;
  const CMat Ml = M.cast<long double>().cast<LC>();
  std::vector<LC> values(N);
  for (int j = 0; j < N; ++j) {
    const long double angle = 2.0L * std::numbers::pi_v<long double> * j / N;
    const LC s = std::polar<long double>(radius, angle);
    const CMat S = s * CMat::Identity(n, n) - Ml;
    values[j] = S.partialPivLu().determinant();
  }
  std::vector<double> c(n + 1);
  for (int k = 0; k <= n; ++k) {
    LC sum = 0;
    for (int j = 0; j < N; ++j) {
      const long double angle = -2.0L * std::numbers::pi_v<long double> * j * k / N;
      sum += values[j] * std::polar<long double>(1.0L, angle);
    }
    c[k] = static_cast<double>((sum / static_cast<long double>(N)).real() / std::pow(static_cast<long double>(radius), k));
  }
  return c;
}

}  // namespace linctl::testing
