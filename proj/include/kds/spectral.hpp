#pragma once

// Building blocks for the spectral discretization: Chebyshev points and
// differentiation, Gauss-Legendre rules, orthonormal associated Legendre
// functions and barycentric interpolation.

#include <vector>

#include <Eigen/Dense>

namespace kds::spectral {

/// x_j = cos(pi j / (n - 1)), j = 0..n-1 (descending from 1 to -1).
std::vector<double> chebyshev_points(int n);

// First-derivative matrix on arbitrary distinct nodes (barycentric form,
// diagonal from the negative row sum).
Eigen::MatrixXd differentiation_matrix(const std::vector<double>& x);

// Value at t of the polynomial interpolating (x_j, f_j) on Chebyshev points of
// the second kind mapped affinely (any orientation).
template <class T>
T chebyshev_interpolate(const std::vector<double>& x, const T* f, double t);

struct GaussRule {
  std::vector<double> x, w;  // increasing nodes on [-1, 1]
};
GaussRule gauss_legendre(int n);

// Orthonormal associated Legendre functions on [-1, 1] without the
// Condon-Shortley phase, degrees l = m .. m + count - 1, at x = cos(theta)
// with theta in (0, pi). values and d_theta each receive count entries.
void normalized_legendre(int m, int count, double theta, double* values, double* d_theta);

}  // namespace kds::spectral

#include <complex>

namespace kds::spectral {

template <class T>
T chebyshev_interpolate(const std::vector<double>& x, const T* f, double t) {
  const int n = static_cast<int>(x.size());
  T num{}, den{};
  for (int j = 0; j < n; ++j) {
    const double d = t - x[j];
    if (d == 0.0) return f[j];
    double w = (j % 2 == 0) ? 1.0 : -1.0;
    if (j == 0 || j == n - 1) w *= 0.5;
    num += f[j] * (w / d);
    den += T(w / d);
  }
  return num / den;
}

}  // namespace kds::spectral
