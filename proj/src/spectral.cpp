#include "kds/spectral.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/special_functions/legendre.hpp>

#include "kds/errors.hpp"

namespace kds::spectral {

std::vector<double> chebyshev_points(int n) {
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "need at least two Chebyshev points");
  std::vector<double> x(n);
  for (int j = 0; j < n; ++j) {
    // sin form keeps the nodes exactly antisymmetric
    x[j] = std::sin(std::numbers::pi * double(n - 1 - 2 * j) / (2.0 * double(n - 1)));
  }
  return x;
}

Eigen::MatrixXd differentiation_matrix(const std::vector<double>& x) {
  const int n = static_cast<int>(x.size());
  std::vector<double> w(n, 1.0);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      if (k != j) w[j] *= (x[j] - x[k]);
  for (auto& v : w) v = 1.0 / v;
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    double row = 0;
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      D(i, j) = (w[j] / w[i]) / (x[i] - x[j]);
      row += D(i, j);
    }
    D(i, i) = -row;
  }
  return D;
}

GaussRule gauss_legendre(int n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "Gauss rule needs n >= 1");
  // boost returns the nonnegative zeros in increasing order
  const auto pos = boost::math::legendre_p_zeros<double>(n);
  GaussRule g;
  for (auto it = pos.rbegin(); it != pos.rend(); ++it) {
    if (*it != 0.0) g.x.push_back(-*it);
  }
  for (double z : pos) g.x.push_back(z);
  for (double z : g.x) {
    const double d = boost::math::legendre_p_prime(n, z);
    g.w.push_back(2.0 / ((1.0 - z * z) * d * d));
  }
  return g;
}

void normalized_legendre(int m, int count, double theta, double* values, double* d_theta) {
  if (m < 0 || count < 1) throw Error(ErrorCode::InvalidArgument, "bad Legendre order or count");
  const double x = std::cos(theta), s = std::sin(theta);
  double pmm = std::sqrt(0.5);
  for (int k = 1; k <= m; ++k) pmm *= s * std::sqrt((2.0 * k + 1.0) / (2.0 * k));
  double prev = 0, cur = pmm;
  for (int i = 0; i < count; ++i) {
    const int l = m + i;
    if (i == 1) {
      prev = cur;
      cur = x * std::sqrt(2.0 * m + 3.0) * pmm;
    } else if (i > 1) {
      const double al = std::sqrt((4.0 * l * l - 1.0) / (double(l) * l - double(m) * m));
      const double al1 = std::sqrt((4.0 * (l - 1.0) * (l - 1.0) - 1.0) /
                                   ((l - 1.0) * (l - 1.0) - double(m) * m));
      const double next = al * (x * cur - prev / al1);
      prev = cur;
      cur = next;
    }
    values[i] = cur;
    if (d_theta) {
      const double lower =
          (i == 0) ? 0.0
                   : std::sqrt((2.0 * l + 1.0) / (2.0 * l - 1.0) * (double(l) * l - double(m) * m)) * prev;
      d_theta[i] = (l * x * cur - lower) / s;
    }
  }
}

}  // namespace kds::spectral
