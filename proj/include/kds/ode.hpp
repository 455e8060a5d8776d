#pragma once

// Dormand-Prince 5(4) trial step. Step-size control lives in the caller so it
// can fold extra acceptance criteria (invariant drift, chart limits) into the
// same accept/reject decision.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>

namespace kds::ode {

template <std::size_t N>
using State = std::array<double, N>;

struct Tolerances {
  double atol = 1e-10;
  double rtol = 1e-10;
};

// Advances y by h and returns the scaled error norm (accept when <= 1).
// A non-finite stage makes the norm +inf.
template <std::size_t N, class Rhs>
double dopri5_step(Rhs&& rhs, const State<N>& y, double h, const Tolerances& tol, State<N>& y_out) {
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                   a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                   a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                   b6 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                   e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
  (void)c2, (void)c3, (void)c4, (void)c5;

  State<N> k1, k2, k3, k4, k5, k6, k7, tmp;
  auto stage = [&](State<N>& k, auto&& combine) {
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * combine(i);
    rhs(tmp, k);
  };
  rhs(y, k1);
  stage(k2, [&](std::size_t i) { return a21 * k1[i]; });
  stage(k3, [&](std::size_t i) { return a31 * k1[i] + a32 * k2[i]; });
  stage(k4, [&](std::size_t i) { return a41 * k1[i] + a42 * k2[i] + a43 * k3[i]; });
  stage(k5, [&](std::size_t i) { return a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]; });
  stage(k6, [&](std::size_t i) {
    return a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i];
  });
  for (std::size_t i = 0; i < N; ++i) {
    y_out[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
  }
  rhs(y_out, k7);

  double err2 = 0;
  for (std::size_t i = 0; i < N; ++i) {
    const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
    const double sc = tol.atol + tol.rtol * std::max(std::abs(y[i]), std::abs(y_out[i]));
    err2 += (e / sc) * (e / sc);
  }
  const double err = std::sqrt(err2 / double(N));
  return std::isfinite(err) ? err : std::numeric_limits<double>::infinity();
}

// PI step-size controller (Hairer/Wanner, alpha = 0.7/5, beta = 0.4/5).
class PiController {
 public:
  double next_factor(double err, bool accepted) {
    constexpr double alpha = 0.7 / 5.0, beta = 0.4 / 5.0, safety = 0.9;
    if (!std::isfinite(err)) return 0.25;
    err = std::max(err, 1e-10);
    double fac = safety * std::pow(err, -alpha);
    if (accepted) {
      fac *= std::pow(prev_err_, beta);
      prev_err_ = std::max(err, 1e-4);
    }
    fac = std::clamp(fac, 0.2, accepted ? 5.0 : 1.0);
    return fac;
  }

 private:
  double prev_err_ = 1e-4;
};

}  // namespace kds::ode
