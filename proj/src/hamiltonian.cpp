#include "kds/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "kds/errors.hpp"
#include "kds/ode.hpp"
#include "kds/random.hpp"

namespace kds {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Pieces shared by both charts.
struct Frame8 {
  double r, theta;
  double s, ct, s2, c, dc;
  double mu, dmu;
  double a, a2, b, b2;
  double r2a2;
};

Frame8 frame_of(const SpacetimeParams& p, double r, double theta) {
  Frame8 f;
  f.r = r;
  f.theta = theta;
  f.s = std::sin(theta);
  f.ct = std::cos(theta);
  f.s2 = f.s * f.s;
  f.c = p.c_theta(theta);
  f.dc = p.c_theta_prime(theta);
  f.mu = p.mu(r);
  f.dmu = p.mu_prime(r);
  f.a = p.a();
  f.a2 = f.a * f.a;
  f.b = p.b();
  f.b2 = f.b * f.b;
  f.r2a2 = r * r + f.a2;
  return f;
}

// theta part b^2 S^2 / U, U = c sin^2 theta, S = a sin^2 xi_t + xi_phi, and derivatives.
struct AngularPart {
  double value, d_xi_t, d_xi_phi, d_theta;
};

AngularPart angular_part(const Frame8& f, double xi_t, double xi_phi) {
  const double S = f.a * f.s2 * xi_t + xi_phi;
  const double U = f.c * f.s2;
  const double dS = 2.0 * f.a * f.s * f.ct * xi_t;
  const double dU = f.dc * f.s2 + 2.0 * f.c * f.s * f.ct;
  AngularPart out;
  out.value = f.b2 * S * S / U;
  out.d_xi_t = 2.0 * f.b2 * S * f.a * f.s2 / U;
  out.d_xi_phi = 2.0 * f.b2 * S / U;
  out.d_theta = f.b2 * (2.0 * S * dS / U - S * S * dU / (U * U));
  return out;
}

}  // namespace

double momentum_scale(const PhasePoint& point) {
  double m = 0;
  for (double v : point.xi) m = std::max(m, v * v);
  return m;
}

double hamiltonian_q(const Geometry& geometry, const PhasePoint& point) {
  const auto& p = geometry.params;
  const double r = point.r();
  if (point.chart == Chart::BoyerLindquist && !(r > p.r_e() && r < p.r_c())) {
    throw Error(ErrorCode::ChartDomain, "Boyer-Lindquist Hamiltonian needs r in (r_e, r_c)");
  }
  const Frame8 f = frame_of(p, r, point.theta());
  const auto [xt, xr, xp, xth] = point.xi;
  const double X = f.r2a2 * xt + f.a * xp;
  const double ang = angular_part(f, xt, xp).value + f.c * xth * xth;
  if (point.chart == Chart::BoyerLindquist) {
    return f.mu * xr * xr + ang - f.b2 * X * X / f.mu;
  }
  const double fr = geometry.gauge.f(r);
  const double h = f.b2 * geometry.gauge.dr_coefficient(r);
  return f.mu * xr * xr - 2.0 * f.b * fr * xr * X - h * X * X + ang;
}

PhaseVelocity hamilton_equations(const Geometry& geometry, const PhasePoint& point) {
  const auto& p = geometry.params;
  const double r = point.r();
  if (point.chart == Chart::BoyerLindquist && !(r > p.r_e() && r < p.r_c())) {
    throw Error(ErrorCode::ChartDomain, "Boyer-Lindquist Hamiltonian needs r in (r_e, r_c)");
  }
  const Frame8 f = frame_of(p, r, point.theta());
  const auto [xt, xr, xp, xth] = point.xi;
  const double X = f.r2a2 * xt + f.a * xp;
  const double dX_dr = 2.0 * r * xt;
  const AngularPart ang = angular_part(f, xt, xp);

  double dq_dxt, dq_dxr, dq_dxp, dq_dr;
  const double dq_dxth = 2.0 * f.c * xth;
  const double dq_dth = ang.d_theta + f.dc * xth * xth;

  if (point.chart == Chart::BoyerLindquist) {
    dq_dxt = ang.d_xi_t - 2.0 * f.b2 * X * f.r2a2 / f.mu;
    dq_dxr = 2.0 * f.mu * xr;
    dq_dxp = ang.d_xi_phi - 2.0 * f.b2 * X * f.a / f.mu;
    dq_dr = f.dmu * xr * xr - f.b2 * (2.0 * X * dX_dr / f.mu - X * X * f.dmu / (f.mu * f.mu));
  } else {
    const double fr = geometry.gauge.f(r);
    const double dfr = geometry.gauge.f_prime(r);
    const double h = f.b2 * geometry.gauge.dr_coefficient(r);
    const double dh = f.b2 * geometry.gauge.dr_coefficient_prime(r);
    dq_dxt = -2.0 * f.b * fr * xr * f.r2a2 - 2.0 * h * X * f.r2a2 + ang.d_xi_t;
    dq_dxr = 2.0 * f.mu * xr - 2.0 * f.b * fr * X;
    dq_dxp = -2.0 * f.b * fr * xr * f.a - 2.0 * h * X * f.a + ang.d_xi_phi;
    dq_dr = f.dmu * xr * xr - 2.0 * f.b * dfr * xr * X - 2.0 * f.b * fr * xr * dX_dr - dh * X * X -
            2.0 * h * X * dX_dr;
  }
  return {dq_dxt, dq_dxr, dq_dxp, dq_dxth, 0.0, -dq_dr, 0.0, -dq_dth};
}

ConservedSet conserved(const Geometry& geometry, const PhasePoint& point) {
  const Frame8 f = frame_of(geometry.params, point.r(), point.theta());
  ConservedSet out;
  out.q = hamiltonian_q(geometry, point);
  out.xi_t = point.xi[0];
  out.xi_phi = point.xi[2];
  out.carter = angular_part(f, point.xi[0], point.xi[2]).value + f.c * point.xi[3] * point.xi[3];
  return out;
}

PhasePoint to_starred(const Geometry& geometry, const PhasePoint& bl) {
  if (bl.chart == Chart::Starred) return bl;
  const auto& g = geometry.gauge;
  const double r = bl.r();
  PhasePoint out = bl;
  out.chart = Chart::Starred;
  out.x[0] = bl.x[0] - g.phi(r);
  out.x[2] = std::remainder(bl.x[2] - g.psi(r), kTwoPi);
  if (out.x[2] < 0) out.x[2] += kTwoPi;
  out.xi[1] = bl.xi[1] + g.phi_prime(r) * bl.xi[0] + g.psi_prime(r) * bl.xi[2];
  return out;
}

PhasePoint to_boyer_lindquist(const Geometry& geometry, const PhasePoint& starred) {
  if (starred.chart == Chart::BoyerLindquist) return starred;
  const auto& g = geometry.gauge;
  const double r = starred.r();
  PhasePoint out = starred;
  out.chart = Chart::BoyerLindquist;
  out.x[0] = starred.x[0] + g.phi(r);
  out.x[2] = std::remainder(starred.x[2] + g.psi(r), kTwoPi);
  if (out.x[2] < 0) out.x[2] += kTwoPi;
  out.xi[1] = starred.xi[1] - g.phi_prime(r) * starred.xi[0] - g.psi_prime(r) * starred.xi[2];
  return out;
}

NullProjection project_to_null(const Geometry& geometry, const PhasePoint& point,
                               NullComponent component, int branch) {
  if (branch != 1 && branch != -1) throw Error(ErrorCode::InvalidArgument, "branch must be +1 or -1");
  NullProjection out{point, component, branch};
  PhasePoint trial = point;
  if (component == NullComponent::XiTheta) {
    trial.xi[3] = 0.0;
    const double rest = hamiltonian_q(geometry, trial);
    const double c = geometry.params.c_theta(point.theta());
    if (rest > 0.0) throw Error(ErrorCode::EmptyCharacteristic, "no real xi_theta solves q = 0");
    out.point.xi[3] = branch * std::sqrt(-rest / c);
    return out;
  }
  // q is quadratic in xi_r: A xi_r^2 + B xi_r + C.
  trial.xi[1] = 0.0;
  const double C = hamiltonian_q(geometry, trial);
  trial.xi[1] = 1.0;
  const double qp = hamiltonian_q(geometry, trial);
  trial.xi[1] = -1.0;
  const double qm = hamiltonian_q(geometry, trial);
  const double A = 0.5 * (qp + qm) - C;
  const double B = 0.5 * (qp - qm);
  const double disc = B * B - 4.0 * A * C;
  if (disc < 0.0 || (A == 0.0 && B == 0.0)) {
    throw Error(ErrorCode::EmptyCharacteristic, "no real xi_r solves q = 0");
  }
  double root;
  if (A == 0.0) {
    root = -C / B;
  } else {
    // branch +1 is (-B + sqrt(disc)) / 2A, computed without cancellation
    const double sq = std::sqrt(disc);
    const double qq = -0.5 * (B + std::copysign(sq, B));
    const double plus = B >= 0.0 ? (qq != 0.0 ? C / qq : 0.0) : qq / A;
    const double minus = B >= 0.0 ? qq / A : (qq != 0.0 ? C / qq : 0.0);
    root = branch > 0 ? plus : minus;
  }
  out.point.xi[1] = root;
  return out;
}

std::string to_string(TerminalStatus status) {
  switch (status) {
    case TerminalStatus::ExitedLow: return "exited-low";
    case TerminalStatus::ExitedHigh: return "exited-high";
    case TerminalStatus::MaxParameter: return "max-parameter";
    case TerminalStatus::PoleGuard: return "pole-guard";
  }
  return "?";
}

Trajectory integrate(const Geometry& geometry, const PhasePoint& start, const FlowConfig& config) {
  if (config.direction != 1 && config.direction != -1) {
    throw Error(ErrorCode::InvalidArgument, "direction must be +1 or -1");
  }
  const double scale0 = momentum_scale(start);
  if (!(scale0 > 0.0)) throw Error(ErrorCode::InvalidArgument, "zero covector");

  const auto& hz = geometry.horizons;
  Chart chart = start.chart;
  const auto initial = conserved(geometry, start);

  ode::State<8> y;
  for (int i = 0; i < 4; ++i) {
    y[i] = start.x[i];
    y[4 + i] = start.xi[i];
  }
  auto to_point = [&](const ode::State<8>& v) {
    PhasePoint pt;
    pt.chart = chart;
    for (int i = 0; i < 4; ++i) {
      pt.x[i] = v[i];
      pt.xi[i] = v[4 + i];
    }
    return pt;
  };
  auto rhs = [&](const ode::State<8>& v, ode::State<8>& dv) {
    const double r = v[1];
    if (chart == Chart::BoyerLindquist && !(r > hz.r_e && r < hz.r_c)) {
      dv.fill(std::numeric_limits<double>::infinity());
      return;
    }
    dv = hamilton_equations(geometry, to_point(v));
  };

  Trajectory traj;
  traj.r_min = traj.r_max = start.r();
  auto record = [&](double s, const ode::State<8>& v) {
    TrajectorySample smp;
    smp.s = s;
    smp.point = to_point(v);
    const auto cs = conserved(geometry, smp.point);
    smp.q = cs.q;
    smp.carter = cs.carter;
    traj.samples.push_back(smp);
  };
  record(0.0, y);

  const ode::Tolerances tol{config.atol, config.rtol};
  ode::PiController controller;
  double s = 0.0;
  double h = config.h_init;
  long since_record = 0;
  auto& diag = traj.diagnostics;

  for (;;) {
    if (s >= config.affine_cap) {
      traj.status = TerminalStatus::MaxParameter;
      break;
    }
    h = std::min(h, config.affine_cap - s);
    if (h < config.h_min * std::max(1.0, s)) {
      throw Error(ErrorCode::StepFailure, "step size underflow at s = " + std::to_string(s) +
                                              ", r = " + std::to_string(y[1]));
    }
    ode::State<8> y_new;
    const double err = ode::dopri5_step<8>(rhs, y, config.direction * h, tol, y_new);
    if (!(err <= 1.0)) {
      ++diag.rejected;
      h *= controller.next_factor(err, false);
      continue;
    }
    const PhasePoint trial = to_point(y_new);
    double drift;
    {
      const double r = trial.r();
      if (chart == Chart::BoyerLindquist && !(r > hz.r_e && r < hz.r_c)) {
        ++diag.rejected;
        h *= 0.5;
        continue;
      }
      const auto cs = conserved(geometry, trial);
      // q and K are quadratic in xi, so their rounding floor tracks the current
      // momentum scale; near a horizon xi_r grows without bound.
      const double scale = std::max(scale0, momentum_scale(trial));
      drift = std::max(std::abs(cs.q - initial.q), std::abs(cs.carter - initial.carter)) / scale;
    }
    if (!(drift <= config.drift_tol)) {
      ++diag.drift_rejections;
      h *= 0.5;
      continue;
    }

    ++diag.accepted;
    diag.max_drift = std::max(diag.max_drift, drift);
    s += h;
    y = y_new;
    y[2] = std::fmod(y[2], kTwoPi);
    if (y[2] < 0) y[2] += kTwoPi;
    traj.r_min = std::min(traj.r_min, y[1]);
    traj.r_max = std::max(traj.r_max, y[1]);
    h *= controller.next_factor(err, true);

    const double r = y[1], th = y[3];
    bool done = false;
    if (th < config.pole_guard || th > kPi - config.pole_guard) {
      traj.status = TerminalStatus::PoleGuard;
      done = true;
    } else if (chart == Chart::BoyerLindquist) {
      const bool low = r <= hz.r_e + config.epsilon;
      const bool high = r >= hz.r_c - config.epsilon;
      if (low || high) {
        if (config.follow_horizons) {
          record(s, y);
          const PhasePoint handed = to_starred(geometry, to_point(y));
          chart = Chart::Starred;
          for (int i = 0; i < 4; ++i) {
            y[i] = handed.x[i];
            y[4 + i] = handed.xi[i];
          }
          ++diag.handoffs;
        } else {
          traj.status = low ? TerminalStatus::ExitedLow : TerminalStatus::ExitedHigh;
          done = true;
        }
      }
    } else if (r <= hz.r_min() || r >= hz.r_max()) {
      traj.status = r <= hz.r_min() ? TerminalStatus::ExitedLow : TerminalStatus::ExitedHigh;
      done = true;
    }

    ++since_record;
    if (done) {
      record(s, y);
      break;
    }
    if (config.record_stride > 0 && since_record >= config.record_stride) {
      record(s, y);
      since_record = 0;
    }
  }
  if (traj.status == TerminalStatus::MaxParameter &&
      (traj.samples.empty() || traj.samples.back().s != s)) {
    record(s, y);
  }
  traj.s_final = s;
  return traj;
}

// ---------------------------------------------------------------------------

std::optional<PhasePoint> try_orthogonal_null_at(const Geometry& geometry, const StationaryFrame& frame,
                                                 double r, double theta, double phi, double xi_phi,
                                                 double xi_theta, int branch) {
  PhasePoint pt;
  pt.chart = Chart::BoyerLindquist;
  pt.x = {0.0, r, phi, theta};
  pt.xi = {-frame.omega * xi_phi, 0.0, xi_phi, xi_theta};
  const double rest = hamiltonian_q(geometry, pt);
  if (!(rest <= 0.0) || (xi_phi == 0.0 && xi_theta == 0.0)) return std::nullopt;
  pt.xi[1] = branch * std::sqrt(-rest / geometry.params.mu(r));
  const double norm = std::sqrt(momentum_scale(pt));
  // xi_t is recomputed from the scaled xi_phi so the constraint holds exactly.
  pt.xi[1] /= norm;
  pt.xi[2] /= norm;
  pt.xi[3] /= norm;
  pt.xi[0] = -frame.omega * pt.xi[2];
  return pt;
}

PhasePoint orthogonal_null_at(const Geometry& geometry, const StationaryFrame& frame, double r,
                              double theta, double phi, double xi_phi, double xi_theta, int branch) {
  auto pt = try_orthogonal_null_at(geometry, frame, r, theta, phi, xi_phi, xi_theta, branch);
  if (!pt) {
    throw Error(ErrorCode::EmptyCharacteristic,
                "no real xi_r: T is timelike at this base point for the sampled direction");
  }
  return *pt;
}

SampleBatch sample_orthogonal_null(const Geometry& geometry, const StationaryFrame& frame,
                                   std::uint64_t seed, int count, double epsilon,
                                   std::uint64_t max_attempts) {
  if (count < 1) throw Error(ErrorCode::InvalidArgument, "count must be at least 1");
  if (max_attempts == 0) max_attempts = std::max<std::uint64_t>(20'000'000, 20'000ULL * count);
  const auto& p = geometry.params;
  const double lo = p.r_e() + epsilon, hi = p.r_c() - epsilon;
  Rng rng(seed);
  SampleBatch batch;
  while (batch.points.size() < std::size_t(count) && batch.attempts < max_attempts) {
    ++batch.attempts;
    const double r = rng.uniform(lo, hi);
    const double theta = std::acos(rng.uniform(-1.0, 1.0));
    const double phi = rng.uniform(0.0, kTwoPi);
    double v[4];
    for (double& x : v) x = rng.normal();
    const double nrm = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2] + v[3] * v[3]);
    // (xi_t, xi_r) from the sphere are replaced by the constraint and the null root.
    const double xi_phi = v[2] / nrm, xi_theta = v[3] / nrm;
    if (theta < 1e-3 || theta > kPi - 1e-3) {
      ++batch.rejected;
      continue;
    }
    const auto plus = try_orthogonal_null_at(geometry, frame, r, theta, phi, xi_phi, xi_theta, +1);
    if (!plus) {
      ++batch.rejected;
      continue;
    }
    batch.points.push_back(*plus);
    if (batch.points.size() < std::size_t(count)) {
      batch.points.push_back(*try_orthogonal_null_at(geometry, frame, r, theta, phi, xi_phi, xi_theta, -1));
    }
  }
  return batch;
}

}  // namespace kds
