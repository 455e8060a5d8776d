#include "kds/trapping.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/tools/roots.hpp>

#include "kds/errors.hpp"
#include "kds/parallel.hpp"
#include "kds/random.hpp"

namespace kds {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kPolishR = 64, kPolishXiT = 256;

double sign(double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }

void require_band(const SpacetimeParams& p, double r) {
  if (!(r > p.r_e() && r < p.r_c())) {
    throw Error(ErrorCode::ChartDomain, "F is defined on (r_e, r_c) only");
  }
}

double band_lo(const SpacetimeParams& p, double epsilon) { return p.r_e() + epsilon; }
double band_hi(const SpacetimeParams& p, double epsilon) { return p.r_c() - epsilon; }

// H_q r and H_q^2 r at a point of the Boyer-Lindquist chart.
struct RadialDerivatives {
  double first, second;
};

RadialDerivatives radial_derivatives(const Geometry& g, const PhasePoint& pt) {
  const auto v = hamilton_equations(g, pt);
  const double mu = g.params.mu(pt.r()), dmu = g.params.mu_prime(pt.r());
  const double xr = pt.xi[1];
  // H_q r = 2 mu xi_r;  H_q(2 mu xi_r) = 2 mu' (H_q r) xi_r + 2 mu (H_q xi_r)
  return {2.0 * mu * xr, 4.0 * mu * dmu * xr * xr + 2.0 * mu * v[5]};
}

}  // namespace

OrthogonalityDatum OrthogonalityDatum::make(const StationaryFrame& frame, double xi_phi) {
  return {frame, -frame.omega * xi_phi, xi_phi};
}

double f_function(const SpacetimeParams& p, double xi_t, double xi_phi, double r) {
  require_band(p, r);
  const double X = (r * r + p.a() * p.a()) * xi_t + p.a() * xi_phi;
  return X * X / p.mu(r);
}

double f_function_prime(const SpacetimeParams& p, double xi_t, double xi_phi, double r) {
  require_band(p, r);
  const double X = (r * r + p.a() * p.a()) * xi_t + p.a() * xi_phi;
  const double dX = 2.0 * r * xi_t;
  const double mu = p.mu(r);
  return X * (2.0 * dX * mu - X * p.mu_prime(r)) / (mu * mu);
}

double f_function_second(const SpacetimeParams& p, double xi_t, double xi_phi, double r) {
  require_band(p, r);
  const double X = (r * r + p.a() * p.a()) * xi_t + p.a() * xi_phi;
  const double dX = 2.0 * r * xi_t, ddX = 2.0 * xi_t;
  const double mu = p.mu(r), dmu = p.mu_prime(r), ddmu = p.mu_second(r);
  const double Y = 2.0 * dX * mu - X * dmu;
  const double dY = 2.0 * ddX * mu + dX * dmu - X * ddmu;
  return ((dX * Y + X * dY) * mu - 2.0 * X * Y * dmu) / (mu * mu * mu);
}

CriticalScan f_critical_scan(const SpacetimeParams& p, double xi_t, double xi_phi, int grid) {
  if (grid < 1000) throw Error(ErrorCode::InvalidArgument, "critical scan needs at least 1000 cells");
  CriticalScan out;
  out.grid = grid;
  const double lo = p.r_e(), hi = p.r_c(), w = hi - lo;
  auto node = [&](int i) { return lo + w * double(i) / double(grid); };
  auto fp = [&](double r) { return f_function_prime(p, xi_t, xi_phi, r); };
  double r_prev = node(1), v_prev = fp(r_prev);
  if (v_prev == 0.0) out.radii.push_back(r_prev);
  for (int i = 2; i < grid; ++i) {
    const double r = node(i), v = fp(r);
    if (v == 0.0) {
      out.radii.push_back(r);
    } else if (v_prev != 0.0 && sign(v) != sign(v_prev)) {
      std::uintmax_t iters = 100;
      const double root = boost::math::tools::newton_raphson_iterate(
          [&](double x) {
            return std::make_pair(fp(x), f_function_second(p, xi_t, xi_phi, x));
          },
          0.5 * (r_prev + r), r_prev, r, 50, iters);
      out.radii.push_back(root);
    }
    r_prev = r;
    v_prev = v;
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<PhasePoint> sample_turning_points(const Geometry& g, const StationaryFrame& frame,
                                              std::uint64_t seed, int count, double epsilon,
                                              std::uint64_t max_attempts) {
  if (count < 1) throw Error(ErrorCode::InvalidArgument, "count must be at least 1");
  if (max_attempts == 0) max_attempts = std::max<std::uint64_t>(2'000'000, 2'000ULL * count);
  const auto& p = g.params;
  const double lo = band_lo(p, epsilon), hi = band_hi(p, epsilon);
  const double a = p.a(), b2 = p.b() * p.b();
  Rng rng(seed);
  std::vector<PhasePoint> out;
  for (std::uint64_t n = 0; n < max_attempts && out.size() < std::size_t(count); ++n) {
    const double r = rng.uniform(lo, hi);
    const double theta = std::acos(rng.uniform(-1.0, 1.0));
    const double xi_phi = rng.uniform() < 0.5 ? -1.0 : 1.0;
    const double th_sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
    if (theta < 1e-3 || theta > kPi - 1e-3 || r == frame.r0) continue;
    const double xi_t = -frame.omega * xi_phi;
    const double s = std::sin(theta), s2 = s * s, c = p.c_theta(theta);
    const double X = (r * r + a * a) * xi_t + a * xi_phi;
    const double S = a * s2 * xi_t + xi_phi;
    const double th2 = (b2 * X * X / p.mu(r) - b2 * S * S / (c * s2)) / c;
    if (!(th2 >= 0.0)) continue;
    PhasePoint pt;
    pt.x = {0.0, r, 0.0, theta};
    pt.xi = {xi_t, 0.0, xi_phi, th_sign * std::sqrt(th2)};
    const double nrm = std::sqrt(momentum_scale(pt));
    pt.xi[2] /= nrm;
    pt.xi[3] /= nrm;
    pt.xi[0] = -frame.omega * pt.xi[2];
    out.push_back(pt);
  }
  return out;
}

double radial_acceleration(const Geometry& g, const PhasePoint& pt, double sign_of_mu) {
  const auto& p = g.params;
  const double b = p.b();
  return 2.0 * sign_of_mu * p.mu(pt.r()) * b * b * f_function_prime(p, pt.xi[0], pt.xi[2], pt.r());
}

double radial_acceleration_fd(const Geometry& g, const PhasePoint& pt, double step) {
  FlowConfig cfg;
  cfg.atol = 1e-13;
  cfg.rtol = 1e-13;
  cfg.affine_cap = 2.0 * step;
  cfg.record_stride = 1;
  cfg.epsilon = 0.0;
  cfg.h_init = step / 8;
  auto r_at = [&](int direction, double s_target) {
    // Stop exactly at s_target so the stencil nodes are exact.
    cfg.direction = direction;
    cfg.affine_cap = s_target;
    const auto traj = integrate(g, pt, cfg);
    if (traj.status != TerminalStatus::MaxParameter) {
      throw Error(ErrorCode::SampleInvalid, "turning point too close to the band edge for the stencil");
    }
    return traj.back().point.r();
  };
  const double r0 = pt.r();
  const double rp1 = r_at(1, step), rp2 = r_at(1, 2 * step);
  const double rm1 = r_at(-1, step), rm2 = r_at(-1, 2 * step);
  return (-rp2 + 16.0 * rp1 - 30.0 * r0 + 16.0 * rm1 - rm2) / (12.0 * step * step);
}

ConvexityReport convexity_check(const Geometry& g, const StationaryFrame& frame,
                                const std::vector<PhasePoint>& samples,
                                const ConvexityOptions& options) {
  ConvexityReport rep;
  rep.fault_injected = options.corrupt_mu_sign;
  const double mu_sign = options.corrupt_mu_sign ? -1.0 : 1.0;
  for (const auto& pt : samples) {
    const double scale = std::sqrt(momentum_scale(pt));
    if (pt.chart != Chart::BoyerLindquist || pt.xi[1] != 0.0) {
      throw Error(ErrorCode::SampleInvalid, "convexity samples need xi_r = 0 in Boyer-Lindquist form");
    }
    if (std::abs(pt.xi[0] + frame.omega * pt.xi[2]) > options.orthogonality_tolerance * scale) {
      throw Error(ErrorCode::SampleInvalid, "sample is not orthogonal to T");
    }
    if (pt.r() == frame.r0) throw Error(ErrorCode::SampleInvalid, "sample sits at r = r0");
    const double closed = radial_acceleration(g, pt, mu_sign);
    // Near a horizon H_q^2 r grows like 1/mu; keep the stencil displacement a
    // small fraction of the distance to it.
    const double room = std::min(pt.r() - g.params.r_e(), g.params.r_c() - pt.r());
    const double step = std::min(options.fd_step, 0.05 * std::sqrt(2.0 * room / std::abs(closed)));
    const double fd = radial_acceleration_fd(g, pt, step);
    ++rep.samples;
    if (sign(closed) != sign(pt.r() - frame.r0)) ++rep.sign_violations;
    const double mismatch = std::abs(closed - fd) / std::max(std::abs(closed), 1e-300);
    if (mismatch > rep.max_mismatch || !std::isfinite(mismatch)) {
      rep.max_mismatch = mismatch;
      rep.worst_r = pt.r();
    }
  }
  rep.pass = rep.sign_violations == 0 && rep.max_mismatch <= options.tolerance;
  return rep;
}

// ---------------------------------------------------------------------------

double escape_value(const Geometry& g, const StationaryFrame& frame, double C,
                    const PhasePoint& pt) {
  const double d = pt.r() - frame.r0;
  return std::exp(C * d * d) * radial_derivatives(g, pt).first;
}

double escape_derivative(const Geometry& g, const StationaryFrame& frame, double C,
                         const PhasePoint& pt) {
  const double d = pt.r() - frame.r0;
  const auto rd = radial_derivatives(g, pt);
  return std::exp(C * d * d) * (2.0 * C * d * rd.first * rd.first + rd.second);
}

namespace {

// Orthogonal characteristic points on a tensor grid over (r, theta, psi) with
// (xi_phi, xi_theta) = (cos psi, sin psi), both xi_r branches.
struct EscapeSample {
  double d;       // r - r0
  double hr2;     // (H_q r)^2
  double h2r;     // H_q^2 r
};

std::vector<EscapeSample> escape_grid(const Geometry& g, const StationaryFrame& frame, int nr,
                                      int ntheta, int npsi, double epsilon) {
  const auto& p = g.params;
  const double lo = band_lo(p, epsilon), hi = band_hi(p, epsilon);
  std::vector<std::vector<EscapeSample>> rows(nr);
  parallel_for(std::size_t(nr), [&](std::size_t i) {
    const double r = nr == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * double(i) / double(nr - 1);
    if (r == frame.r0) return;
    for (int j = 0; j < ntheta; ++j) {
      const double theta = kPi * (j + 0.5) / ntheta;
      for (int k = 0; k < npsi; ++k) {
        const double psi = 2.0 * kPi * (k + 0.5) / npsi;
        for (int branch : {1, -1}) {
          const auto pt = try_orthogonal_null_at(g, frame, r, theta, 0.0, std::cos(psi), std::sin(psi), branch);
          if (!pt) break;
          const auto rd = radial_derivatives(g, *pt);
          rows[i].push_back({r - frame.r0, rd.first * rd.first, rd.second});
        }
      }
    }
  });
  std::vector<EscapeSample> out;
  for (auto& row : rows) out.insert(out.end(), row.begin(), row.end());
  return out;
}

long escape_violations(const std::vector<EscapeSample>& pts, double C) {
  long bad = 0;
  for (const auto& s : pts) {
    // sign(H_q E) = sign(r - r0); the positive exponential factor drops out
    const double v = 2.0 * C * s.d * s.hr2 + s.h2r;
    if (!(sign(v) == sign(s.d))) ++bad;
  }
  return bad;
}

}  // namespace

EscapeFunction escape_constant_search(const Geometry& g, const StationaryFrame& frame,
                                      const EscapeGrid& grid, double epsilon) {
  if (grid.nr < 2 || grid.ntheta < 1 || grid.npsi < 1 || grid.refine < 1) {
    throw Error(ErrorCode::InvalidArgument, "escape grid too small");
  }
  if (!(epsilon > 0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be positive");
  EscapeFunction out;
  out.r0 = frame.r0;
  out.epsilon = epsilon;
  const auto pts = escape_grid(g, frame, grid.nr, grid.ntheta, grid.npsi, epsilon);
  out.points = long(pts.size());
  out.vacuous = pts.empty();
  int k = -10;
  for (; k <= 40; ++k) {
    if (escape_violations(pts, std::ldexp(1.0, k)) == 0) break;
  }
  if (k > 40) {
    throw Error(ErrorCode::SearchExhausted, "no C <= 2^40 certifies the escape function on the grid");
  }
  out.C = std::ldexp(1.0, k);
  out.doublings = k + 10;
  const auto fine = escape_grid(g, frame, grid.nr * grid.refine, grid.ntheta * grid.refine,
                                grid.npsi * grid.refine, epsilon);
  out.recheck_points = long(fine.size());
  out.recheck_violations = escape_violations(fine, out.C);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

CensusEntry run_entry(const Geometry& g, const PhasePoint& start, const FlowConfig& cfg) {
  CensusEntry e;
  e.start = start;
  try {
    const auto traj = integrate(g, start, cfg);
    e.status = traj.status;
    e.s_final = traj.s_final;
    e.r_min = traj.r_min;
    e.r_max = traj.r_max;
    e.max_drift = traj.diagnostics.max_drift;
    e.trapped = traj.status == TerminalStatus::MaxParameter &&
                traj.r_min > g.params.r_e() + cfg.epsilon && traj.r_max < g.params.r_c() - cfg.epsilon;
  } catch (const Error& err) {
    e.failed = true;
    e.error = err.what();
  }
  return e;
}

void tally(Census& c) {
  for (const auto& e : c.entries) {
    if (e.failed) {
      ++c.failures;
      continue;
    }
    c.max_drift = std::max(c.max_drift, e.max_drift);
    switch (e.status) {
      case TerminalStatus::ExitedLow: ++c.escaped_low; break;
      case TerminalStatus::ExitedHigh: ++c.escaped_high; break;
      case TerminalStatus::PoleGuard: ++c.pole_guard; break;
      case TerminalStatus::MaxParameter:
        if (e.trapped) ++c.trapped;
        break;
    }
    if (e.status == TerminalStatus::ExitedLow || e.status == TerminalStatus::ExitedHigh) {
      c.max_exit_parameter = std::max(c.max_exit_parameter, e.s_final);
    }
  }
}

FlowConfig census_flow(const Geometry& g, const CensusOptions& o) {
  if (o.count < 1) throw Error(ErrorCode::InvalidArgument, "count must be at least 1");
  if (!(o.epsilon > 0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be positive");
  FlowConfig cfg = o.flow;
  cfg.affine_cap = o.flow.affine_cap * g.params.mass();
  cfg.epsilon = o.epsilon;
  cfg.record_stride = 0;
  cfg.follow_horizons = false;
  cfg.direction = 1;
  return cfg;
}

}  // namespace

Census trapping_scan(const Geometry& g, const StationaryFrame& frame, const CensusOptions& o) {
  const FlowConfig cfg = census_flow(g, o);
  const std::uint64_t max_attempts =
      o.max_attempts ? o.max_attempts : std::max<std::uint64_t>(2'000'000, 2'000ULL * o.count);
  const auto batch = sample_orthogonal_null(g, frame, o.seed, o.count, o.epsilon, max_attempts);
  Census c;
  c.kind = "orthogonal";
  c.requested = o.count;
  c.affine_cap = cfg.affine_cap;
  c.epsilon = o.epsilon;
  c.attempts = batch.attempts;
  c.rejected = batch.rejected;
  c.entries.resize(batch.points.size());
  parallel_for(batch.points.size(), [&](std::size_t i) { c.entries[i] = run_entry(g, batch.points[i], cfg); },
               o.threads);
  tally(c);
  return c;
}

Census contrast_scan(const Geometry& g, const CensusOptions& o, bool polish) {
  const FlowConfig cfg = census_flow(g, o);
  const auto& p = g.params;
  const double a = p.a(), b2 = p.b() * p.b();
  const double lo = band_lo(p, o.epsilon), hi = band_hi(p, o.epsilon);
  const std::uint64_t max_attempts = o.max_attempts ? o.max_attempts : 200ULL * o.count + 1000;
  Rng rng(o.seed);
  Census c;
  c.kind = "contrast";
  c.requested = o.count;
  c.affine_cap = cfg.affine_cap;
  c.epsilon = o.epsilon;
  std::vector<PhasePoint> seeds;
  while (seeds.size() < std::size_t(o.count) && c.attempts < max_attempts) {
    ++c.attempts;
    // xi_t = -1 and impact parameter L = xi_phi; X = -(r^2 + a^2) + a L must
    // not vanish on [r_e, r_c], otherwise the datum is orthogonal to some T.
    const double L = rng.uniform(-8.0, 8.0);
    const double theta = std::acos(rng.uniform(-0.9, 0.9));
    const double th_sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
    const double xl = -(p.r_e() * p.r_e() + a * a) + a * L, xh = -(p.r_c() * p.r_c() + a * a) + a * L;
    if (!(xl * xh > 0.0)) {
      ++c.rejected;
      continue;
    }
    const auto crit = f_critical_scan(p, -1.0, L);
    if (crit.radii.size() != 1 || !(crit.radii[0] > lo && crit.radii[0] < hi)) {
      ++c.rejected;
      continue;
    }
    PhasePoint pt;
    pt.x = {0.0, crit.radii[0], 0.0, theta};
    pt.xi = {-1.0, 0.0, L, 0.0};
    double nrm = std::sqrt(momentum_scale(pt));
    for (double& v : pt.xi) v /= nrm;

    if (polish) {
      // Search neighbouring doubles of (r, xi_t) for an exact zero of the
      // computed radial force, nearest first; keep the smallest if none.
      auto force = [&](double r, double xt) {
        PhasePoint q = pt;
        q.x[1] = r;
        q.xi[0] = xt;
        return std::abs(hamilton_equations(g, q)[5]);
      };
      auto step_ulps = [](double x, int k) {
        const double toward = k > 0 ? std::numeric_limits<double>::infinity()
                                    : -std::numeric_limits<double>::infinity();
        for (int i = 0; i < std::abs(k); ++i) x = std::nextafter(x, toward);
        return x;
      };
      double best_r = pt.x[1], best_xt = pt.xi[0], best = force(best_r, best_xt);
      for (int kt = 0; kt <= 2 * kPolishXiT && best != 0.0; ++kt) {
        const double xt = step_ulps(pt.xi[0], (kt % 2 ? 1 : -1) * ((kt + 1) / 2));
        for (int kr = -kPolishR; kr <= kPolishR && best != 0.0; ++kr) {
          const double r = step_ulps(pt.x[1], kr);
          const double v = force(r, xt);
          if (v < best) {
            best = v;
            best_r = r;
            best_xt = xt;
          }
        }
      }
      pt.x[1] = best_r;
      pt.xi[0] = best_xt;
    }
    const double r = pt.x[1];
    const double s = std::sin(theta), s2 = s * s, cc = p.c_theta(theta);
    const double X = (r * r + a * a) * pt.xi[0] + a * pt.xi[2];
    const double S = a * s2 * pt.xi[0] + pt.xi[2];
    const double th2 = (b2 * X * X / p.mu(r) - b2 * S * S / (cc * s2)) / cc;
    if (!(th2 >= 0.0)) {
      ++c.rejected;
      continue;
    }
    pt.xi[3] = th_sign * std::sqrt(th2);
    // Back to unit scale by a power of two, which leaves the force exactly zero.
    int e = 0;
    std::frexp(std::sqrt(momentum_scale(pt)), &e);
    for (double& v : pt.xi) v = std::ldexp(v, -e);
    seeds.push_back(pt);
  }
  c.entries.resize(seeds.size());
  parallel_for(seeds.size(), [&](std::size_t i) { c.entries[i] = run_entry(g, seeds[i], cfg); }, o.threads);
  tally(c);
  return c;
}

// ---------------------------------------------------------------------------

std::string to_string(SigmaClass value) { return value == SigmaClass::Plus ? "plus" : "minus"; }

namespace {

// Only the fibre changes between the charts at a fixed base point, and the
// metric does not depend on t or phi, so the slow quadratures for the base
// coordinates are skipped.
PhasePoint starred_fibre(const Geometry& g, const PhasePoint& point) {
  if (point.chart == Chart::Starred) return point;
  PhasePoint st = point;
  st.chart = Chart::Starred;
  st.xi[1] += g.gauge.phi_prime(point.r()) * point.xi[0] + g.gauge.psi_prime(point.r()) * point.xi[2];
  return st;
}

}  // namespace

double dt_star_pairing(const Geometry& g, const PhasePoint& point) {
  const PhasePoint st = starred_fibre(g, point);
  const auto m = metric_at(g, Chart::Starred, st.x);
  double v = 0;
  for (int j = 0; j < 4; ++j) v += m.g_inv(0, j) * st.xi[j];
  return v;
}

SigmaClass sigma_split(const Geometry& g, const PhasePoint& point) {
  const PhasePoint st = starred_fibre(g, point);
  const double scale = momentum_scale(st);
  if (std::abs(hamiltonian_q(g, st)) > 1e-8 * scale) {
    throw Error(ErrorCode::SampleInvalid, "sigma_split needs a null covector");
  }
  const double v = dt_star_pairing(g, st);
  if (std::abs(v) < 1e-12 * std::sqrt(scale)) {
    throw Error(ErrorCode::Degenerate, "G_*(dt_*, xi) vanishes to working precision");
  }
  return v > 0 ? SigmaClass::Plus : SigmaClass::Minus;
}

SigmaInvarianceReport sigma_invariance(const Geometry& g, std::uint64_t seed, int count, double length,
                                       int threads) {
  if (count < 1 || !(length > 0)) throw Error(ErrorCode::InvalidArgument, "bad sigma invariance request");
  const auto& p = g.params;
  Rng rng(seed);
  std::vector<PhasePoint> starts;
  std::uint64_t attempts = 0;
  while (int(starts.size()) < count && attempts < 1'000'000) {
    ++attempts;
    PhasePoint pt;
    pt.x = {0.0, rng.uniform(p.r_e() + 1e-3, p.r_c() - 1e-3), rng.uniform(0.0, 2.0 * kPi),
            std::acos(rng.uniform(-0.99, 0.99))};
    pt.xi = {rng.normal(), 0.0, rng.normal(), rng.normal()};
    const int branch = rng.uniform() < 0.5 ? -1 : 1;
    try {
      auto proj = project_to_null(g, pt, NullComponent::XiR, branch).point;
      const double s = std::sqrt(momentum_scale(proj));
      for (double& v : proj.xi) v /= s;
      starts.push_back(proj);
    } catch (const Error&) {
    }
  }
  std::vector<SigmaInvarianceReport> part(starts.size());
  FlowConfig cfg;
  cfg.affine_cap = length;
  // inside the band only: the branch heading for the conormal bundle of a
  // horizon reaches fiber infinity at finite s once handed to the starred chart
  cfg.follow_horizons = false;
  cfg.record_stride = 1;
  parallel_for(starts.size(), [&](std::size_t i) {
    auto& r = part[i];
    r.trajectories = 1;
    bool have = false;
    SigmaClass first = SigmaClass::Plus;
    const auto traj = integrate(g, starts[i], cfg);
    for (const auto& smp : traj.samples) {
      SigmaClass c;
      try {
        c = sigma_split(g, smp.point);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::Degenerate) ++r.degenerate;
        continue;
      }
      ++r.samples;
      if (!have) {
        have = true;
        first = c;
        (c == SigmaClass::Plus ? r.plus : r.minus) = 1;
      } else if (c != first) {
        r.flips = 1;
      }
    }
  }, threads);
  SigmaInvarianceReport rep;
  for (const auto& r : part) {
    rep.trajectories += r.trajectories;
    rep.samples += r.samples;
    rep.plus += r.plus;
    rep.minus += r.minus;
    rep.flips += r.flips;
    rep.degenerate += r.degenerate;
  }
  rep.pass = rep.trajectories == count && rep.flips == 0 && rep.degenerate == 0;
  return rep;
}

RadialPointReport radial_point_check(const Geometry& g, const StationaryFrame& frame, Horizon horizon,
                                     bool require_exact, int ntheta, double xi_r) {
  const auto& p = g.params;
  const double rh = horizon_radius(p, horizon);
  RadialPointReport rep;
  rep.horizon = horizon;
  rep.r = rh;
  rep.frame_r0 = frame.r0;
  rep.xi_r = xi_r;
  rep.exact_frame = frame.r0 == rh;
  if (require_exact && !rep.exact_frame) {
    throw Error(ErrorCode::FrameMismatch, "exact radial-point check needs r0 at the chosen horizon");
  }
  if (ntheta < 1 || xi_r == 0.0) throw Error(ErrorCode::InvalidArgument, "bad radial-point scan");
  const double dmu = p.mu_prime(rh);
  for (int j = 0; j < ntheta; ++j) {
    const double theta = kPi * (j + 0.5) / ntheta;
    PhasePoint pt;
    pt.chart = Chart::Starred;
    pt.x = {0.0, rh, 0.0, theta};
    pt.xi = {0.0, xi_r, 0.0, 0.0};  // xi_t^T = xi_t + omega xi_phi = 0 with xi_phi = 0
    const double rho2 = rh * rh + p.a() * p.a() * std::cos(theta) * std::cos(theta);
    const double sym = std::abs(hamiltonian_q(g, pt)) / rho2;
    const auto v = hamilton_equations(g, pt);
    // Slice coordinates (r, phi_T, theta) with phi_T = phi_* - omega t_*:
    // d phi_T/ds = dq/dxi_phi - omega dq/dxi_t.
    const double d_r = v[1] / rho2;
    const double d_phi = (v[2] - frame.omega * v[0]) / rho2;
    const double d_theta = v[3] / rho2;
    const double d_xphi = v[6] / rho2, d_xth = v[7] / rho2;
    // With p = -G the Hamilton field flips sign, so the xi_r coefficient is +dq/dr / rho^2.
    const double coeff = -v[5] / rho2;
    const double expected = dmu * xi_r * xi_r / rho2;
    const double transverse =
        std::max({std::abs(d_r), std::abs(d_phi), std::abs(d_theta), std::abs(d_xphi), std::abs(d_xth)});
    rep.symbol_residual = std::max(rep.symbol_residual, sym);
    rep.transverse_max = std::max(rep.transverse_max, transverse);
    rep.phi_component = std::max(rep.phi_component, std::abs(d_phi));
    rep.coefficient_mismatch =
        std::max(rep.coefficient_mismatch, std::abs(coeff - expected) / std::abs(expected));
    if (j == ntheta / 2) {
      rep.xi_r_coefficient = coeff;
      rep.expected_coefficient = expected;
    }
    ++rep.samples;
  }
  const double x2 = xi_r * xi_r;
  rep.pass = rep.symbol_residual < 1e-12 * x2;
  if (rep.exact_frame) {
    rep.pass = rep.pass && rep.transverse_max < 1e-12 * x2 && rep.coefficient_mismatch < 1e-10;
  }
  return rep;
}

SourceSinkReport radial_source_sink(const Geometry& g, const StationaryFrame& frame, Horizon horizon,
                                    std::uint64_t seed, int count, double offset) {
  if (count < 1 || !(offset > 0)) throw Error(ErrorCode::InvalidArgument, "bad source/sink probe");
  const auto& p = g.params;
  const double rh = horizon_radius(p, horizon);
  const double dmu = p.mu_prime(rh);
  // Just outside the domain of outer communication mu < 0, so the null
  // condition can be met with a small transverse momentum.
  const double r_start = horizon == Horizon::Event ? rh - offset : rh + offset;
  if (r_start <= g.horizons.r_min() || r_start >= g.horizons.r_max()) {
    throw Error(ErrorCode::InvalidArgument, "probe offset exceeds the chart extension");
  }
  SourceSinkReport rep;
  rep.horizon = horizon;
  rep.expected_source_branch = dmu > 0 ? 1 : -1;
  Rng rng(seed);
  auto distance = [&](const PhasePoint& q) {
    const double xt_T = q.xi[0] + frame.omega * q.xi[2];
    const double transverse = std::sqrt(xt_T * xt_T + q.xi[2] * q.xi[2] + q.xi[3] * q.xi[3]);
    return std::abs(q.r() - rh) + transverse / std::abs(q.xi[1]);
  };
  FlowConfig cfg;
  cfg.record_stride = 0;
  // xi_r solves xi_r' = -mu' xi_r^2 near the conormal bundle and blows up at
  // s = 1/|mu'| on the sink branch; stay well short of that.
  cfg.affine_cap = 0.5 / std::abs(dmu);
  rep.consistent = true;
  for (int i = 0; i < count; ++i) {
    const double theta = std::acos(rng.uniform(-0.9, 0.9));
    const double u = rng.uniform(-1.0, 1.0);
    const double th_sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
    for (int branch : {1, -1}) {
      PhasePoint pt;
      pt.chart = Chart::Starred;
      pt.x = {0.0, r_start, 0.0, theta};
      pt.xi = {-frame.omega * offset * u, double(branch), offset * u, 0.0};
      const auto proj = project_to_null(g, pt, NullComponent::XiTheta, int(th_sign));
      pt = proj.point;
      RadialProbe probe;
      probe.branch = branch;
      probe.theta = theta;
      probe.d_start = distance(pt);
      const auto traj = integrate(g, pt, cfg);
      probe.d_end = distance(traj.back().point);
      probe.approaches = probe.d_end < probe.d_start;
      const bool expect_approach = branch != rep.expected_source_branch;
      if (probe.approaches != expect_approach) rep.consistent = false;
      rep.probes.push_back(probe);
    }
  }
  return rep;
}

}  // namespace kds
