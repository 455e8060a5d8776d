#include <doctest.h>

#include <cmath>
#include <numbers>

#include "kds/errors.hpp"
#include "kds/hamiltonian.hpp"
#include "kds/random.hpp"
#include "oracles.hpp"

using namespace kds;
using std::numbers::pi;

namespace {

Geometry geo(double a) { return Geometry::make(0.06, a, 1.0, 0.2); }

PhasePoint point(Chart c, double r, double th, std::array<double, 4> xi) {
  PhasePoint p;
  p.chart = c;
  p.x = {0.0, r, 0.3, th};
  p.xi = xi;
  return p;
}

double q_oracle(const Eigen::Matrix4d& g, double rho2, const std::array<double, 4>& xi) {
  const Eigen::Vector4d v(xi[0], xi[1], xi[2], xi[3]);
  return rho2 * v.dot(g.inverse() * v);
}

}  // namespace

TEST_CASE("q: single-term cases") {
  const auto g0 = geo(0.0);
  for (double r : {2.5, 3.7, 5.2}) {
    CHECK(hamiltonian_q(g0, point(Chart::BoyerLindquist, r, 1.0, {0, 1, 0, 0})) ==
          doctest::Approx(g0.params.mu(r)).epsilon(1e-14));
  }
  const auto g = geo(0.3);
  for (double th : {0.4, 1.1, 2.5})
    CHECK(hamiltonian_q(g, point(Chart::BoyerLindquist, 3.0, th, {0, 0, 0, 1})) ==
          doctest::Approx(g.params.c_theta(th)).epsilon(1e-14));
}

TEST_CASE("q against the inverse of the oracle metric, both charts") {
  const oracle::Kds k{0.06, 0.3, 1.0};
  const auto g = geo(0.3);
  const oracle::Gauge og{k, g.horizons.r_e, g.horizons.r_c};
  Rng rng(11);
  for (int n = 0; n < 200; ++n) {
    const double r = rng.uniform(g.horizons.r_e + 0.05, g.horizons.r_c - 0.05);
    const double th = rng.uniform(0.1, pi - 0.1);
    const std::array<double, 4> xi{rng.normal(), rng.normal(), rng.normal(), rng.normal()};
    const double ref = q_oracle(oracle::metric_bl(k, r, th), k.rho2(r, th), xi);
    CHECK(hamiltonian_q(g, point(Chart::BoyerLindquist, r, th, xi)) == doctest::Approx(ref).epsilon(1e-10));
    const double ref_st = q_oracle(og.starred(r, th), k.rho2(r, th), xi);
    CHECK(hamiltonian_q(g, point(Chart::Starred, r, th, xi)) == doctest::Approx(ref_st).epsilon(1e-9));
  }
}

TEST_CASE("null projection solves the quadratic in xi_r") {
  const auto g = geo(0.3);
  Rng rng(3);
  int solved = 0;
  for (int n = 0; n < 300; ++n) {
    const double r = rng.uniform(2.3, 5.6), th = rng.uniform(0.2, 2.9);
    auto p = point(Chart::BoyerLindquist, r, th, {rng.normal(), 0.0, rng.normal(), rng.normal()});
    for (int branch : {+1, -1}) {
      try {
        const auto pr = project_to_null(g, p, NullComponent::XiR, branch);
        CHECK(std::abs(hamiltonian_q(g, pr.point)) <= 1e-12 * momentum_scale(pr.point));
        ++solved;
      } catch (const Error& e) {
        // no real root: the xi_r-free part of q is already positive
        CHECK(e.code() == ErrorCode::EmptyCharacteristic);
        auto z = p;
        z.xi[1] = 0;
        CHECK(hamiltonian_q(g, z) > 0);
      }
    }
  }
  CHECK(solved > 100);
}

TEST_CASE("Hamilton equations are the gradient of q") {
  const auto g = geo(0.3);
  Rng rng(5);
  for (int n = 0; n < 100; ++n) {
    const Chart c = n % 2 ? Chart::Starred : Chart::BoyerLindquist;
    const double r = rng.uniform(2.4, 5.5), th = rng.uniform(0.3, 2.8);
    const auto p = point(c, r, th, {rng.normal(), rng.normal(), rng.normal(), rng.normal()});
    const auto v = hamilton_equations(g, p);
    for (int i = 0; i < 4; ++i) {
      auto qxi = [&](double s) {
        auto q = p;
        q.xi[i] = s;
        return hamiltonian_q(g, q);
      };
      const double d = oracle::d1_fd(std::function<double(double)>(qxi), p.xi[i], 1e-3);
      CHECK(v[i] == doctest::Approx(d).epsilon(1e-6).scale(1.0));
    }
    for (int i : {1, 3}) {
      auto qx = [&](double s) {
        auto q = p;
        q.x[i] = s;
        return hamiltonian_q(g, q);
      };
      const double d = oracle::d1_fd(std::function<double(double)>(qx), p.x[i], 1e-4);
      CHECK(v[4 + i] == doctest::Approx(-d).epsilon(1e-6).scale(1.0));
    }
    CHECK(v[4] == 0.0);
    CHECK(v[6] == 0.0);
    if (c == Chart::BoyerLindquist) CHECK(v[1] == doctest::Approx(2 * g.params.mu(r) * p.xi[1]));
  }
}

TEST_CASE("equatorial symmetry at a = 0") {
  const auto g = geo(0.0);
  const auto v = hamilton_equations(g, point(Chart::BoyerLindquist, 3.3, pi / 2, {0.4, 0.2, 0.7, 0.0}));
  CHECK(v[3] == 0.0);
  CHECK(std::abs(v[7]) < 1e-15);
}

TEST_CASE("chart conversion round trip preserves q") {
  const auto g = geo(0.3);
  const auto p = point(Chart::BoyerLindquist, 3.4, 1.1, {0.3, -0.8, 0.5, 0.2});
  const auto s = to_starred(g, p);
  CHECK(s.chart == Chart::Starred);
  CHECK(hamiltonian_q(g, s) == doctest::Approx(hamiltonian_q(g, p)).epsilon(1e-10));
  const auto back = to_boyer_lindquist(g, s);
  for (int i = 0; i < 4; ++i) {
    CHECK(back.x[i] == doctest::Approx(p.x[i]).epsilon(1e-12));
    CHECK(back.xi[i] == doctest::Approx(p.xi[i]).epsilon(1e-12));
  }
}

TEST_CASE("radially ingoing a = 0 ray leaves through the bottom") {
  const auto g = geo(0.0);
  auto p = point(Chart::BoyerLindquist, 3.5, pi / 2, {1.0, 0.0, 0.0, 0.0});
  p = project_to_null(g, p, NullComponent::XiR, -1).point;
  REQUIRE(p.xi[1] != 0);
  FlowConfig cfg;
  cfg.direction = p.xi[1] > 0 ? -1 : 1;  // dr/ds = 2 mu xi_r
  const auto tr = integrate(g, p, cfg);
  CHECK(tr.status == TerminalStatus::ExitedLow);
  for (std::size_t i = 1; i < tr.samples.size(); ++i) CHECK(tr.samples[i].point.r() <= tr.samples[i - 1].point.r());
}

TEST_CASE("photon sphere orbit stays at 3m") {
  const auto g = geo(0.0);
  // circular orbit: (r^2 xi_t)^2 / mu critical at r = 3m for a = 0
  // inclined so the orbit never reaches the poles
  const double xi_phi = 0.8 * 9.0 / std::sqrt(g.params.mu(3.0));
  auto p = point(Chart::BoyerLindquist, 3.0, pi / 2, {1.0, 0.0, xi_phi, 0.0});
  p = project_to_null(g, p, NullComponent::XiTheta, +1).point;
  const double scale = std::sqrt(momentum_scale(p));
  for (double& x : p.xi) x /= scale;
  REQUIRE(std::abs(p.xi[1]) == 0.0);
  FlowConfig cfg;
  cfg.affine_cap = 1e3;
  cfg.atol = cfg.rtol = 1e-13;
  const auto tr = integrate(g, p, cfg);
  CHECK(tr.status == TerminalStatus::MaxParameter);
  CHECK(tr.r_min > 3.0 - 1e-6);
  CHECK(tr.r_max < 3.0 + 1e-6);
}

TEST_CASE("orthogonal samples") {
  const auto g = geo(0.3);
  const auto fr = StationaryFrame::make(g.params, 3.5);
  const auto batch = sample_orthogonal_null(g, fr, 42, 50, 1e-3);
  CHECK(batch.points.size() >= 50);
  for (const auto& p : batch.points) {
    CHECK(p.xi[0] + fr.omega * p.xi[2] == 0.0);
    CHECK(std::abs(hamiltonian_q(g, p)) <= 1e-10 * momentum_scale(p));
    // T timelike at r0 itself: nothing there
    CHECK(std::abs(p.r() - fr.r0) > 1e-6);
  }
  CHECK_THROWS_AS(orthogonal_null_at(g, fr, fr.r0, pi / 2, 0, 1.0, 0.0, 1), Error);
  const auto g0 = geo(0.0);
  // a = 0: T = d_t is timelike on the whole band, so xi_t = 0 leaves no null covector
  const auto b0 = sample_orthogonal_null(g0, StationaryFrame::make(g0.params, 3.0), 1, 10, 1e-3, 20000);
  CHECK(b0.points.empty());
  CHECK(b0.rejected == b0.attempts);
  const auto fe = StationaryFrame::make(g.params, g.params.r_e());
  for (const auto& p : sample_orthogonal_null(g, fe, 2, 10, 1e-3).points) {
    CHECK(p.xi[0] == -fe.omega * p.xi[2]);
    CHECK(p.r() > g.params.mu_critical_radius());  // the only ergoregion hugs r_c
  }
  // same seed, same samples
  const auto again = sample_orthogonal_null(g, fr, 42, 50, 1e-3);
  REQUIRE(again.points.size() == batch.points.size());
  for (std::size_t i = 0; i < again.points.size(); ++i) CHECK(again.points[i].xi == batch.points[i].xi);
}
