#include <doctest.h>

#include <cmath>
#include <numbers>

#include "kds/errors.hpp"
#include "kds/trapping.hpp"
#include "oracles.hpp"

using namespace kds;
using std::numbers::pi;

namespace {

Geometry geo(double a) { return Geometry::make(0.06, a, 1.0, 0.2); }

}  // namespace

TEST_CASE("F vanishes at r0 for orthogonal data and identically at a = 0 with xi_t = 0") {
  const auto p = SpacetimeParams::make(0.06, 0.3, 1.0);
  const auto fr = StationaryFrame::make(p, 3.7);
  const auto d = OrthogonalityDatum::make(fr, 1.3);
  CHECK(std::abs(f_function(p, d, 3.7)) < 1e-14);
  const auto p0 = SpacetimeParams::make(0.06, 0.0, 1.0);
  for (double r : {2.5, 3.5, 5.0}) CHECK(f_function(p0, 0.0, 1.0, r) == 0.0);
  CHECK_THROWS_AS(f_function(p, d, 1.0), Error);
}

TEST_CASE("F derivatives against finite differences") {
  const auto p = SpacetimeParams::make(0.06, 0.3, 1.0);
  for (double r : {2.6, 3.3, 4.8}) {
    const double d1 = oracle::d1_fd(std::function<double(double)>([&](double x) { return f_function(p, 0.7, -0.4, x); }),
                                    r, 1e-3);
    const double d2 = oracle::d1_fd(
        std::function<double(double)>([&](double x) { return f_function_prime(p, 0.7, -0.4, x); }), r, 1e-3);
    CHECK(f_function_prime(p, 0.7, -0.4, r) == doctest::Approx(d1).epsilon(1e-8));
    CHECK(f_function_second(p, 0.7, -0.4, r) == doctest::Approx(d2).epsilon(1e-8));
  }
}

TEST_CASE("critical points of F") {
  const auto p0 = SpacetimeParams::make(0.06, 0.0, 1.0);
  // non-orthogonal a = 0: r^4 / mu has its only interior critical point at 3m
  const auto s0 = f_critical_scan(p0, 1.0, 0.5);
  REQUIRE(s0.radii.size() == 1);
  CHECK(s0.radii[0] == doctest::Approx(3.0).epsilon(1e-10));

  const auto p = SpacetimeParams::make(0.06, 0.3, 1.0);
  const double r0 = 0.5 * (p.r_e() + p.r_c());
  const auto d = OrthogonalityDatum::make(StationaryFrame::make(p, r0), 1.0);
  const auto s1 = f_critical_scan(p, d.xi_t, d.xi_phi);
  REQUIRE(s1.radii.size() == 1);
  CHECK(s1.radii[0] == doctest::Approx(r0).epsilon(1e-9));

  const auto de = OrthogonalityDatum::make(StationaryFrame::make(p, p.r_e()), 1.0);
  CHECK(f_critical_scan(p, de.xi_t, de.xi_phi).radii.empty());

  CHECK(f_critical_scan(p, 1.0, 0.2).radii.size() == 1);
}

TEST_CASE("convexity at turning points") {
  const auto g = geo(0.3);
  const auto fr = StationaryFrame::make(g.params, 0.5 * (g.params.r_e() + g.params.r_c()));
  const auto samples = sample_turning_points(g, fr, 9, 100, 1e-3);
  REQUIRE(samples.size() == 100);
  for (const auto& s : samples) {
    const double acc = radial_acceleration(g, s);
    CHECK((acc > 0) == (s.r() > fr.r0));
  }
  const auto rep = convexity_check(g, fr, samples);
  CHECK(rep.pass);
  CHECK(rep.sign_violations == 0);
  CHECK(rep.max_mismatch < 1e-6);

  ConvexityOptions bad;
  bad.corrupt_mu_sign = true;
  const auto broken = convexity_check(g, fr, samples, bad);
  CHECK_FALSE(broken.pass);
  CHECK(broken.sign_violations == broken.samples);

  auto wrong = samples;
  wrong[0].xi[1] = 0.1;
  CHECK_THROWS_AS(convexity_check(g, fr, wrong), Error);
  const auto g0 = geo(0.0);
  CHECK(sample_turning_points(g0, StationaryFrame::make(g0.params, 3.0), 1, 10, 1e-3, 10000).empty());
}

TEST_CASE("escape constant certifies and is monotone in its sign pattern") {
  const auto g = geo(0.3);
  const auto fr = StationaryFrame::make(g.params, g.params.mu_critical_radius());
  EscapeGrid grid;
  grid.nr = 32;
  grid.ntheta = 8;
  grid.npsi = 8;
  grid.refine = 4;
  const auto e = escape_constant_search(g, fr, grid, 1e-3);
  CHECK(e.certified());
  CHECK(e.points > 0);
  CHECK(e.recheck_points > e.points);
  const auto e0 = escape_constant_search(geo(0.0), StationaryFrame::make(geo(0.0).params, 3.0), grid, 1e-3);
  CHECK(e0.vacuous);
}

TEST_CASE("orthogonal census escapes, contrast traps") {
  const auto g = geo(0.3);
  const auto fr = StationaryFrame::make(g.params, g.params.r_e());
  CensusOptions o;
  o.count = 40;
  const auto c = trapping_scan(g, fr, o);
  CHECK(c.trapped == 0);
  CHECK(c.failures == 0);
  CHECK(c.escaped_low + c.escaped_high == c.sampled());
  CHECK(c.max_drift < 1e-8);

  // shrinking epsilon cannot turn an escape into a trap
  CensusOptions narrow = o;
  narrow.epsilon = 1e-4;
  const auto cn = trapping_scan(g, fr, narrow);
  CHECK(cn.trapped == 0);

  CensusOptions k;
  k.count = 1;
  k.flow.affine_cap = 2e3;
  const auto t = contrast_scan(g, k);
  CHECK(t.trapped >= 1);
}

TEST_CASE("sigma split flips with xi and survives the flow") {
  const auto g = geo(0.3);
  PhasePoint p;
  p.chart = Chart::BoyerLindquist;
  p.x = {0, 3.2, 0, 1.0};
  p.xi = {0.5, 0, 0.3, 0.8};
  p = project_to_null(g, p).point;
  auto m = p;
  for (double& x : m.xi) x = -x;
  CHECK(sigma_split(g, p) != sigma_split(g, m));
  auto notnull = p;
  notnull.xi[3] += 1.0;
  CHECK_THROWS_AS(sigma_split(g, notnull), Error);

  const auto rep = sigma_invariance(g, 17, 20, 10.0);
  CHECK(rep.pass);
  CHECK(rep.flips == 0);
  CHECK(rep.plus + rep.minus == rep.trajectories);
}

TEST_CASE("radial points") {
  const auto g = geo(0.3);
  const auto& p = g.params;
  const auto fe = StationaryFrame::make(p, p.r_e());
  const auto re = radial_point_check(g, fe, Horizon::Event, true);
  CHECK(re.pass);
  CHECK(re.symbol_residual < 1e-12);
  CHECK(re.transverse_max < 1e-12);
  CHECK(re.coefficient_mismatch < 1e-10);
  const auto fc = StationaryFrame::make(p, p.r_c());
  CHECK(radial_point_check(g, fc, Horizon::Cosmological, true).pass);
  const auto fm = StationaryFrame::make(p, 3.5);
  CHECK_THROWS_AS(radial_point_check(g, fm, Horizon::Event, true), Error);
  const auto loose = radial_point_check(g, fm, Horizon::Event, false);
  CHECK(loose.symbol_residual < 1e-12);
  CHECK(std::abs(loose.phi_component) > 0);

  const auto ss = radial_source_sink(g, fe, Horizon::Event, 3, 8);
  CHECK(ss.consistent);
}
