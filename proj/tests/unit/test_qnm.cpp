#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "kds/errors.hpp"
#include "kds/qnm.hpp"
#include "kds/random.hpp"
#include "kds/spectral.hpp"
#include "oracles.hpp"

using namespace kds;
using std::numbers::pi;

namespace {

Geometry geo(double a) { return Geometry::make(0.06, a, 1.0, 0.2); }

WaveOperator make_op(const Geometry& g, int m, double r0, FrequencyFrame fr = FrequencyFrame::Stationary,
                     Potential A = Potential::zero()) {
  WaveOperatorSpec spec;
  spec.m = m;
  spec.frame = StationaryFrame::make(g.params, r0);
  spec.potential = std::move(A);
  return WaveOperator::assemble(g, spec, fr);
}

// psi = e^{0.3 r} (0.7 + cos th + 0.5 cos 2th) sin th, with all derivatives
struct Smooth {
  static cplx ang(double t) { return (0.7 + std::cos(t) + 0.5 * std::cos(2 * t)) * std::sin(t); }
  static cplx ang_d(double t) {
    return (-std::sin(t) - std::sin(2 * t)) * std::sin(t) + (0.7 + std::cos(t) + 0.5 * std::cos(2 * t)) * std::cos(t);
  }
  static cplx ang_dd(double t) {
    const double s = std::sin(t), c = std::cos(t);
    return (-c - 2 * std::cos(2 * t)) * s + 2 * (-s - std::sin(2 * t)) * c - (0.7 + c + 0.5 * std::cos(2 * t)) * s;
  }
  static Jet jet(double r, double t) {
    const double e = std::exp(0.3 * r);
    return {e * ang(t), 0.3 * e * ang(t), 0.09 * e * ang(t), e * ang_d(t), e * ang_dd(t)};
  }
  static oracle::TestFunction fn() {
    return {[](double r, double t) { return std::exp(0.3 * r) * ang(t); },
            [](double r, double t) { return 0.3 * std::exp(0.3 * r) * ang(t); },
            [](double r, double t) { return std::exp(0.3 * r) * ang_d(t); }};
  }
};

double nearest(const std::vector<cplx>& set, cplx z) {
  double d = 1e300;
  for (auto w : set) d = std::min(d, std::abs(w - z));
  return d;
}

std::vector<cplx> sigmas(const QNMResult& r) {
  std::vector<cplx> s;
  for (const auto& m : r.modes) s.push_back(m.sigma);
  return s;
}

SolveOptions quick(const Geometry& g) {
  SolveOptions o;
  o.window = SpectralWindow::defaults(g);
  o.doubling_check = false;
  return o;
}

}  // namespace

TEST_CASE("wave operator against a finite-difference box of the numerical metric") {
  for (double a : {0.0, 0.3}) {
    const auto g = geo(a);
    const oracle::Gauge og{{0.06, a, 1.0}, g.horizons.r_e, g.horizons.r_c};
    for (int m : {0, 1, 2}) {
      const auto op = make_op(g, m, g.params.r_e(), FrequencyFrame::Lab);
      for (cplx sigma : {cplx(0.0), cplx(0.4, -0.1), cplx(-0.25, 0.05)}) {
        for (auto [r, th] : {std::pair{2.7, 0.9}, {3.9, 1.6}, {5.2, 2.4}}) {
          const cplx got = op.apply(sigma, r, th, Smooth::jet(r, th));
          const cplx ref = oracle::box_starred(og, sigma, m, Smooth::fn(), r, th);
          CHECK(std::abs(got - ref) <= 1e-6 * std::max(1.0, std::abs(ref)));
        }
      }
    }
  }
}

TEST_CASE("stationary frame is the lab frame shifted by m omega") {
  const auto g = geo(0.3);
  const double r0 = 3.6;
  const auto lab = make_op(g, 2, r0, FrequencyFrame::Lab);
  const auto st = make_op(g, 2, r0, FrequencyFrame::Stationary);
  const double shift = 2 * 0.3 / (r0 * r0 + 0.09);
  CHECK(st.shift() == doctest::Approx(shift).epsilon(1e-14));
  const cplx s(0.2, -0.05);
  const auto j = Smooth::jet(3.0, 1.0);
  CHECK(std::abs(st.apply(s, 3.0, 1.0, j) - lab.apply(s + shift, 3.0, 1.0, j)) < 1e-12);
}

TEST_CASE("sigma^2 coefficient is -rho^2 G(dt*, dt*) and positive") {
  const auto g = geo(0.3);
  const oracle::Gauge og{{0.06, 0.3, 1.0}, g.horizons.r_e, g.horizons.r_c};
  const auto op = make_op(g, 1, 3.0, FrequencyFrame::Lab);
  for (double r : {2.5, 3.3, 5.0})
    for (double th : {0.3, 1.2, 2.7}) {
      const double ref = -og.k.rho2(r, th) * og.starred(r, th).inverse()(0, 0);
      CHECK(op.sigma2_coefficient(r, th) == doctest::Approx(ref).epsilon(1e-9));
    }
  for (double r : {g.horizons.r_min(), g.horizons.r_e, g.horizons.r_c, g.horizons.r_max()})
    CHECK(op.sigma2_coefficient(r, 1.0) > 0);
}

TEST_CASE("a = 0, m = 0: angular part is the round Laplacian") {
  const auto g = geo(0.0);
  const auto op = make_op(g, 0, 3.0);
  cplx w[3];
  op.angular(0.8, w);
  for (auto x : w) CHECK(x == cplx(0));
  CHECK(g.params.c_theta(0.8) == 1.0);
}

TEST_CASE("pencil rows are Galerkin projections of the operator") {
  const auto g = geo(0.3);
  const auto op = make_op(g, 1, 3.5, FrequencyFrame::Stationary, Potential::constant({0.1, 0.02}));
  GridSpec grid;
  grid.nr = 12;
  grid.ntheta = 5;
  const auto pen = discretize(op, grid);
  CHECK(pen.dimension() == 60);
  CHECK(pen.P0.rows() == 60);
  CHECK(pen.P1.rows() == pen.P2.rows());
  // psi = poly(r) * sum_k c_k Y_k is represented exactly
  auto radial = [&](double r, int d) -> double {
    const double t = (r - 4.0) / 2.0;
    if (d == 0) return 1 + t - 0.4 * t * t * t;
    if (d == 1) return (1 - 1.2 * t * t) / 2.0;
    return (-2.4 * t) / 4.0;
  };
  const double coef[5] = {0.3, -1.0, 0.5, 0.2, -0.1};
  Eigen::VectorXcd v(60);
  for (int i = 0; i < 12; ++i)
    for (int k = 0; k < 5; ++k) v[i * 5 + k] = radial(pen.r_nodes[i], 0) * coef[k];
  const cplx sigma(0.3, -0.07);
  const Eigen::VectorXcd Pv = pen.at(sigma) * v;

  const auto rule = spectral::gauss_legendre(80);
  for (int i : {0, 3, 7, 11}) {
    const double r = pen.r_nodes[i];
    for (int k = 0; k < 5; ++k) {
      cplx acc = 0;
      for (std::size_t q = 0; q < rule.x.size(); ++q) {
        const double th = std::acos(rule.x[q]);
        double y[5], dy[5];
        spectral::normalized_legendre(1, 5, th, y, dy);
        // second theta derivative of each basis function by finite differences
        Jet j{};
        for (int l = 0; l < 5; ++l) {
          auto yl = [&](double t) {
            double yy[5], dd[5];
            spectral::normalized_legendre(1, 5, t, yy, dd);
            return dd[l];
          };
          const double ddy = oracle::d1_fd(std::function<double(double)>(yl), th, 1e-4);
          j.v += coef[l] * radial(r, 0) * y[l];
          j.r += coef[l] * radial(r, 1) * y[l];
          j.rr += coef[l] * radial(r, 2) * y[l];
          j.th += coef[l] * radial(r, 0) * dy[l];
          j.thth += coef[l] * radial(r, 0) * ddy;
        }
        acc += rule.w[q] * y[k] * op.apply(sigma, r, th, j);
      }
      CHECK(std::abs(Pv[i * 5 + k] - acc) < 1e-7 * std::max(1.0, std::abs(acc)));
    }
  }
}

TEST_CASE("constants solve the wave equation") {
  const auto g = geo(0.3);
  const auto op = make_op(g, 0, 3.0);
  const auto pen = discretize(op, {16, 6});
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(pen.dimension());
  for (int i = 0; i < pen.nr; ++i) v[i * pen.ntheta] = std::sqrt(2.0);  // 1 = sqrt(2) Y_0
  CHECK(std::abs(pen.evaluate(v, 3.3, 0.4) - 1.0) < 1e-12);
  CHECK((pen.P0 * v).cwiseAbs().maxCoeff() < 1e-10 * pen.P0.cwiseAbs().maxCoeff());
}

TEST_CASE("grid and potential validation") {
  const auto g = geo(0.3);
  const auto op = make_op(g, 1, 3.0);
  CHECK_THROWS_AS(discretize(op, {6, 6}), Error);
  CHECK_THROWS_AS(discretize(op, {16, 3}), Error);
  std::vector<double> rr{1.0, 7.0}, tt{0.0, pi};
  const auto lopsided = Potential::tabulated(rr, tt, {0.0, 1.0, 0.0, 1.0});
  CHECK_FALSE(lopsided.equatorially_symmetric());
  CHECK(lopsided(4.0, pi / 2) == cplx(0.5));
  const auto op2 = make_op(g, 1, 3.0, FrequencyFrame::Stationary, lopsided);
  GridSpec even{16, 4, Parity::Even};
  try {
    (void)discretize(op2, even);
    FAIL("expected Degenerate");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Degenerate);
  }
  const auto narrow = Potential::tabulated({3.0, 4.0}, tt, {0.0, 0.0, 0.0, 0.0});
  WaveOperatorSpec spec;
  spec.potential = narrow;
  spec.frame = StationaryFrame::make(g.params, 3.0);
  CHECK_THROWS_AS(WaveOperator::assemble(g, spec), Error);
}

TEST_CASE("discretization symmetries leave the spectrum alone") {
  const auto g = geo(0.3);
  const auto op = make_op(g, 1, 3.5);
  const auto base = solve_qnm(discretize(op, {24, 6}), quick(g));
  REQUIRE(base.modes.size() >= 3);

  GridSpec asc{24, 6};
  asc.ascending = true;
  const auto flipped = solve_qnm(discretize(op, asc), quick(g));
  for (auto s : sigmas(flipped)) CHECK(nearest(sigmas(base), s) < 1e-8);

  // parity halves: same basis, reordered
  const auto even = solve_qnm(discretize(op, {24, 3 + 1, Parity::Even}), quick(g));
  const auto odd = solve_qnm(discretize(op, {24, 3 + 1, Parity::Odd}), quick(g));
  const auto full = solve_qnm(discretize(op, {24, 8}), quick(g));
  for (auto s : sigmas(even)) CHECK(nearest(sigmas(full), s) < 1e-8);
  for (auto s : sigmas(odd)) CHECK(nearest(sigmas(full), s) < 1e-8);
}

TEST_CASE("real potential at m = 0 gives a spectrum symmetric under sigma -> -conj(sigma)") {
  const auto g = geo(0.3);
  const auto op = make_op(g, 0, 3.5, FrequencyFrame::Stationary, Potential::constant(0.05));
  const auto res = solve_qnm(discretize(op, {24, 6}), quick(g));
  REQUIRE(res.modes.size() >= 2);
  for (auto s : sigmas(res)) {
    if (!res.window.contains(-std::conj(s))) continue;
    CHECK(nearest(sigmas(res), -std::conj(s)) < 1e-8);
  }
}

TEST_CASE("frame relabelling") {
  const auto g0 = geo(0.0);
  const auto r0 = solve_qnm(discretize(make_op(g0, 1, 3.0), {16, 4}), quick(g0));
  const auto s0 = shift_frame(r0, g0.params, 4.0);
  REQUIRE(s0.modes.size() == r0.modes.size());
  for (std::size_t i = 0; i < r0.modes.size(); ++i) CHECK(s0.modes[i].sigma == r0.modes[i].sigma);

  const auto g = geo(0.3);
  const auto m0 = solve_qnm(discretize(make_op(g, 0, 3.0), {16, 4}), quick(g));
  const auto t0 = shift_frame(m0, g.params, 4.0);
  for (std::size_t i = 0; i < m0.modes.size(); ++i) CHECK(t0.modes[i].sigma == m0.modes[i].sigma);

  const auto m1 = solve_qnm(discretize(make_op(g, 1, 3.0), {16, 4}), quick(g));
  const auto t1 = shift_frame(m1, g.params, 4.0);
  CHECK(t1.r0 == 4.0);
  const double d = 0.3 / (9.0 + 0.09) - 0.3 / (16.0 + 0.09);
  for (std::size_t i = 0; i < m1.modes.size(); ++i) {
    CHECK(std::abs(t1.modes[i].sigma - m1.modes[i].sigma - d) < 1e-14);
    CHECK(t1.modes[i].sigma_lab == m1.modes[i].sigma_lab);
  }
}

TEST_CASE("residuals: converged pairs are small, perturbed or random ones are not") {
  const auto g = geo(0.0);
  const auto pen = discretize(make_op(g, 0, 3.0), {32, 4});
  const auto res = solve_qnm(pen, quick(g));
  REQUIRE_FALSE(res.empty());
  const auto& mode = res.modes.front();
  CHECK(mode.converged);
  CHECK(mode.residual < 1e-8);
  CHECK(mode_residual(pen, mode.sigma, mode.vector) < 1e-8);
  CHECK(mode_residual(pen, mode.sigma + 1e-3, mode.vector) >= 10 * mode_residual(pen, mode.sigma, mode.vector));

  Rng rng(1);
  Eigen::VectorXcd v(pen.dimension());
  for (int i = 0; i < v.size(); ++i) v[i] = cplx(rng.normal(), rng.normal());
  CHECK(mode_residual(pen, cplx(0.17, -0.04), v) > 1e-2);
  CHECK_THROWS_AS(mode_residual(pen, 0.1, Eigen::VectorXcd::Zero(pen.dimension())), Error);

  // fundamental l = 0 mode against the radial shooting solver
  oracle::RadialQnm radial(0.06, 1.0);
  const cplx ref = radial.solve({0.0635, -0.0948}, 0);
  CHECK(nearest(sigmas(res), ref) < 1e-6);
}

TEST_CASE("empty window is reported, not thrown") {
  const auto g = geo(0.0);
  auto o = quick(g);
  o.window.im_min = 5.0;
  o.window.im_max = 6.0;
  const auto res = solve_qnm(discretize(make_op(g, 0, 3.0), {16, 4}), o);
  CHECK(res.empty());
  REQUIRE_FALSE(res.warnings.empty());
  CHECK(res.warnings.back().find("EmptyWindow") != std::string::npos);
}
