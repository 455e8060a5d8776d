#include "kds/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include "kds/errors.hpp"

namespace kds {

namespace {

constexpr double kPi = std::numbers::pi;

std::complex<double> horner(const std::array<double, 5>& c, std::complex<double> z) {
  std::complex<double> v = c[0];
  for (int k = 1; k < 5; ++k) v = v * z + c[k];
  return v;
}

std::complex<double> horner_prime(const std::array<double, 5>& c, std::complex<double> z) {
  std::complex<double> v = 4.0 * c[0];
  for (int k = 1; k < 4; ++k) v = v * z + double(4 - k) * c[k];
  return v;
}

std::string format_roots(const std::array<std::complex<double>, 4>& z) {
  std::ostringstream os;
  os.precision(10);
  for (const auto& v : z) os << " (" << v.real() << (v.imag() < 0 ? "" : "+") << v.imag() << "i)";
  return os.str();
}

}  // namespace

std::string to_string(Chart chart) {
  return chart == Chart::BoyerLindquist ? "boyer-lindquist" : "starred";
}

std::array<std::complex<double>, 4> quartic_roots(const std::array<double, 5>& c) {
  if (c[0] == 0.0) throw Error(ErrorCode::InvalidArgument, "quartic leading coefficient is zero");
  Eigen::Matrix4d companion = Eigen::Matrix4d::Zero();
  for (int k = 0; k < 4; ++k) companion(0, k) = -c[k + 1] / c[0];
  for (int k = 1; k < 4; ++k) companion(k, k - 1) = 1.0;
  Eigen::EigenSolver<Eigen::Matrix4d> es(companion, false);
  std::array<std::complex<double>, 4> z;
  for (int k = 0; k < 4; ++k) z[k] = es.eigenvalues()(k);

  // Newton polishing; stop once the update is at rounding level.
  for (auto& root : z) {
    for (int it = 0; it < 50; ++it) {
      const auto d = horner_prime(c, root);
      if (std::abs(d) == 0.0) break;
      const auto step = horner(c, root) / d;
      root -= step;
      if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(root))) break;
    }
  }
  std::sort(z.begin(), z.end(), [](auto x, auto y) {
    return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
  });
  return z;
}

double quartic_discriminant(const std::array<double, 5>& q) {
  const double a = q[0], b = q[1], c = q[2], d = q[3], e = q[4];
  return 256 * a * a * a * e * e * e - 192 * a * a * b * d * e * e - 128 * a * a * c * c * e * e +
         144 * a * a * c * d * d * e - 27 * a * a * d * d * d * d + 144 * a * b * b * c * e * e -
         6 * a * b * b * d * d * e - 80 * a * b * c * c * d * e + 18 * a * b * c * d * d * d +
         16 * a * c * c * c * c * e - 4 * a * c * c * c * d * d - 27 * b * b * b * b * e * e +
         18 * b * b * b * c * d * e - 4 * b * b * b * d * d * d - 4 * b * b * c * c * c * e +
         b * b * c * c * d * d;
}

// ---------------------------------------------------------------------------

SpacetimeParams SpacetimeParams::make(double lambda, double a, double mass) {
  if (!(lambda > 0.0)) throw Error(ErrorCode::InvalidArgument, "lambda must be positive");
  if (!(mass > 0.0)) throw Error(ErrorCode::InvalidArgument, "mass must be positive");
  if (!std::isfinite(a)) throw Error(ErrorCode::InvalidArgument, "a must be finite");

  SpacetimeParams p;
  p.lambda_ = lambda;
  p.a_ = a;
  p.mass_ = mass;
  p.b_ = 1.0 + lambda * a * a / 3.0;

  const auto coeffs = p.mu_coefficients();
  const auto z = quartic_roots(coeffs);
  double scale = 0;
  for (const auto& v : z) scale = std::max(scale, std::abs(v));

  auto fail = [&](const std::string& why) {
    std::ostringstream os;
    os << why << "; roots" << format_roots(z) << "; discriminant " << quartic_discriminant(coeffs);
    throw Error(ErrorCode::NotSubextremal, os.str());
  };

  for (int k = 0; k < 4; ++k) {
    if (std::abs(z[k].imag()) > 1e-9 * std::max(1.0, scale)) fail("mu has non-real roots");
    p.roots_[k] = z[k].real();
  }
  std::sort(p.roots_.begin(), p.roots_.end());
  for (int k = 0; k < 3; ++k) {
    if (p.roots_[k + 1] - p.roots_[k] <= 1e-8 * scale) fail("mu has a repeated root");
  }
  return p;
}

std::array<double, 5> SpacetimeParams::mu_coefficients() const {
  return {-lambda_ / 3.0, 0.0, 1.0 - lambda_ * a_ * a_ / 3.0, -2.0 * mass_, a_ * a_};
}

double SpacetimeParams::c_theta(double theta) const {
  const double ct = std::cos(theta);
  return 1.0 + lambda_ * a_ * a_ / 3.0 * ct * ct;
}

double SpacetimeParams::c_theta_prime(double theta) const {
  return -2.0 * lambda_ * a_ * a_ / 3.0 * std::cos(theta) * std::sin(theta);
}

double SpacetimeParams::mu(double r) const {
  // (r^2 + a^2)(1 - lambda r^2/3) - 2 m r, expanded
  return ((-lambda_ / 3.0 * r * r + (1.0 - lambda_ * a_ * a_ / 3.0)) * r - 2.0 * mass_) * r + a_ * a_;
}

double SpacetimeParams::mu_prime(double r) const {
  return -4.0 * lambda_ / 3.0 * r * r * r + 2.0 * (1.0 - lambda_ * a_ * a_ / 3.0) * r - 2.0 * mass_;
}

double SpacetimeParams::mu_second(double r) const {
  return -4.0 * lambda_ * r * r + 2.0 * (1.0 - lambda_ * a_ * a_ / 3.0);
}

double SpacetimeParams::mu_critical_radius() const {
  std::uintmax_t iters = 200;
  auto [lo, hi] = boost::math::tools::toms748_solve(
      [this](double r) { return mu_prime(r); }, r_e(), r_c(), mu_prime(r_e()), mu_prime(r_c()),
      boost::math::tools::eps_tolerance<double>(52), iters);
  return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------

HorizonStructure horizon_structure(const SpacetimeParams& params, double delta_request) {
  if (!(delta_request > 0.0)) throw Error(ErrorCode::InvalidArgument, "delta_request must be positive");
  HorizonStructure h;
  h.r_neg = params.r_neg();
  h.r_C = params.r_C();
  h.r_e = params.r_e();
  h.r_c = params.r_c();
  const double a2 = params.a() * params.a();
  h.kappa_e = std::abs(params.mu_prime(h.r_e)) / (2.0 * params.b() * (h.r_e * h.r_e + a2));
  h.kappa_c = std::abs(params.mu_prime(h.r_c)) / (2.0 * params.b() * (h.r_c * h.r_c + a2));

  // {r = const} is spacelike iff dr is timelike: G(dr, dr) = mu / rho^2 < 0.
  double delta = delta_request;
  for (int k = 0; k <= 20; ++k) {
    if (params.mu(h.r_e - delta) < 0.0 && params.mu(h.r_c + delta) < 0.0 && h.r_e - delta > h.r_C) {
      h.delta = delta;
      h.halvings = k;
      return h;
    }
    delta *= 0.5;
  }
  throw Error(ErrorCode::DeltaSelection,
              "no delta <= delta_request makes both boundary hypersurfaces spacelike");
}

// ---------------------------------------------------------------------------

GaugeFunction GaugeFunction::make(const SpacetimeParams& params, const HorizonStructure& horizons,
                                  GaugeKind kind, std::vector<double> coefficients) {
  GaugeFunction g;
  g.kind_ = kind;
  g.coeffs_ = kind == GaugeKind::Affine ? std::vector<double>{} : std::move(coefficients);
  g.lambda_ = params.lambda();
  g.a_ = params.a();
  g.b_ = params.b();
  g.mass_ = params.mass();
  g.r_neg_ = horizons.r_neg;
  g.r_C_ = horizons.r_C;
  g.r_e_ = horizons.r_e;
  g.r_c_ = horizons.r_c;
  g.r_min_ = horizons.r_min();
  g.r_max_ = horizons.r_max();
  g.validate();
  return g;
}

double GaugeFunction::poly(double x) const {
  double v = 0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) v = v * x + *it;
  return v;
}

double GaugeFunction::poly_prime(double x) const {
  double v = 0;
  for (std::size_t k = coeffs_.size(); k-- > 1;) v = v * x + double(k) * coeffs_[k];
  return v;
}

double GaugeFunction::f(double r) const {
  const double x = (r - r_e_) / (r_c_ - r_e_);
  return 2.0 * x - 1.0 + x * (1.0 - x) * poly(x);
}

double GaugeFunction::f_prime(double r) const {
  const double len = r_c_ - r_e_;
  const double x = (r - r_e_) / len;
  return (2.0 + (1.0 - 2.0 * x) * poly(x) + x * (1.0 - x) * poly_prime(x)) / len;
}

// 1 - f^2 = x(1-x)(2 + (1-x)p)(2 - xp) and mu = (lambda/3) L^2 x(1-x)(r - r_-)(r - r_C).
double GaugeFunction::dr_coefficient(double r) const {
  const double len = r_c_ - r_e_;
  const double x = (r - r_e_) / len;
  const double p = poly(x);
  const double num = (2.0 + (1.0 - x) * p) * (2.0 - x * p);
  const double den = lambda_ / 3.0 * len * len * (r - r_neg_) * (r - r_C_);
  return num / den;
}

double GaugeFunction::dr_coefficient_prime(double r) const {
  const double len = r_c_ - r_e_;
  const double x = (r - r_e_) / len;
  const double p = poly(x), dp = poly_prime(x);
  const double u = 2.0 + (1.0 - x) * p, v = 2.0 - x * p;
  const double du = -p + (1.0 - x) * dp, dv = -p - x * dp;
  const double num = u * v;
  const double dnum = (du * v + u * dv) / len;
  const double k = lambda_ / 3.0 * len * len;
  const double den = k * (r - r_neg_) * (r - r_C_);
  const double dden = k * ((r - r_C_) + (r - r_neg_));
  return (dnum * den - num * dden) / (den * den);
}

double GaugeFunction::phi_prime(double r) const {
  const double mu = ((-lambda_ / 3.0 * r * r + (1.0 - lambda_ * a_ * a_ / 3.0)) * r - 2.0 * mass_) * r + a_ * a_;
  return b_ * (r * r + a_ * a_) * f(r) / mu;
}

double GaugeFunction::psi_prime(double r) const {
  const double mu = ((-lambda_ / 3.0 * r * r + (1.0 - lambda_ * a_ * a_ / 3.0)) * r - 2.0 * mass_) * r + a_ * a_;
  return b_ * a_ * f(r) / mu;
}

double GaugeFunction::phi(double r) const {
  if (!(r > r_e_ && r < r_c_)) throw Error(ErrorCode::ChartDomain, "Phi is defined on (r_e, r_c) only");
  const double mid = 0.5 * (r_e_ + r_c_);
  if (r == mid) return 0.0;
  double err = 0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [this](double s) { return phi_prime(s); }, mid, r, 25, 1e-13, &err);
}

double GaugeFunction::psi(double r) const {
  if (!(r > r_e_ && r < r_c_)) throw Error(ErrorCode::ChartDomain, "Psi is defined on (r_e, r_c) only");
  const double mid = 0.5 * (r_e_ + r_c_);
  if (r == mid) return 0.0;
  double err = 0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [this](double s) { return psi_prime(s); }, mid, r, 25, 1e-13, &err);
}

void GaugeFunction::validate() {
  GaugeValidation v;
  v.ok = true;
  v.worst_dt_norm = -std::numeric_limits<double>::infinity();
  v.min_dr_coefficient = std::numeric_limits<double>::infinity();
  constexpr int nr = 2001, nth = 181;
  const double b2 = b_ * b_, a2 = a_ * a_;
  for (int i = 0; i < nr; ++i) {
    const double r = r_min_ + (r_max_ - r_min_) * i / (nr - 1);
    const double h = dr_coefficient(r);
    v.min_dr_coefficient = std::min(v.min_dr_coefficient, h);
    const double r2a2 = r * r + a2;
    for (int j = 0; j < nth; ++j) {
      const double th = kPi * j / (nth - 1);
      const double s = std::sin(th), ct = std::cos(th);
      const double c = 1.0 + lambda_ * a2 / 3.0 * ct * ct;
      // rho^2 G_*(dt_*, dt_*)
      const double val = b2 * a2 * s * s / c - b2 * h * r2a2 * r2a2;
      if (val > v.worst_dt_norm) {
        v.worst_dt_norm = val;
        v.worst_r = r;
        v.worst_theta = th;
      }
    }
  }
  if (!(v.min_dr_coefficient > 0.0) || !std::isfinite(v.min_dr_coefficient)) {
    v.ok = false;
    v.diagnostic = "(1 - f^2)/mu is not positive on the chart";
  } else if (!(v.worst_dt_norm < 0.0)) {
    std::ostringstream os;
    os << "level sets of t_* fail to be spacelike: rho^2 G(dt_*, dt_*) = " << v.worst_dt_norm
       << " at r = " << v.worst_r << ", theta = " << v.worst_theta;
    v.ok = false;
    v.diagnostic = os.str();
  }
  validation_ = v;
}

void GaugeFunction::require_valid() const {
  if (!validation_.ok) throw Error(ErrorCode::GaugeInvalid, validation_.diagnostic);
}

Geometry Geometry::make(double lambda, double a, double mass, double delta_request, GaugeKind kind,
                        std::vector<double> coefficients) {
  auto params = SpacetimeParams::make(lambda, a, mass);
  auto horizons = horizon_structure(params, delta_request);
  auto gauge = GaugeFunction::make(params, horizons, kind, std::move(coefficients));
  return Geometry{params, horizons, gauge};
}

// ---------------------------------------------------------------------------

StationaryFrame StationaryFrame::make(const SpacetimeParams& params, double r0) {
  const double slack = 1e-12 * params.r_c();
  if (!(r0 >= params.r_e() - slack && r0 <= params.r_c() + slack)) {
    std::ostringstream os;
    os << "r0 = " << r0 << " outside [r_e, r_c] = [" << params.r_e() << ", " << params.r_c() << "]";
    throw Error(ErrorCode::InvalidArgument, os.str());
  }
  const double a = params.a();
  return StationaryFrame{r0, a / (r0 * r0 + a * a)};
}

// ---------------------------------------------------------------------------

MetricSample metric_at(const Geometry& geometry, Chart chart, const std::array<double, 4>& x) {
  const auto& p = geometry.params;
  const auto& hz = geometry.horizons;
  const double r = x[1], th = x[3];
  if (!(th > 0.0 && th < kPi)) throw Error(ErrorCode::ChartDomain, "theta must lie in (0, pi)");
  if (chart == Chart::BoyerLindquist) {
    if (!(r > hz.r_e && r < hz.r_c)) throw Error(ErrorCode::ChartDomain, "Boyer-Lindquist chart needs r in (r_e, r_c)");
  } else if (!(r > hz.r_min() && r < hz.r_max())) {
    throw Error(ErrorCode::ChartDomain, "starred chart needs r in (r_e - delta, r_c + delta)");
  }

  const double a = p.a(), a2 = a * a, b = p.b(), b2 = b * b;
  const double s = std::sin(th), ct = std::cos(th), s2 = s * s;
  const double c = p.c_theta(th);
  const double mu = p.mu(r);
  const double rho2 = r * r + a2 * ct * ct;
  const double r2a2 = r * r + a2;

  MetricSample out;
  out.chart = chart;
  out.x = x;
  out.g.setZero();
  out.g_inv.setZero();

  // t, phi block is chart independent.
  const double k = 1.0 / (b2 * rho2);
  out.g(0, 0) = (c * s2 * a2 - mu) * k;
  out.g(0, 2) = out.g(2, 0) = (-c * s2 * a * r2a2 + mu * a * s2) * k;
  out.g(2, 2) = (c * s2 * r2a2 * r2a2 - mu * a2 * s2 * s2) * k;
  out.g(3, 3) = rho2 / c;
  out.g_inv(3, 3) = c / rho2;
  out.g_inv(1, 1) = mu / rho2;

  if (chart == Chart::BoyerLindquist) {
    out.g(1, 1) = rho2 / mu;
    out.g_inv(0, 0) = (b2 * a2 * s2 / c - b2 * r2a2 * r2a2 / mu) / rho2;
    out.g_inv(0, 2) = out.g_inv(2, 0) = (b2 * a / c - b2 * a * r2a2 / mu) / rho2;
    out.g_inv(2, 2) = (b2 / (c * s2) - b2 * a2 / mu) / rho2;
  } else {
    const double f = geometry.gauge.f(r);
    const double h = b2 * geometry.gauge.dr_coefficient(r);
    out.g(1, 1) = rho2 * geometry.gauge.dr_coefficient(r);
    out.g(0, 1) = out.g(1, 0) = -f / b;
    out.g(2, 1) = out.g(1, 2) = f * a * s2 / b;
    out.g_inv(0, 1) = out.g_inv(1, 0) = -b * f * r2a2 / rho2;
    out.g_inv(2, 1) = out.g_inv(1, 2) = -b * f * a / rho2;
    out.g_inv(0, 0) = (-h * r2a2 * r2a2 + b2 * a2 * s2 / c) / rho2;
    out.g_inv(0, 2) = out.g_inv(2, 0) = (-h * a * r2a2 + b2 * a / c) / rho2;
    out.g_inv(2, 2) = (-h * a2 + b2 / (c * s2)) / rho2;
  }
  out.sqrt_det = rho2 * s / b2;
  return out;
}

double t_norm(const SpacetimeParams& params, const StationaryFrame& frame, double r, double theta) {
  const double a = params.a(), a2 = a * a, b2 = params.b() * params.b();
  const double s2 = std::pow(std::sin(theta), 2);
  const double ct = std::cos(theta);
  const double rho2 = r * r + a2 * ct * ct;
  const double c = params.c_theta(theta);
  const double w = frame.omega;
  const double rot = a - (r * r + a2) * w;
  const double lapse = 1.0 - a * s2 * w;
  return (c * s2 * rot * rot - params.mu(r) * lapse * lapse) / (b2 * rho2);
}

std::string to_string(Horizon horizon) {
  return horizon == Horizon::Event ? "event" : "cosmological";
}

double horizon_radius(const SpacetimeParams& params, Horizon horizon) {
  return horizon == Horizon::Event ? params.r_e() : params.r_c();
}

double t_norm_radial_derivative(const SpacetimeParams& params, const StationaryFrame& frame,
                                Horizon horizon, double theta) {
  const double rh = horizon_radius(params, horizon);
  if (std::abs(frame.r0 - rh) > 1e-12 * params.r_c()) {
    throw Error(ErrorCode::FrameMismatch, "frame r0 is not the " + to_string(horizon) + " horizon radius");
  }
  const double a2 = params.a() * params.a();
  const double ct = std::cos(theta);
  const double b2 = params.b() * params.b();
  const double den = rh * rh + a2;
  return -params.mu_prime(rh) * (rh * rh + a2 * ct * ct) / (b2 * den * den);
}

std::string to_string(CausalLabel label) {
  switch (label) {
    case CausalLabel::Timelike: return "timelike";
    case CausalLabel::NullThreshold: return "null";
    case CausalLabel::Spacelike: return "spacelike";
  }
  return "?";
}

namespace {

double max_over_theta(const SpacetimeParams& params, const StationaryFrame& frame, double r) {
  constexpr int n = 721;
  double best = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < n; ++j) best = std::max(best, t_norm(params, frame, r, kPi * j / (n - 1)));
  return best;
}

// First r, walking from `from` towards `to`, where T stops being timelike for some theta.
double collar_edge(const SpacetimeParams& params, const StationaryFrame& frame, double from, double to) {
  constexpr int n = 4000;
  double prev = from;
  for (int k = 1; k <= n; ++k) {
    const double r = from + (to - from) * k / n;
    if (max_over_theta(params, frame, r) >= 0.0) {
      double lo = prev, hi = r;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (max_over_theta(params, frame, mid) >= 0.0 ? hi : lo) = mid;
      }
      return 0.5 * (lo + hi);
    }
    prev = r;
  }
  return to;
}

}  // namespace

ErgoregionMap ergoregion_map(const SpacetimeParams& params, const StationaryFrame& frame, int nr,
                             int ntheta) {
  if (nr < 2 || ntheta < 2) throw Error(ErrorCode::InvalidArgument, "ergoregion grid too small");
  ErgoregionMap map;
  map.nr = nr;
  map.ntheta = ntheta;
  const double re = params.r_e(), rc = params.r_c();
  for (int i = 0; i < nr; ++i) {
    map.r.push_back(re + (rc - re) * 0.5 * (1.0 - std::cos(kPi * (i + 0.5) / nr)));
  }
  for (int j = 0; j < ntheta; ++j) map.theta.push_back(kPi * j / (ntheta - 1));

  map.g_tt.resize(std::size_t(nr) * ntheta);
  map.label.resize(map.g_tt.size());
  for (int i = 0; i < nr; ++i) {
    for (int j = 0; j < ntheta; ++j) {
      const double v = t_norm(params, frame, map.r[i], map.theta[j]);
      const std::size_t idx = std::size_t(i) * ntheta + j;
      map.g_tt[idx] = v;
      const double tol = 1e-14;
      map.label[idx] = v < -tol ? CausalLabel::Timelike
                                : (v > tol ? CausalLabel::Spacelike : CausalLabel::NullThreshold);
    }
  }

  // 4-connected components of the spacelike cells.
  std::vector<int> owner(map.g_tt.size(), -1);
  std::vector<std::size_t> stack;
  for (std::size_t start = 0; start < owner.size(); ++start) {
    if (map.label[start] != CausalLabel::Spacelike || owner[start] >= 0) continue;
    ErgoregionComponent comp;
    comp.r_min = std::numeric_limits<double>::infinity();
    comp.r_max = -comp.r_min;
    const int id = static_cast<int>(map.components.size());
    owner[start] = id;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t idx = stack.back();
      stack.pop_back();
      const int i = static_cast<int>(idx / ntheta), j = static_cast<int>(idx % ntheta);
      ++comp.cells;
      comp.r_min = std::min(comp.r_min, map.r[i]);
      comp.r_max = std::max(comp.r_max, map.r[i]);
      if (i == 0) comp.touches_event = true;
      if (i == nr - 1) comp.touches_cosmological = true;
      const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
      for (int k = 0; k < 4; ++k) {
        const int ii = i + di[k], jj = j + dj[k];
        if (ii < 0 || ii >= nr || jj < 0 || jj >= ntheta) continue;
        const std::size_t n = std::size_t(ii) * ntheta + jj;
        if (map.label[n] == CausalLabel::Spacelike && owner[n] < 0) {
          owner[n] = id;
          stack.push_back(n);
        }
      }
    }
    map.components.push_back(comp);
  }

  map.collar_lo = frame.r0 <= re ? re : collar_edge(params, frame, frame.r0, re);
  map.collar_hi = frame.r0 >= rc ? rc : collar_edge(params, frame, frame.r0, rc);
  if (frame.r0 <= re) {
    map.collar_gamma = map.collar_hi - re;
  } else if (frame.r0 >= rc) {
    map.collar_gamma = rc - map.collar_lo;
  } else {
    map.collar_gamma = std::min(frame.r0 - map.collar_lo, map.collar_hi - frame.r0);
  }
  return map;
}

double beta_threshold(const SpacetimeParams& params, const HorizonStructure& horizons) {
  const double a2 = params.a() * params.a();
  double worst = 0;
  for (double r : {horizons.r_e, horizons.r_c}) {
    worst = std::max(worst, (r * r + a2) / std::abs(params.mu_prime(r)));
  }
  return 2.0 * params.b() * worst;
}

double beta_from_surface_gravity(const HorizonStructure& horizons) {
  return 1.0 / std::min(horizons.kappa_e, horizons.kappa_c);
}

double fredholm_window(double beta, double s) {
  if (!(s >= 0.5)) throw Error(ErrorCode::InvalidArgument, "regularity s must be at least 1/2");
  if (!(beta > 0.0)) throw Error(ErrorCode::InvalidArgument, "beta must be positive");
  return (1.0 - 2.0 * s) / (2.0 * beta);
}

}  // namespace kds
