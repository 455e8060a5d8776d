#include "kds/qnm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "kds/errors.hpp"
#include "kds/parallel.hpp"
#include "kds/random.hpp"
#include "kds/spectral.hpp"

namespace kds {

struct PencilContext {
  WaveOperator op;
};

namespace {

constexpr cplx I{0.0, 1.0};

bool increasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] > v[i - 1])) return false;
  return true;
}

// index of the cell [v[i], v[i+1]] holding t, clamped to the table
std::size_t cell(const std::vector<double>& v, double t) {
  auto it = std::upper_bound(v.begin(), v.end(), t);
  std::size_t i = it == v.begin() ? 0 : std::size_t(it - v.begin()) - 1;
  return std::min(i, v.size() - 2);
}

void shift_poly(cplx c[3], double nu) {
  c[0] += nu * c[1] + nu * nu * c[2];
  c[1] += 2.0 * nu * c[2];
}

std::vector<int> basis_degrees(int m, int count, Parity parity) {
  std::vector<int> ls;
  for (int l = std::abs(m); int(ls.size()) < count; ++l) {
    const int p = (l - std::abs(m)) % 2;
    if (parity == Parity::All || (parity == Parity::Even && p == 0) || (parity == Parity::Odd && p == 1))
      ls.push_back(l);
  }
  return ls;
}

// Columns of Y (and dY/dtheta) for the chosen degrees.
void basis_at(int m, const std::vector<int>& ls, double theta, double* y, double* dy) {
  const int am = std::abs(m);
  const int count = ls.back() - am + 1;
  std::vector<double> v(count), d(count);
  spectral::normalized_legendre(am, count, theta, v.data(), d.data());
  for (std::size_t k = 0; k < ls.size(); ++k) {
    y[k] = v[ls[k] - am];
    if (dy) dy[k] = d[ls[k] - am];
  }
}

double vector_norm(const Eigen::VectorXcd& v) { return v.norm(); }

struct Lu {
  Eigen::MatrixXcd a;
  std::vector<lapack_int> piv;
  bool ok = false;

  explicit Lu(Eigen::MatrixXcd m) : a(std::move(m)), piv(a.rows()) {
    const lapack_int n = lapack_int(a.rows());
    const lapack_int info = LAPACKE_zgetrf(LAPACK_COL_MAJOR, n, n, a.data(), n, piv.data());
    ok = info >= 0;  // info > 0 is an exact zero pivot, still usable after perturbation
    if (info > 0) {
      const double tiny = 1e-300 + 1e-16 * a.cwiseAbs().maxCoeff();
      a(info - 1, info - 1) = tiny;
    }
  }

  Eigen::VectorXcd solve(const Eigen::VectorXcd& b) const {
    Eigen::VectorXcd x = b;
    const lapack_int n = lapack_int(a.rows());
    LAPACKE_zgetrs(LAPACK_COL_MAJOR, 'N', n, 1, a.data(), n, piv.data(), x.data(), n);
    return x;
  }
};

Eigen::VectorXcd start_vector(int n) {
  Rng rng(0x5eed);
  Eigen::VectorXcd v(n);
  for (int i = 0; i < n; ++i) v[i] = cplx(rng.uniform(-1, 1), rng.uniform(-1, 1));
  return v / v.norm();
}

}  // namespace

// ---------------------------------------------------------------------------

std::string to_string(PotentialKind kind) {
  switch (kind) {
    case PotentialKind::Zero: return "zero";
    case PotentialKind::Constant: return "constant";
    case PotentialKind::Tabulated: return "tabulated";
  }
  return "?";
}

std::string to_string(FrequencyFrame frame) {
  return frame == FrequencyFrame::Lab ? "lab" : "stationary";
}

std::string to_string(Parity parity) {
  switch (parity) {
    case Parity::All: return "all";
    case Parity::Even: return "even";
    case Parity::Odd: return "odd";
  }
  return "?";
}

Potential Potential::zero() { return {}; }

Potential Potential::constant(cplx value) {
  Potential p;
  p.kind_ = PotentialKind::Constant;
  p.value_ = value;
  return p;
}

Potential Potential::tabulated(std::vector<double> r, std::vector<double> theta,
                               std::vector<cplx> values) {
  if (r.size() < 2 || theta.size() < 2 || !increasing(r) || !increasing(theta))
    throw Error(ErrorCode::InvalidArgument, "tabulated potential needs increasing axes with >= 2 nodes");
  if (values.size() != r.size() * theta.size())
    throw Error(ErrorCode::InvalidArgument, "tabulated potential: values size does not match the axes");
  for (const auto& v : values)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw Error(ErrorCode::InvalidArgument, "tabulated potential has non-finite values");
  Potential p;
  p.kind_ = PotentialKind::Tabulated;
  p.r_ = std::move(r);
  p.theta_ = std::move(theta);
  p.values_ = std::move(values);
  return p;
}

cplx Potential::operator()(double r, double theta) const {
  switch (kind_) {
    case PotentialKind::Zero: return 0.0;
    case PotentialKind::Constant: return value_;
    case PotentialKind::Tabulated: break;
  }
  const std::size_t i = cell(r_, r), j = cell(theta_, theta);
  const std::size_t nt = theta_.size();
  const double u = std::clamp((r - r_[i]) / (r_[i + 1] - r_[i]), 0.0, 1.0);
  const double v = std::clamp((theta - theta_[j]) / (theta_[j + 1] - theta_[j]), 0.0, 1.0);
  const cplx f00 = values_[i * nt + j], f01 = values_[i * nt + j + 1];
  const cplx f10 = values_[(i + 1) * nt + j], f11 = values_[(i + 1) * nt + j + 1];
  return (1 - u) * ((1 - v) * f00 + v * f01) + u * ((1 - v) * f10 + v * f11);
}

bool Potential::is_real() const {
  if (kind_ == PotentialKind::Constant) return value_.imag() == 0.0;
  for (const auto& v : values_)
    if (v.imag() != 0.0) return false;
  return true;
}

bool Potential::equatorially_symmetric() const {
  if (kind_ != PotentialKind::Tabulated) return true;
  const std::size_t nt = theta_.size();
  for (std::size_t j = 0; j < nt; ++j)
    if (std::abs(theta_[j] + theta_[nt - 1 - j] - std::numbers::pi) > 1e-12) return false;
  for (std::size_t i = 0; i < r_.size(); ++i)
    for (std::size_t j = 0; j < nt; ++j)
      if (values_[i * nt + j] != values_[i * nt + nt - 1 - j]) return false;
  return true;
}

bool Potential::covers(double r_lo, double r_hi) const {
  if (kind_ != PotentialKind::Tabulated) return true;
  return r_.front() <= r_lo && r_.back() >= r_hi && theta_.front() <= 0.0 &&
         theta_.back() >= std::numbers::pi;
}

// ---------------------------------------------------------------------------

WaveOperator WaveOperator::assemble(const Geometry& geometry, const WaveOperatorSpec& spec,
                                    FrequencyFrame frame) {
  if (!geometry.gauge.validation().ok)
    throw Error(ErrorCode::GaugeInvalid, "slices are not spacelike: " + geometry.gauge.validation().diagnostic);
  if (!spec.potential.covers(geometry.horizons.r_min(), geometry.horizons.r_max()))
    throw Error(ErrorCode::InvalidArgument, "tabulated potential does not cover [r_e - delta, r_c + delta] x [0, pi]");
  const auto& p = geometry.params;
  if (!(spec.frame.r0 >= p.r_e() * (1 - 1e-12) && spec.frame.r0 <= p.r_c() * (1 + 1e-12)))
    throw Error(ErrorCode::InvalidArgument, "frame r0 outside [r_e, r_c]");
  WaveOperator op(geometry, spec, frame);
  op.nu_ = frame == FrequencyFrame::Stationary ? spec.m * spec.frame.omega : 0.0;
  return op;
}

WaveOperator::Radial WaveOperator::radial(double r) const {
  const auto& p = geometry_.params;
  const auto& gauge = geometry_.gauge;
  const double a = p.a(), b = p.b(), R2 = r * r + a * a, ma = spec_.m * a;
  const double mu = p.mu(r), dmu = p.mu_prime(r);
  const double f = gauge.f(r), df = gauge.f_prime(r);
  const double h = b * b * gauge.dr_coefficient(r);
  Radial c{};
  c.d2[0] = mu;
  c.d1[0] = dmu - 2.0 * I * b * f * ma;
  c.d1[1] = 2.0 * I * b * f * R2;
  c.d0[0] = -I * b * df * ma + h * ma * ma;
  c.d0[1] = I * b * (df * R2 + 2.0 * r * f) - 2.0 * h * R2 * ma;
  c.d0[2] = h * R2 * R2;
  shift_poly(c.d2, nu_);
  shift_poly(c.d1, nu_);
  shift_poly(c.d0, nu_);
  return c;
}

void WaveOperator::angular(double theta, cplx out[3]) const {
  const auto& p = geometry_.params;
  const double a = p.a(), b = p.b(), c = p.c_theta(theta), s = std::sin(theta);
  const double m = spec_.m;
  out[0] = -b * b * m * m / (c * s * s);
  out[1] = 2.0 * b * b * a * m / c;
  out[2] = -b * b * a * a * s * s / c;
  shift_poly(out, nu_);
}

cplx WaveOperator::apply(cplx sigma, double r, double theta, const Jet& psi) const {
  const auto& p = geometry_.params;
  const Radial rad = radial(r);
  cplx ang[3];
  angular(theta, ang);
  cplx out = 0, pw = 1;
  for (int k = 0; k < 3; ++k) {
    out += pw * (rad.d2[k] * psi.rr + rad.d1[k] * psi.r + (rad.d0[k] + ang[k]) * psi.v);
    pw *= sigma;
  }
  const double c = p.c_theta(theta), dc = p.c_theta_prime(theta);
  out += c * psi.thth + (dc + c * std::cos(theta) / std::sin(theta)) * psi.th;
  const double a = p.a(), x = std::cos(theta);
  out += (r * r + a * a * x * x) * spec_.potential(r, theta) * psi.v;
  return out;
}

double WaveOperator::sigma2_coefficient(double r, double theta) const {
  const Radial rad = radial(r);
  cplx ang[3];
  angular(theta, ang);
  return (rad.d0[2] + ang[2]).real();
}

// ---------------------------------------------------------------------------

Eigen::MatrixXcd OperatorPencil::at(cplx sigma) const { return P0 + sigma * (P1 + sigma * P2); }

Eigen::MatrixXcd OperatorPencil::derivative_at(cplx sigma) const { return P1 + 2.0 * sigma * P2; }

cplx OperatorPencil::evaluate(const Eigen::VectorXcd& v, double r, double theta) const {
  if (v.size() != dimension()) throw Error(ErrorCode::InvalidArgument, "state vector has the wrong size");
  const double t = 2.0 * (r - r_min) / (r_max - r_min) - 1.0;
  std::vector<double> y(ntheta);
  basis_at(m, l_values, theta, y.data(), nullptr);
  std::vector<cplx> column(nr);
  cplx out = 0;
  for (int k = 0; k < ntheta; ++k) {
    for (int i = 0; i < nr; ++i) column[i] = v[i * ntheta + k];
    out += y[k] * spectral::chebyshev_interpolate(x_nodes, column.data(), t);
  }
  return out;
}

OperatorPencil discretize(const WaveOperator& op, const GridSpec& grid) {
  if (grid.nr < 8 || grid.ntheta < 4)
    throw Error(ErrorCode::GridTooCoarse, "need Nr >= 8 and Ntheta >= 4, got " + std::to_string(grid.nr) +
                                              " x " + std::to_string(grid.ntheta));
  const auto& spec = op.spec();
  if (grid.parity != Parity::All && !spec.potential.equatorially_symmetric())
    throw Error(ErrorCode::Degenerate, "parity reduction needs an equatorially symmetric potential");
  const auto& g = op.geometry();
  const auto& p = g.params;

  OperatorPencil pen;
  pen.grid = grid;
  pen.nr = grid.nr;
  pen.ntheta = grid.ntheta;
  pen.delta = g.horizons.delta;
  pen.r_min = g.horizons.r_min();
  pen.r_max = g.horizons.r_max();
  pen.m = spec.m;
  pen.r0 = spec.frame.r0;
  pen.omega = spec.frame.omega;
  pen.shift = op.shift();
  pen.frame = op.frame();
  pen.x_nodes = spectral::chebyshev_points(grid.nr);
  if (grid.ascending) std::reverse(pen.x_nodes.begin(), pen.x_nodes.end());
  for (double x : pen.x_nodes) pen.r_nodes.push_back(pen.r_min + 0.5 * (pen.r_max - pen.r_min) * (x + 1.0));
  pen.l_values = basis_degrees(spec.m, grid.ntheta, grid.parity);
  pen.context = std::make_shared<PencilContext>(PencilContext{op});

  const int nr = grid.nr, nt = grid.ntheta, n = nr * nt;
  const Eigen::MatrixXd D = spectral::differentiation_matrix(pen.r_nodes);
  const Eigen::MatrixXd D2 = D * D;

  // angular Galerkin blocks
  const int nq = grid.quadrature > 0 ? grid.quadrature : pen.l_values.back() + 48;
  const auto rule = spectral::gauss_legendre(nq);
  Eigen::MatrixXd Y(nq, nt), dY(nq, nt);
  std::vector<double> theta(nq);
  for (int q = 0; q < nq; ++q) {
    theta[q] = std::acos(rule.x[q]);
    std::vector<double> y(nt), dy(nt);
    basis_at(spec.m, pen.l_values, theta[q], y.data(), dy.data());
    for (int k = 0; k < nt; ++k) {
      Y(q, k) = y[k];
      dY(q, k) = dy[k];
    }
  }
  Eigen::MatrixXcd ang[3];
  for (auto& A : ang) A = Eigen::MatrixXcd::Zero(nt, nt);
  for (int q = 0; q < nq; ++q) {
    cplx w[3];
    op.angular(theta[q], w);
    const double c = p.c_theta(theta[q]);
    for (int k = 0; k < nt; ++k)
      for (int l = 0; l < nt; ++l) {
        const double yy = rule.w[q] * Y(q, k) * Y(q, l);
        for (int s = 0; s < 3; ++s) ang[s](k, l) += w[s] * yy;
        ang[0](k, l) -= rule.w[q] * c * dY(q, k) * dY(q, l);
      }
  }
  const bool has_potential = spec.potential.kind() != PotentialKind::Zero;
  const double a2 = p.a() * p.a();

  pen.P0 = Eigen::MatrixXcd::Zero(n, n);
  pen.P1 = Eigen::MatrixXcd::Zero(n, n);
  pen.P2 = Eigen::MatrixXcd::Zero(n, n);
  Eigen::MatrixXcd* P[3] = {&pen.P0, &pen.P1, &pen.P2};

  parallel_for(std::size_t(nr), [&](std::size_t ii) {
    const int i = int(ii);
    const double r = pen.r_nodes[i];
    const auto rad = op.radial(r);
    Eigen::MatrixXcd V;
    if (has_potential) {
      V = Eigen::MatrixXcd::Zero(nt, nt);
      for (int q = 0; q < nq; ++q) {
        const double x = rule.x[q];
        const cplx w = rule.w[q] * (r * r + a2 * x * x) * spec.potential(r, theta[q]);
        for (int k = 0; k < nt; ++k)
          for (int l = 0; l < nt; ++l) V(k, l) += w * Y(q, k) * Y(q, l);
      }
    }
    for (int s = 0; s < 3; ++s) {
      auto& M = *P[s];
      for (int k = 0; k < nt; ++k) {
        const int row = i * nt + k;
        if (rad.d2[s] != 0.0 || rad.d1[s] != 0.0) {
          for (int j = 0; j < nr; ++j) M(row, j * nt + k) += rad.d2[s] * D2(i, j) + rad.d1[s] * D(i, j);
        }
        M(row, row) += rad.d0[s];
        for (int l = 0; l < nt; ++l) M(row, i * nt + l) += ang[s](k, l);
        if (s == 0 && has_potential)
          for (int l = 0; l < nt; ++l) M(row, i * nt + l) += V(k, l);
      }
    }
  });
  return pen;
}

double mode_residual(const OperatorPencil& pencil, cplx sigma, const Eigen::VectorXcd& v) {
  const double nv = vector_norm(v);
  if (!(nv > 0)) throw Error(ErrorCode::ZeroVector, "mode_residual needs a nonzero vector");
  return (pencil.at(sigma) * v).norm() / nv;
}

std::vector<cplx> pencil_eigenvalues(const OperatorPencil& pencil) {
  const int n = pencil.dimension(), N = 2 * n;
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(N, N), B = Eigen::MatrixXcd::Zero(N, N);
  A.block(0, n, n, n).setIdentity();
  A.block(n, 0, n, n) = -pencil.P0;
  A.block(n, n, n, n) = -pencil.P1;
  B.block(0, 0, n, n).setIdentity();
  B.block(n, n, n, n) = pencil.P2;
  std::vector<cplx> alpha(N), beta(N);
  const lapack_int info = LAPACKE_zggev(LAPACK_COL_MAJOR, 'N', 'N', N, A.data(), N, B.data(), N,
                                        alpha.data(), beta.data(), nullptr, 1, nullptr, 1);
  if (info != 0) throw Error(ErrorCode::EigensolveFailure, "zggev returned info = " + std::to_string(info));
  std::vector<cplx> out;
  for (int i = 0; i < N; ++i) {
    if (std::abs(beta[i]) <= 1e-14 * std::abs(alpha[i])) continue;  // infinite
    const cplx s = alpha[i] / beta[i];
    if (std::isfinite(s.real()) && std::isfinite(s.imag())) out.push_back(s);
  }
  return out;
}

Polished polish_eigenpair(const OperatorPencil& pencil, cplx sigma0, int max_iterations) {
  Polished out;
  out.sigma = sigma0;
  const Eigen::VectorXcd u = start_vector(pencil.dimension());
  Eigen::VectorXcd x = u;
  double last = std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_iterations; ++it) {
    Lu lu(pencil.at(out.sigma));
    const Eigen::VectorXcd y = lu.solve(pencil.derivative_at(out.sigma) * x);
    const cplx uy = u.dot(y);
    if (!std::isfinite(std::abs(uy)) || uy == 0.0) break;
    const cplx step = 1.0 / uy;
    out.sigma -= step;
    x = y / uy;
    out.iterations = it + 1;
    const double d = std::abs(step);
    const double scale = std::max(1.0, std::abs(out.sigma));
    // stop at roundoff level or when the steps stop shrinking near it
    if (d <= 1e-14 * scale || (d >= last && d < 1e-9 * scale)) {
      last = d;
      break;
    }
    last = d;
  }
  out.converged = last < 1e-9 * std::max(1.0, std::abs(out.sigma));
  // one more solve at the final sigma sharpens the vector
  Lu lu(pencil.at(out.sigma));
  Eigen::VectorXcd y = lu.solve(pencil.derivative_at(out.sigma) * x);
  if (y.allFinite() && y.norm() > 0) x = y;
  out.vector = x / x.norm();
  out.residual = mode_residual(pencil, out.sigma, out.vector);
  return out;
}

// ---------------------------------------------------------------------------

SpectralWindow SpectralWindow::defaults(const Geometry& geometry) {
  const double kmin = std::min(geometry.horizons.kappa_e, geometry.horizons.kappa_c);
  SpectralWindow w;
  w.re_max = 2.0 / geometry.params.mass();
  w.im_min = -3.0 * kmin;
  w.im_max = 3.0 * kmin;
  return w;
}

bool SpectralWindow::contains(cplx s) const {
  return std::abs(s.real()) <= re_max && s.imag() >= im_min && s.imag() <= im_max;
}

QNMResult solve_qnm(const OperatorPencil& pencil, const SolveOptions& options) {
  if (!pencil.context) throw Error(ErrorCode::InvalidArgument, "pencil was not produced by discretize");
  const WaveOperator& op = pencil.context->op;
  const Geometry& g = op.geometry();
  QNMResult res;
  res.r0 = pencil.r0;
  res.omega = pencil.omega;
  res.m = pencil.m;
  res.grid = pencil.grid;
  res.dimension = pencil.dimension();
  res.window = options.window;
  res.beta = beta_from_surface_gravity(g.horizons);
  res.s = options.s;
  res.admissibility_bound = fredholm_window(res.beta, options.s);
  res.required_s = 0.5 - res.beta * options.window.im_min;
  if (options.window.im_min < res.admissibility_bound) {
    res.window_below_line = true;
    if (options.window.im_max <= res.admissibility_bound)
      res.warnings.push_back("window lies entirely below the admissibility line; raise s");
    else
      res.warnings.push_back("window dips below the admissibility line; raise s");
  }
  const double lab = pencil.frame == FrequencyFrame::Stationary ? pencil.shift : 0.0;

  const auto raw = pencil_eigenvalues(pencil);
  std::vector<cplx> cand;
  for (const auto& s : raw)
    if (options.window.contains(s)) cand.push_back(s);
  std::sort(cand.begin(), cand.end(), [](cplx x, cplx y) {
    return x.imag() != y.imag() ? x.imag() > y.imag() : x.real() < y.real();
  });
  res.raw_in_window = int(cand.size());

  std::unique_ptr<OperatorPencil> fine;
  if (options.doubling_check && !cand.empty()) {
    GridSpec gs = pencil.grid;
    gs.nr *= 2;
    gs.ntheta *= 2;
    fine = std::make_unique<OperatorPencil>(discretize(op, gs));
  }

  auto clustered = [&](cplx a, cplx b) {
    return std::abs(a - b) <= options.cluster_tol * std::max(1.0, std::abs(a));
  };

  for (const auto& s0 : cand) {
    bool dup = false;
    for (const auto& md : res.modes)
      if (clustered(md.sigma, s0)) dup = true;
    if (dup) continue;

    QNMMode mode;
    const Polished pol = polish_eigenpair(pencil, s0);
    mode.sigma = pol.sigma;
    mode.sigma_lab = pol.sigma + lab;
    mode.residual = pol.residual;
    mode.vector = pol.vector;
    mode.admissible = mode.sigma.imag() > res.admissibility_bound;
    mode.multiplicity = 0;
    for (const auto& r : raw)
      if (clustered(mode.sigma, r)) ++mode.multiplicity;
    mode.multiplicity = std::max(mode.multiplicity, 1);
    {
      std::vector<double> wk(pencil.ntheta, 0.0);
      for (int i = 0; i < pencil.nr; ++i)
        for (int k = 0; k < pencil.ntheta; ++k) wk[k] += std::norm(mode.vector[i * pencil.ntheta + k]);
      mode.dominant_l = pencil.l_values[std::max_element(wk.begin(), wk.end()) - wk.begin()];
    }

    bool ok = pol.converged && mode.residual < options.residual_tol;
    if (!pol.converged) mode.note = "polish did not converge";
    else if (!(mode.residual < options.residual_tol)) mode.note = "residual above tolerance";
    if (ok && std::abs(mode.sigma - s0) > options.cluster_tol * std::max(1.0, std::abs(s0))) {
      ok = false;
      mode.note = "polish moved away from the pencil eigenvalue";
    }
    if (ok && fine) {
      const Polished f = polish_eigenpair(*fine, mode.sigma, 12);
      mode.doubling_delta = std::abs(f.sigma - mode.sigma);
      if (!f.converged || !(mode.doubling_delta < options.doubling_tol)) {
        ok = false;
        mode.note = "unstable under grid doubling";
      }
    }
    mode.converged = ok;
    (ok ? res.modes : res.unconverged).push_back(std::move(mode));
  }
  if (res.modes.empty()) res.warnings.push_back("EmptyWindow: no converged modes in the window");
  return res;
}

QNMResult shift_frame(const QNMResult& result, const SpacetimeParams& params, double new_r0) {
  const auto frame = StationaryFrame::make(params, new_r0);
  QNMResult out = result;
  const double d = result.m * (result.omega - frame.omega);
  out.r0 = frame.r0;
  out.omega = frame.omega;
  for (auto* list : {&out.modes, &out.unconverged})
    for (auto& md : *list) md.sigma += d;
  return out;
}

}  // namespace kds
