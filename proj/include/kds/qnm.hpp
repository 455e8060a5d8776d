#pragma once

// Stationary wave operator P_sigma = e^{i sigma t} P e^{-i sigma t} for fixed
// azimuthal number m on the horizon-penetrating slice, its Chebyshev x
// associated-Legendre discretization as a quadratic pencil, and the
// quasinormal-mode solver.
//
// Frequencies refer to T = d_t* + omega d_phi*: u = e^{-i sigma_T t*} e^{i m phi_T} psi(r, theta)
// with phi_T = phi* - omega t*, so sigma_lab = sigma_T + m omega.

#include <complex>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kds/geometry.hpp"

namespace kds {

using cplx = std::complex<double>;

enum class PotentialKind { Zero, Constant, Tabulated };
std::string to_string(PotentialKind kind);

// A(r, theta). Tabulated potentials are bilinear on a rectangular grid with
// increasing axes, values row-major (index i * theta.size() + j).
class Potential {
 public:
  static Potential zero();
  static Potential constant(cplx value);
  static Potential tabulated(std::vector<double> r, std::vector<double> theta,
                             std::vector<cplx> values);

  PotentialKind kind() const { return kind_; }
  cplx operator()(double r, double theta) const;
  bool is_real() const;
  /// A(r, pi - theta) = A(r, theta) at every tabulated node.
  bool equatorially_symmetric() const;
  /// Whether the table covers [r_lo, r_hi] x [0, pi].
  bool covers(double r_lo, double r_hi) const;

  cplx value() const { return value_; }
  const std::vector<double>& r_axis() const { return r_; }
  const std::vector<double>& theta_axis() const { return theta_; }
  const std::vector<cplx>& values() const { return values_; }

 private:
  PotentialKind kind_ = PotentialKind::Zero;
  cplx value_{};
  std::vector<double> r_, theta_;
  std::vector<cplx> values_;
};

struct WaveOperatorSpec {
  Potential potential = Potential::zero();
  StationaryFrame frame;
  int m = 0;
};

enum class FrequencyFrame { Lab, Stationary };
std::string to_string(FrequencyFrame frame);

// psi and its partial derivatives at a point.
struct Jet {
  cplx v{}, r{}, rr{}, th{}, thth{};
};

// Coefficient functions of rho^2 P_sigma acting on psi(r, theta). The radial
// part only depends on r and the angular part only on theta; both are
// quadratic in sigma and carried per power (index 0, 1, 2). The potential
// enters as rho^2 A at sigma^0.
class WaveOperator {
 public:
  // Throws GaugeInvalid if the slices of the geometry's gauge are not
  // spacelike, InvalidArgument if a tabulated A misses part of the domain.
  static WaveOperator assemble(const Geometry& geometry, const WaveOperatorSpec& spec,
                               FrequencyFrame frame = FrequencyFrame::Stationary);

  struct Radial {
    cplx d2[3], d1[3], d0[3];
  };
  Radial radial(double r) const;
  /// Multiplicative angular terms; the Laplacian Delta_c sits at sigma^0 on top.
  void angular(double theta, cplx out[3]) const;

  cplx apply(cplx sigma, double r, double theta, const Jet& psi) const;

  /// Coefficient of sigma^2: -rho^2 G_*(dt_*, dt_*), positive on the slice.
  double sigma2_coefficient(double r, double theta) const;

  const Geometry& geometry() const { return geometry_; }
  const WaveOperatorSpec& spec() const { return spec_; }
  FrequencyFrame frame() const { return frame_; }
  /// sigma_lab - sigma = m omega in the stationary frame, 0 in the lab frame.
  double shift() const { return nu_; }

 private:
  WaveOperator(const Geometry& g, WaveOperatorSpec s, FrequencyFrame f)
      : geometry_(g), spec_(std::move(s)), frame_(f) {}
  Geometry geometry_;
  WaveOperatorSpec spec_;
  FrequencyFrame frame_;
  double nu_ = 0;
};

enum class Parity { All, Even, Odd };  // parity of l - |m|
std::string to_string(Parity parity);

struct GridSpec {
  int nr = 32;
  int ntheta = 8;  // angular basis functions after the parity filter
  Parity parity = Parity::All;
  bool ascending = false;  // order of the radial nodes (the spectrum does not care)
  int quadrature = 0;      // Gauss points in theta, 0 for automatic
};

struct PencilContext;

struct OperatorPencil {
  Eigen::MatrixXcd P0, P1, P2;
  GridSpec grid;
  int nr = 0, ntheta = 0;
  double delta = 0, r_min = 0, r_max = 0;
  int m = 0;
  double r0 = 0, omega = 0, shift = 0;
  FrequencyFrame frame = FrequencyFrame::Stationary;
  std::vector<double> r_nodes;  // collocation radii
  std::vector<double> x_nodes;  // same nodes on [-1, 1]
  std::vector<int> l_values;
  std::shared_ptr<const PencilContext> context;

  int dimension() const { return nr * ntheta; }
  /// P2 sigma^2 + P1 sigma + P0; state index i * ntheta + k.
  Eigen::MatrixXcd at(cplx sigma) const;
  Eigen::MatrixXcd derivative_at(cplx sigma) const;
  /// psi(r, theta) from a state vector.
  cplx evaluate(const Eigen::VectorXcd& v, double r, double theta) const;
};

// Throws GridTooCoarse unless nr >= 8 and ntheta >= 4; Degenerate for a
// parity filter on a potential without equatorial symmetry.
OperatorPencil discretize(const WaveOperator& op, const GridSpec& grid);

/// ||P(sigma) v|| / ||v||; throws ZeroVector for v = 0.
double mode_residual(const OperatorPencil& pencil, cplx sigma, const Eigen::VectorXcd& v);

// All finite eigenvalues of the pencil (companion linearization, LAPACK zggev).
std::vector<cplx> pencil_eigenvalues(const OperatorPencil& pencil);

struct Polished {
  cplx sigma;
  Eigen::VectorXcd vector;
  double residual = 0;
  int iterations = 0;
  bool converged = false;
};
// Nonlinear inverse iteration from sigma0.
Polished polish_eigenpair(const OperatorPencil& pencil, cplx sigma0, int max_iterations = 30);

struct SpectralWindow {
  double re_max = 0;  // |Re sigma| <= re_max
  double im_min = 0, im_max = 0;

  /// |Re sigma| <= 2 / mass, -3 kappa_min <= Im sigma <= 3 kappa_min.
  static SpectralWindow defaults(const Geometry& geometry);
  bool contains(cplx sigma) const;
};

struct SolveOptions {
  SpectralWindow window;
  double s = 0.5;  // working regularity for the admissibility line
  double residual_tol = 1e-8;
  double doubling_tol = 1e-6;
  double cluster_tol = 1e-6;
  bool doubling_check = true;
};

struct QNMMode {
  cplx sigma;      // stationary frame at r0
  cplx sigma_lab;  // d_t* frame
  int multiplicity = 1;
  double residual = 0;
  double doubling_delta = 0;
  bool converged = false;
  bool admissible = false;
  int dominant_l = 0;
  std::string note;  // why an unconverged candidate was rejected
  Eigen::VectorXcd vector;
};

struct QNMResult {
  double r0 = 0, omega = 0;
  int m = 0;
  GridSpec grid;
  int dimension = 0;
  SpectralWindow window;
  double beta = 0, s = 0.5;
  double admissibility_bound = 0;  // (1 - 2s) / (2 beta)
  bool window_below_line = false;
  double required_s = 0.5;  // smallest s whose line sits at the window's bottom edge
  int raw_in_window = 0;
  std::vector<QNMMode> modes;        // converged, ordered by decreasing Im sigma
  std::vector<QNMMode> unconverged;
  std::vector<std::string> warnings;

  bool empty() const { return modes.empty(); }
};

// Throws EigensolveFailure if LAPACK fails. An empty converged set is
// reported through QNMResult::empty and a warning.
QNMResult solve_qnm(const OperatorPencil& pencil, const SolveOptions& options);

// Relabels frequencies to the frame at new_r0; eigenfunctions on the slice
// are unchanged because phi_T and phi* agree at t* = 0.
QNMResult shift_frame(const QNMResult& result, const SpacetimeParams& params, double new_r0);

}  // namespace kds
