#pragma once

// Closed-form Kerr-de Sitter geometry: the quartic mu, its roots, the
// Boyer-Lindquist and horizon-penetrating ("starred") charts, the stationary
// Killing field T = d_t + a/(r0^2+a^2) d_phi and the Fredholm threshold beta.
//
// Coordinates are always ordered (t, r, phi, theta); in the starred chart t and
// phi stand for t_* and phi_*.

#include <array>
#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace kds {

enum class Chart { BoyerLindquist, Starred };

std::string to_string(Chart chart);

// Roots of a real quartic c[0] r^4 + c[1] r^3 + c[2] r^2 + c[3] r + c[4],
// from companion-matrix eigenvalues followed by Newton polishing.
std::array<std::complex<double>, 4> quartic_roots(const std::array<double, 5>& c);
double quartic_discriminant(const std::array<double, 5>& c);

class SpacetimeParams {
 public:
  // Throws NotSubextremal unless mu has four distinct real roots.
  static SpacetimeParams make(double lambda, double a, double mass);

  double lambda() const { return lambda_; }
  double a() const { return a_; }
  double mass() const { return mass_; }
  /// b = 1 + lambda a^2 / 3
  double b() const { return b_; }
  double c_theta(double theta) const;
  double c_theta_prime(double theta) const;

  double mu(double r) const;
  double mu_prime(double r) const;
  double mu_second(double r) const;
  /// Coefficients of mu, highest power first.
  std::array<double, 5> mu_coefficients() const;

  const std::array<double, 4>& roots() const { return roots_; }
  double r_neg() const { return roots_[0]; }
  double r_C() const { return roots_[1]; }
  double r_e() const { return roots_[2]; }
  double r_c() const { return roots_[3]; }

  /// The unique r in (r_e, r_c) with mu'(r) = 0.
  double mu_critical_radius() const;

 private:
  SpacetimeParams() = default;
  double lambda_ = 0, a_ = 0, mass_ = 0, b_ = 1;
  std::array<double, 4> roots_{};
};

struct HorizonStructure {
  double r_neg = 0, r_C = 0, r_e = 0, r_c = 0;
  double kappa_e = 0, kappa_c = 0;
  double delta = 0;
  int halvings = 0;

  double r_min() const { return r_e - delta; }
  double r_max() const { return r_c + delta; }
};

// Shrinks delta_request by halving until {r = r_e - delta} and
// {r = r_c + delta} are spacelike (at most 20 halvings).
HorizonStructure horizon_structure(const SpacetimeParams& params, double delta_request);

enum class GaugeKind { Affine, Polynomial };

struct GaugeValidation {
  bool ok = false;
  /// max over the scan of rho^2 G_*(dt_*, dt_*); must be negative
  double worst_dt_norm = 0;
  double worst_r = 0, worst_theta = 0;
  /// min over r of (1 - f^2)/mu; must be positive and finite
  double min_dr_coefficient = 0;
  std::string diagnostic;
};

// f(r) = 2x - 1 + x(1-x) p(x),  x = (r - r_e)/(r_c - r_e).
// The affine gauge is p = 0. Polynomial gauges carry the coefficients of p in
// increasing degree. Either way f(r_e) = -1 and f(r_c) = 1 exactly, and
// (1 - f^2)/mu is evaluated in factored form so it stays finite at both horizons.
class GaugeFunction {
 public:
  static GaugeFunction make(const SpacetimeParams& params, const HorizonStructure& horizons,
                            GaugeKind kind = GaugeKind::Affine,
                            std::vector<double> coefficients = {});

  GaugeKind kind() const { return kind_; }
  const std::vector<double>& coefficients() const { return coeffs_; }

  double f(double r) const;
  double f_prime(double r) const;
  /// (1 - f^2)/mu, real analytic across r_e and r_c
  double dr_coefficient(double r) const;
  double dr_coefficient_prime(double r) const;

  // Boyer-Lindquist only (singular at the horizons).
  double phi_prime(double r) const;
  double psi_prime(double r) const;
  /// Phi(r), Psi(r) by adaptive quadrature from the midpoint of (r_e, r_c).
  double phi(double r) const;
  double psi(double r) const;

  const GaugeValidation& validation() const { return validation_; }
  void require_valid() const;

 private:
  GaugeFunction() = default;
  double poly(double x) const;
  double poly_prime(double x) const;
  void validate();

  GaugeKind kind_ = GaugeKind::Affine;
  std::vector<double> coeffs_;
  double lambda_ = 0, a_ = 0, b_ = 1, mass_ = 0;
  double r_neg_ = 0, r_C_ = 0, r_e_ = 0, r_c_ = 0, r_min_ = 0, r_max_ = 0;
  GaugeValidation validation_;
};

// Everything downstream needs: parameters, horizons and the gauge.
struct Geometry {
  SpacetimeParams params;
  HorizonStructure horizons;
  GaugeFunction gauge;

  static Geometry make(double lambda, double a, double mass, double delta_request,
                       GaugeKind kind = GaugeKind::Affine, std::vector<double> coefficients = {});
};

struct StationaryFrame {
  double r0 = 0;
  double omega = 0;

  // Throws InvalidArgument unless r_e <= r0 <= r_c (relative slack 1e-12).
  static StationaryFrame make(const SpacetimeParams& params, double r0);
};

struct MetricSample {
  Chart chart = Chart::BoyerLindquist;
  std::array<double, 4> x{};
  Eigen::Matrix4d g;
  Eigen::Matrix4d g_inv;
  double sqrt_det = 0;
};

MetricSample metric_at(const Geometry& geometry, Chart chart, const std::array<double, 4>& x);

/// g(T, T) at (r, theta); identical in both charts.
double t_norm(const SpacetimeParams& params, const StationaryFrame& frame, double r, double theta);

enum class Horizon { Event, Cosmological };
std::string to_string(Horizon horizon);
double horizon_radius(const SpacetimeParams& params, Horizon horizon);

// d_r g(T, T) at the chosen horizon. Requires frame.r0 to be that horizon.
double t_norm_radial_derivative(const SpacetimeParams& params, const StationaryFrame& frame,
                                Horizon horizon, double theta);

enum class CausalLabel { Timelike, NullThreshold, Spacelike };
std::string to_string(CausalLabel label);

struct ErgoregionComponent {
  int cells = 0;
  double r_min = 0, r_max = 0;
  bool touches_event = false;
  bool touches_cosmological = false;
};

struct ErgoregionMap {
  int nr = 0, ntheta = 0;
  std::vector<double> r, theta;      // grid axes
  std::vector<double> g_tt;          // row-major, index i * ntheta + j
  std::vector<CausalLabel> label;
  std::vector<ErgoregionComponent> components;
  // maximal open radial band around r0 on which T is timelike for every theta
  double collar_lo = 0, collar_hi = 0, collar_gamma = 0;

  int spacelike_components() const { return static_cast<int>(components.size()); }
};

// Radial nodes cluster at both horizons (Chebyshev-Gauss spacing) so thin
// ergoregions are resolved.
ErgoregionMap ergoregion_map(const SpacetimeParams& params, const StationaryFrame& frame,
                             int nr = 200, int ntheta = 100);

double beta_threshold(const SpacetimeParams& params, const HorizonStructure& horizons);
double beta_from_surface_gravity(const HorizonStructure& horizons);
/// Lower bound (1 - 2s)/(2 beta) of the admissible half-plane Im sigma > bound.
double fredholm_window(double beta, double s);

}  // namespace kds
