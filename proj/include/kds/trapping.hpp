#pragma once

// Certification of the trapping statements for a stationary frame T:
// the radial function F, convexity of r along turning bicharacteristics,
// the escape function, orthogonal/contrast censuses, the Sigma_+/- split and
// the radial-point structure at the conormal bundles of the horizons.

#include <cstdint>
#include <string>
#include <vector>

#include "kds/geometry.hpp"
#include "kds/hamiltonian.hpp"

namespace kds {

struct OrthogonalityDatum {
  StationaryFrame frame;
  double xi_t = 0;
  double xi_phi = 0;

  /// xi_t = -omega xi_phi exactly.
  static OrthogonalityDatum make(const StationaryFrame& frame, double xi_phi);
};

// F(r) = ((r^2 + a^2) xi_t + a xi_phi)^2 / mu(r) on (r_e, r_c); throws
// ChartDomain outside.
double f_function(const SpacetimeParams& params, double xi_t, double xi_phi, double r);
double f_function_prime(const SpacetimeParams& params, double xi_t, double xi_phi, double r);
double f_function_second(const SpacetimeParams& params, double xi_t, double xi_phi, double r);
inline double f_function(const SpacetimeParams& params, const OrthogonalityDatum& d, double r) {
  return f_function(params, d.xi_t, d.xi_phi, r);
}

struct CriticalScan {
  std::vector<double> radii;  // increasing
  int grid = 0;
};

// Sign changes of F' on a uniform interior grid (>= 1000 cells), each polished
// by bracketed Newton iteration.
CriticalScan f_critical_scan(const SpacetimeParams& params, double xi_t, double xi_phi,
                             int grid = 1000);

// ---------------------------------------------------------------------------
// Convexity along turning bicharacteristics.

// Orthogonal null covectors with xi_r = 0 (turning points of r), base uniform
// in (r, cos theta) over the band, unit momentum scale. Empty when T is
// timelike on the whole band (for example a = 0).
std::vector<PhasePoint> sample_turning_points(const Geometry& geometry, const StationaryFrame& frame,
                                              std::uint64_t seed, int count, double epsilon,
                                              std::uint64_t max_attempts = 0);

/// H_q^2 r = 2 mu b^2 F'(r) at a turning point. sign_of_mu = -1 is a fault-injection hook.
double radial_acceleration(const Geometry& geometry, const PhasePoint& point, double sign_of_mu = 1.0);
/// Same quantity from a five-point stencil on r(s) along the integrated flow.
double radial_acceleration_fd(const Geometry& geometry, const PhasePoint& point, double step);

struct ConvexityOptions {
  double fd_step = 2e-2;
  double tolerance = 1e-6;
  double orthogonality_tolerance = 1e-12;
  bool corrupt_mu_sign = false;
};

struct ConvexityReport {
  int samples = 0;
  int sign_violations = 0;
  double max_mismatch = 0;  // |closed - fd| / |closed|
  double worst_r = 0;
  bool fault_injected = false;
  bool pass = false;
};

// Throws SampleInvalid if a sample has xi_r != 0, breaks orthogonality, or
// sits at r = r0.
ConvexityReport convexity_check(const Geometry& geometry, const StationaryFrame& frame,
                                const std::vector<PhasePoint>& samples,
                                const ConvexityOptions& options = {});

// ---------------------------------------------------------------------------
// Escape function E = exp(C (r - r0)^2) H_q r.

struct EscapeGrid {
  int nr = 64, ntheta = 16, npsi = 16;
  int refine = 10;  // per-axis refinement of the re-check grid
};

struct EscapeFunction {
  double C = 0;
  double r0 = 0;
  double epsilon = 0;
  int doublings = 0;
  long points = 0;          // characteristic points on the search grid
  long recheck_points = 0;  // on the refined grid
  long recheck_violations = 0;
  bool vacuous = false;     // characteristic set empty on the band

  bool certified() const { return recheck_violations == 0; }
};

double escape_value(const Geometry& geometry, const StationaryFrame& frame, double C,
                    const PhasePoint& point);
/// H_q E = exp(C (r - r0)^2) (2 C (r - r0) (H_q r)^2 + H_q^2 r)
double escape_derivative(const Geometry& geometry, const StationaryFrame& frame, double C,
                         const PhasePoint& point);

// Smallest C = 2^k, k = -10..40, with sign(H_q E) = sign(r - r0) on the
// orthogonal characteristic set over [r_e + eps, r_c - eps]; the result is
// re-checked on the refined grid. Throws SearchExhausted past 2^40.
EscapeFunction escape_constant_search(const Geometry& geometry, const StationaryFrame& frame,
                                      const EscapeGrid& grid, double epsilon);

// ---------------------------------------------------------------------------
// Censuses.

// Trapped orbits run to the cap, and Dormand-Prince lets the Carter constant
// drift linearly in s; 1e-13 keeps that drift below 1e-8 over s = 1e5.
// Tight tolerances keep escaping census orbits honest. At a = 0 the trapped
// contrast orbits sit on an unstable circle and need about 1e-14 to stay put.
inline FlowConfig census_flow_defaults() {
  FlowConfig f;
  f.atol = 1e-13;
  f.rtol = 1e-13;
  return f;
}

struct CensusOptions {
  int count = 1000;
  double epsilon = 1e-3;
  std::uint64_t seed = 1;
  FlowConfig flow = census_flow_defaults();  // flow.affine_cap is multiplied by the mass
  std::uint64_t max_attempts = 0;
  int threads = 0;
};

struct CensusEntry {
  PhasePoint start;
  TerminalStatus status = TerminalStatus::MaxParameter;
  double s_final = 0, r_min = 0, r_max = 0, max_drift = 0;
  bool trapped = false;
  bool failed = false;
  std::string error;
};

struct Census {
  std::string kind;  // "orthogonal" or "contrast"
  int requested = 0;
  long escaped_low = 0, escaped_high = 0, trapped = 0, pole_guard = 0, failures = 0;
  double max_drift = 0;
  double max_exit_parameter = 0;  // largest s_final among escaped entries
  double affine_cap = 0;
  double epsilon = 0;
  std::uint64_t attempts = 0, rejected = 0;
  std::vector<CensusEntry> entries;

  int sampled() const { return static_cast<int>(entries.size()); }
  bool vacuous() const { return entries.empty(); }
};

// Integrates sample_orthogonal_null outputs. Trapped means the cap was reached
// with r inside the band the whole time.
Census trapping_scan(const Geometry& geometry, const StationaryFrame& frame,
                     const CensusOptions& options);

// Non-orthogonal seeds on F's critical radius: random impact parameter with
// no zero of (r^2+a^2) xi_t + a xi_phi on [r_e, r_c], xi_r = 0, xi_theta from
// q = 0 at a random theta. With polish, r and xi_t are moved by at most a few
// hundred ulps to where the computed radial force vanishes, so the seed is a
// fixed point of the discrete radial flow; without it the hyperbolic
// instability amplifies rounding and the orbit leaves after an affine time
// of order ten.
Census contrast_scan(const Geometry& geometry, const CensusOptions& options, bool polish = true);

// ---------------------------------------------------------------------------
// Sigma_+/- split and radial points.

enum class SigmaClass { Plus, Minus };
std::string to_string(SigmaClass value);

/// G_*(dt_*, xi) at a point of either chart (converted to the starred chart).
double dt_star_pairing(const Geometry& geometry, const PhasePoint& point);
// Throws Degenerate if |G_*(dt_*, xi)| < 1e-12 max|xi_i|, SampleInvalid
// if the point is not null.
SigmaClass sigma_split(const Geometry& geometry, const PhasePoint& point);

struct SigmaInvarianceReport {
  int trajectories = 0;
  long samples = 0;  // recorded flow points that were classified
  int plus = 0, minus = 0;  // starting classes
  int flips = 0;            // trajectories whose class changed
  int degenerate = 0;       // points with G_*(dt_*, xi) at roundoff level
  bool pass = false;
};

// Generic null covectors in the band (random xi_t, xi_phi, xi_theta, xi_r
// from q = 0), integrated for an affine length `length` or until they leave
// the band; the class is re-evaluated (in the starred chart) at every
// accepted step.
SigmaInvarianceReport sigma_invariance(const Geometry& geometry, std::uint64_t seed, int count = 100,
                                       double length = 20.0, int threads = 0);

struct RadialPointReport {
  Horizon horizon = Horizon::Event;
  double r = 0;
  double frame_r0 = 0;
  bool exact_frame = false;      // r0 equals the horizon radius
  double xi_r = 1;
  double symbol_residual = 0;    // max |p_sigma| over the theta scan
  double transverse_max = 0;     // max |H component| other than d/d xi_r
  double xi_r_coefficient = 0;   // reported with the p = -G sign convention
  double expected_coefficient = 0;
  double coefficient_mismatch = 0;  // max relative mismatch over the scan
  double phi_component = 0;      // d/d phi_T component, nonzero off the exact frame
  int samples = 0;
  bool pass = false;
};

// Principal symbol of P_sigma and its Hamilton field at xi = xi_r dr over
// r = horizon, in T-adapted slice coordinates (r, phi_T, theta). With
// require_exact the frame must sit on the horizon (FrameMismatch otherwise)
// and the exact-radial tolerances are asserted.
RadialPointReport radial_point_check(const Geometry& geometry, const StationaryFrame& frame,
                                     Horizon horizon, bool require_exact, int ntheta = 64,
                                     double xi_r = 1.0);

struct RadialProbe {
  int branch = 1;  // sign of xi_r
  double theta = 0;
  double d_start = 0, d_end = 0;
  bool approaches = false;
};

struct SourceSinkReport {
  Horizon horizon = Horizon::Event;
  int expected_source_branch = 1;  // sign of mu' at the horizon
  std::vector<RadialProbe> probes;
  bool consistent = false;
};

// Short starred-chart integrations seeded `offset` outside the domain of
// outer communication near N*{r = horizon}; the distance to the conormal
// bundle must grow on the source branch and shrink on the sink branch.
SourceSinkReport radial_source_sink(const Geometry& geometry, const StationaryFrame& frame,
                                    Horizon horizon, std::uint64_t seed, int count = 16,
                                    double offset = 1e-4);

}  // namespace kds
