#pragma once

// Bicharacteristics of the conformally rescaled dual metric
//   q(xi) = (r^2 + a^2 cos^2 theta) G(xi, xi)
// in either chart, with closed-form Hamilton equations.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kds/geometry.hpp"

namespace kds {

struct PhasePoint {
  Chart chart = Chart::BoyerLindquist;
  std::array<double, 4> x{};   // (t, r, phi, theta)
  std::array<double, 4> xi{};  // (xi_t, xi_r, xi_phi, xi_theta)

  double r() const { return x[1]; }
  double theta() const { return x[3]; }
};

/// max_i xi_i^2
double momentum_scale(const PhasePoint& point);

using PhaseVelocity = std::array<double, 8>;  // (dx/ds, dxi/ds)

double hamiltonian_q(const Geometry& geometry, const PhasePoint& point);
PhaseVelocity hamilton_equations(const Geometry& geometry, const PhasePoint& point);

struct ConservedSet {
  double q = 0;
  double xi_t = 0;
  double xi_phi = 0;
  double carter = 0;  // c xi_theta^2 + b^2/(c sin^2) (a sin^2 xi_t + xi_phi)^2
};

ConservedSet conserved(const Geometry& geometry, const PhasePoint& point);

// Coordinate change between the charts on (r_e, r_c).
PhasePoint to_starred(const Geometry& geometry, const PhasePoint& bl);
PhasePoint to_boyer_lindquist(const Geometry& geometry, const PhasePoint& starred);

enum class NullComponent { XiR, XiTheta };

struct NullProjection {
  PhasePoint point;
  NullComponent resolved = NullComponent::XiR;
  int branch = +1;
};

// Replaces xi_r (or xi_theta) by the root of q = 0 on the requested branch.
// Throws EmptyCharacteristic when no real root exists.
NullProjection project_to_null(const Geometry& geometry, const PhasePoint& point,
                               NullComponent component = NullComponent::XiR, int branch = +1);

enum class TerminalStatus { ExitedLow, ExitedHigh, MaxParameter, PoleGuard };
std::string to_string(TerminalStatus status);

struct FlowConfig {
  double atol = 1e-10;
  double rtol = 1e-10;
  // Affine-parameter cap; samples are normalized to unit momentum scale and
  // censuses multiply this by the mass.
  double affine_cap = 1e5;
  // Boyer-Lindquist band [r_e + epsilon, r_c - epsilon].
  double epsilon = 1e-3;
  double pole_guard = 1e-3;
  // Relative to max(initial, current) momentum scale.
  double drift_tol = 1e-8;
  double h_init = 1e-4;
  double h_min = 1e-16;
  int direction = +1;
  // Hand trajectories to the starred chart at the band edge and follow them
  // to r_e - delta or r_c + delta.
  bool follow_horizons = false;
  // Keep every n-th accepted step (endpoints always kept); 0 keeps endpoints only.
  int record_stride = 1;
};

struct TrajectorySample {
  double s = 0;
  PhasePoint point;
  double q = 0;
  double carter = 0;
};

struct StepDiagnostics {
  long accepted = 0;
  long rejected = 0;
  long drift_rejections = 0;
  int handoffs = 0;
  double max_drift = 0;  // relative to max(initial, current) momentum scale
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  StepDiagnostics diagnostics;
  TerminalStatus status = TerminalStatus::MaxParameter;
  double r_min = 0, r_max = 0;
  double s_final = 0;

  const TrajectorySample& back() const { return samples.back(); }
};

// Adaptive Dormand-Prince integration with PI step control; steps that move
// q or the Carter constant by more than drift_tol are rejected. Throws
// StepFailure if the step size underflows.
Trajectory integrate(const Geometry& geometry, const PhasePoint& start, const FlowConfig& config);

struct SampleBatch {
  std::vector<PhasePoint> points;
  std::uint64_t attempts = 0;
  std::uint64_t rejected = 0;
};

// Null covector at a base point with xi_t + omega xi_phi = 0 imposed exactly
// and xi_r solved from q = 0; normalized to unit momentum scale. Throws
// EmptyCharacteristic where T is timelike.
PhasePoint orthogonal_null_at(const Geometry& geometry, const StationaryFrame& frame, double r,
                              double theta, double phi, double xi_phi, double xi_theta, int branch);
/// Same, returning nullopt instead of throwing.
std::optional<PhasePoint> try_orthogonal_null_at(const Geometry& geometry, const StationaryFrame& frame,
                                                 double r, double theta, double phi, double xi_phi,
                                                 double xi_theta, int branch);

// Reproducible T-orthogonal null samples: base uniform in (r, cos theta, phi)
// over the band, momentum uniform on S^3 before projection. Both xi_r
// branches are emitted for every accepted base point.
SampleBatch sample_orthogonal_null(const Geometry& geometry, const StationaryFrame& frame,
                                   std::uint64_t seed, int count, double epsilon,
                                   std::uint64_t max_attempts = 0);

}  // namespace kds
