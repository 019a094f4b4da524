#pragma once

#include <Eigen/Core>
#include <vector>

#include "gridstate/measurement.hpp"
#include "gridstate/network.hpp"
#include "gridstate/state.hpp"

namespace gridstate {

struct SolverOptions {
  double epsilon = 1e-6;   // stop when max |dx| < epsilon
  int max_iterations = 25;
  /// Keep the slack angle fixed at its starting value (the 2N-1 polar
  /// formulation). Turn off for pure-PMU sets, whose phasors carry an
  /// absolute angle reference that pinning would bias.
  bool pin_slack = true;
  /// Numerical rank threshold, relative to the largest singular value.
  double rank_tolerance = 1e-10;
};

struct EstimationResult {
  PolarState state;
  int iterations = 0;
  bool converged = false;
  double objective = 0.0;             // J at the returned state
  std::vector<double> residuals;      // z_i - h_i(state), row order of the set
  double max_step = 0.0;              // final max |dx|
  std::vector<double> objective_history;  // J after each applied step
};

/// Weighted sum of squared residuals J(x) (per-row mismatch over sigma,
/// squared, summed).
double objective(const Network& net, const PolarState& x, const MeasurementSet& z);

/// Iterative Gauss-Newton WLS estimation in polar coordinates. Each step
/// solves the normal equations G dx = H' R^-1 (z - h(x)) with the gain
/// matrix G = H' R^-1 H factorized by LDLT; rank deficiency raises
/// UnobservableError rather than silently pseudo-inverting. Non-convergence
/// within max_iterations returns converged = false.
EstimationResult wls_estimate(const Network& net, const MeasurementSet& z,
                              const PolarState& x0, const SolverOptions& opts = {});

/// Single-solve linear WLS over the rectangular state for PMU-only sets
/// (E, F, C, D rows). No iteration and no slack pinning; the result is
/// converted back to polar coordinates and reports iterations = 1.
EstimationResult linear_pmu_estimate(const Network& net, const MeasurementSet& z,
                                     const SolverOptions& opts = {});

/// Constant Jacobian row of a rectangular PMU measurement over the
/// [E_0..E_{N-1} | F_0..F_{N-1}] coordinates.
Eigen::RowVectorXd rectangular_jacobian_row(const Network& net, const MeasurementKind& kind);

struct ObservabilityReport {
  int rank = 0;
  int columns = 0;
  bool observable = false;
};

/// Numerical Jacobian rank of a plan evaluated at flat start: rectangular
/// (2N columns) for PMU-only plans, polar with pinned slack (2N-1 columns)
/// otherwise.
ObservabilityReport observability_rank(const Network& net, const MeasurementPlan& plan,
                                       double rank_tolerance = 1e-10);

/// Same check for an explicit list of measurement kinds.
ObservabilityReport observability_rank(const Network& net,
                                       const std::vector<MeasurementKind>& kinds,
                                       bool rectangular, double rank_tolerance = 1e-10);

/// Buses not reachable from any PMU bus through a measured branch current;
/// these are the ones a rank-deficient PMU-only solve cannot determine.
std::vector<int> pmu_unreached_buses(const Network& net, const MeasurementSet& z);

}  // namespace gridstate
