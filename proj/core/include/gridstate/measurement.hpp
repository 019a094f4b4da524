#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "gridstate/network.hpp"
#include "gridstate/state.hpp"

namespace gridstate {

/// Measurement kinds. The conventional set is real/reactive injections and
/// flows plus voltage magnitudes; a PMU adds the bus voltage phasor and the
/// rectangular current components C + jD of every incident branch. In hybrid
/// sets the voltage phasor enters as (|V|, angle); in PMU-only sets it enters
/// as its rectangular components (E, F), which is what makes that estimator
/// linear.
enum class MeasurementType {
  PInjection,
  QInjection,
  PFlow,
  QFlow,
  VMagnitude,
  VAnglePmu,
  IRealPmu,  // C_ij
  IImagPmu,  // D_ij
  VRealPmu,  // E_i
  VImagPmu,  // F_i
};

bool is_bus_type(MeasurementType t);
bool is_pmu_type(MeasurementType t);
/// True when the kind is a linear function of the rectangular state.
bool is_rectangular_type(MeasurementType t);
std::string type_name(MeasurementType t);
MeasurementType type_from_name(const std::string& name);

/// A located measurement kind. Bus kinds set `bus`; branch kinds set
/// `branch` and `side` (the terminal the meter sits at). Indices are
/// internal; external ids appear only in serialized form.
struct MeasurementKind {
  MeasurementType type = MeasurementType::VMagnitude;
  int bus = -1;
  int branch = -1;
  BranchSide side = BranchSide::From;

  static MeasurementKind at_bus(MeasurementType t, int bus_index);
  static MeasurementKind at_branch(MeasurementType t, int branch_index, BranchSide side);

  bool operator==(const MeasurementKind& o) const {
    return type == o.type && bus == o.bus && branch == o.branch && side == o.side;
  }
};

struct Measurement {
  MeasurementKind kind;
  double value = 0.0;  // per unit; radians for angles
  double sigma = 1.0;  // > 0, weighting standard deviation
};

struct MeasurementSet {
  std::vector<Measurement> rows;  // order is the row order of z, H and R
  std::string provenance;

  int size() const { return static_cast<int>(rows.size()); }
  bool empty() const { return rows.empty(); }
};

/// Which measurements exist. The conventional flags expand to full coverage
/// (that is the default redundancy: P/Q injection at every bus, P/Q flow at
/// both ends of every branch, |V| at every bus). `pmu_buses` lists PMU hosts
/// in placement order; the expansion appends PMU blocks in exactly that
/// order so that nested placements extend, rather than reorder, the row
/// list. With `pmu_rectangular` set the PMU voltage phasor expands to (E, F)
/// rows instead of (angle, |V|) and currents stay C/D, i.e. the PMU-only
/// linear form.
struct MeasurementPlan {
  bool conv_injections = true;
  bool conv_flows = true;
  bool conv_vmag = true;
  std::vector<int> pmu_buses;  // internal indices, placement order
  bool pmu_rectangular = false;

  static MeasurementPlan full_conventional();
  static MeasurementPlan hybrid(std::vector<int> pmu_buses);
  static MeasurementPlan pmu_only(std::vector<int> pmu_buses);

  bool has_conventional() const { return conv_injections || conv_flows || conv_vmag; }
  bool empty() const { return !has_conventional() && pmu_buses.empty(); }
};

/// Noise standard deviations per measurement class, per unit (radians for
/// the PMU angle). A zero entry means "no noise" for simulation; the stored
/// weighting sigma is floored at kSigmaFloor so R stays invertible.
struct NoiseSpec {
  double conv_power = 0.01;
  double conv_vmag = 0.004;
  double pmu = 0.0002;        // |V|, E, F, C, D from PMUs
  double pmu_angle = 0.0002;  // radians

  static constexpr double kSigmaFloor = 1e-6;
};

/// A plan row: the kind plus the noise class it draws from.
struct PlannedMeasurement {
  MeasurementKind kind;
  double noise_sigma = 0.0;
};

/// Expand a plan against a network into the canonical row order:
/// P_inj | Q_inj | P_flow | Q_flow | |V| | per-PMU blocks.
std::vector<PlannedMeasurement> expand_plan(const Network& net, const MeasurementPlan& plan,
                                            const NoiseSpec& noise);

/// Model value h(x) of one measurement kind at a polar state.
double evaluate_h(const Network& net, const PolarState& x, const MeasurementKind& kind);

/// Analytic gradient of h with respect to the free state coordinates, laid
/// out by `idx`. Entries for the pinned slack angle are dropped.
Eigen::RowVectorXd jacobian_row(const Network& net, const PolarState& x,
                                const MeasurementKind& kind, const StateIndexer& idx);

/// Convenience overload over the default pinned 2N-1 layout.
Eigen::RowVectorXd jacobian_row(const Network& net, const PolarState& x,
                                const MeasurementKind& kind);

/// Draw one noisy measurement set from the true state. Values are
/// h(x_true) + sigma * N(0,1) with each normal variate addressed by
/// (seed, row index), so a row's draw never depends on what other rows
/// exist before it in other plans with a common prefix.
MeasurementSet simulate_measurements(const Network& net, const PolarState& x_true,
                                     const MeasurementPlan& plan, const NoiseSpec& noise,
                                     std::uint64_t seed);

/// Replace each PMU (|V|, angle) pair by the equivalent (E, F) pair; C/D
/// rows pass through. Requires every PMU bus to carry both polar rows.
MeasurementSet rectangularize_pmu_voltages(const Network& net, const MeasurementSet& set);

/// All rows linear in the rectangular state (E, F, C, D rows only).
bool is_pmu_rectangular(const MeasurementSet& set);

}  // namespace gridstate
