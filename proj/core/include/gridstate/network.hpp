#pragma once

#include <complex>
#include <string>
#include <unordered_map>
#include <vector>

#include "gridstate/errors.hpp"
#include "gridstate/state.hpp"

namespace gridstate {

enum class BusKind { Slack, PV, PQ };

struct Bus {
  int id = 0;             // external bus number (positive)
  double base_kv = 1.0;   // > 0; cosmetic for per-unit computation
  BusKind kind = BusKind::PQ;
  double ref_v_mag = 1.0; // solved per-unit voltage from the case file
  double ref_v_ang = 0.0; // radians
  std::string name;
};

/// One pi-model branch. Series admittance is stored directly (g + jb); the
/// shunt fields hold the untapped end shunts (half the line charging for a
/// plain transmission line). An off-nominal turns ratio is kept separately
/// and folded in by Network::branch_admittances.
struct Branch {
  int from_bus = 0;       // external ids
  int to_bus = 0;
  double series_g = 0.0;
  double series_b = 0.0;
  double shunt_g_from = 0.0;
  double shunt_b_from = 0.0;
  double shunt_g_to = 0.0;
  double shunt_b_to = 0.0;
  double tap_ratio = 1.0; // from-side turns ratio, 1.0 when absent
};

/// Effective pi-model parameters of a branch with the tap ratio already
/// folded in. `I_from = (Y_s_from + Y) V_from - Y V_to` and symmetrically
/// from the to side, where Y = g + jb and Y_s_side = gs_side + j bs_side.
struct PiParams {
  double g = 0.0;   // effective series conductance
  double b = 0.0;   // effective series susceptance
  double gs_from = 0.0;
  double bs_from = 0.0;
  double gs_to = 0.0;
  double bs_to = 0.0;
};

enum class BranchSide { From, To };

/// A branch as seen from one of its terminals: `local` is the measuring bus,
/// `remote` the far bus, and (gs, bs) the shunt on the local side. All
/// current/flow expressions are written once against this view.
struct BranchSideView {
  int local = 0;    // internal bus index
  int remote = 0;   // internal bus index
  double g = 0.0;
  double b = 0.0;
  double gs = 0.0;
  double bs = 0.0;
};

/// Immutable bus/branch model of one test system. Construction validates the
/// invariants (unique ids, one slack, known endpoints, nonzero series
/// impedance, single island) and precomputes folded pi parameters and the
/// bus adjacency, after which instances are safe to share across threads.
class Network {
 public:
  Network(std::vector<Bus> buses, std::vector<Branch> branches, double mva_base);

  int n_buses() const { return static_cast<int>(buses_.size()); }
  int n_branches() const { return static_cast<int>(branches_.size()); }
  double mva_base() const { return mva_base_; }

  const std::vector<Bus>& buses() const { return buses_; }
  const std::vector<Branch>& branches() const { return branches_; }
  const Bus& bus(int index) const { return buses_[index]; }
  const Branch& branch(int index) const { return branches_[index]; }

  int slack_index() const { return slack_; }

  /// Internal index of an external bus id; throws DataError when unknown.
  int bus_index(int external_id) const;
  bool has_bus(int external_id) const { return index_of_.count(external_id) != 0; }

  /// Folded pi-model parameters of branch `index`.
  const PiParams& branch_admittances(int index) const { return pi_[index]; }

  /// Branch endpoints as internal indices.
  int from_index(int branch) const { return from_idx_[branch]; }
  int to_index(int branch) const { return to_idx_[branch]; }

  BranchSideView side_view(int branch, BranchSide side) const;

  /// Branches incident to a bus, as (branch index, side at that bus).
  const std::vector<std::pair<int, BranchSide>>& incident(int bus) const {
    return incident_[bus];
  }

  /// Neighbor bus indices (unique, ascending).
  const std::vector<int>& neighbors(int bus) const { return neighbors_[bus]; }

  /// The solved voltages carried by the case file, as a PolarState.
  PolarState reference_state() const;

 private:
  std::vector<Bus> buses_;
  std::vector<Branch> branches_;
  double mva_base_ = 100.0;
  int slack_ = 0;
  std::unordered_map<int, int> index_of_;
  std::vector<PiParams> pi_;
  std::vector<int> from_idx_, to_idx_;
  std::vector<std::vector<std::pair<int, BranchSide>>> incident_;
  std::vector<std::vector<int>> neighbors_;
};

/// Fold an off-nominal from-side turns ratio into effective pi parameters.
/// Exposed separately so the admittance math is testable without a Network.
PiParams fold_tap(const Branch& br);

}  // namespace gridstate
