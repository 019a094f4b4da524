#include "gridstate/network.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <deque>

namespace gridstate {

PiParams fold_tap(const Branch& br) {
  const std::complex<double> y(br.series_g, br.series_b);
  const std::complex<double> ysf(br.shunt_g_from, br.shunt_b_from);
  const std::complex<double> yst(br.shunt_g_to, br.shunt_b_to);
  const double a = br.tap_ratio;

  // Two-port of an off-nominal-tap branch:
  //   Yff = (y + ysf) / a^2,  Yft = Ytf = -y / a,  Ytt = y + yst.
  // The equivalent pi has series -Yft and end shunts Yff + Yft, Ytt + Ytf.
  const std::complex<double> series = y / a;
  const std::complex<double> sh_from = (y + ysf) / (a * a) - series;
  const std::complex<double> sh_to = (y + yst) - series;

  PiParams p;
  p.g = series.real();
  p.b = series.imag();
  p.gs_from = sh_from.real();
  p.bs_from = sh_from.imag();
  p.gs_to = sh_to.real();
  p.bs_to = sh_to.imag();
  return p;
}

Network::Network(std::vector<Bus> buses, std::vector<Branch> branches, double mva_base)
    : buses_(std::move(buses)), branches_(std::move(branches)), mva_base_(mva_base) {
  if (buses_.empty()) throw DataError("network has no buses");
  if (!(mva_base_ > 0.0)) throw DataError("MVA base must be > 0");

  int slack_count = 0;
  for (int i = 0; i < n_buses(); ++i) {
    const Bus& b = buses_[i];
    if (b.id <= 0) throw DataError("bus id must be positive");
    if (!index_of_.emplace(b.id, i).second)
      throw DataError("duplicate bus id " + std::to_string(b.id));
    if (!(b.ref_v_mag > 0.0))
      throw DataError("bus " + std::to_string(b.id) + ": reference voltage must be > 0");
    if (b.kind == BusKind::Slack) {
      slack_ = i;
      ++slack_count;
    }
  }
  if (slack_count != 1)
    throw DataError("expected exactly one slack bus, found " + std::to_string(slack_count));

  pi_.reserve(branches_.size());
  from_idx_.reserve(branches_.size());
  to_idx_.reserve(branches_.size());
  incident_.resize(buses_.size());
  neighbors_.resize(buses_.size());
  for (int k = 0; k < n_branches(); ++k) {
    const Branch& br = branches_[k];
    if (br.from_bus == br.to_bus)
      throw DataError("branch " + std::to_string(k) + ": from == to (" +
                      std::to_string(br.from_bus) + ")");
    if (!(br.tap_ratio > 0.0))
      throw DataError("branch " + std::to_string(br.from_bus) + "-" +
                      std::to_string(br.to_bus) + ": tap ratio must be > 0");
    if (std::hypot(br.series_g, br.series_b) <= 0.0)
      throw DataError("branch " + std::to_string(br.from_bus) + "-" +
                      std::to_string(br.to_bus) + ": zero series admittance");
    const int f = bus_index(br.from_bus);
    const int t = bus_index(br.to_bus);
    from_idx_.push_back(f);
    to_idx_.push_back(t);
    pi_.push_back(fold_tap(br));
    incident_[f].emplace_back(k, BranchSide::From);
    incident_[t].emplace_back(k, BranchSide::To);
    neighbors_[f].push_back(t);
    neighbors_[t].push_back(f);
  }
  for (auto& nb : neighbors_) {
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
  }

  // Single-island check.
  std::vector<char> seen(buses_.size(), 0);
  std::deque<int> queue{0};
  seen[0] = 1;
  int reached = 1;
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    for (int v : neighbors_[u]) {
      if (!seen[v]) {
        seen[v] = 1;
        ++reached;
        queue.push_back(v);
      }
    }
  }
  if (reached != n_buses()) throw DataError("network is not a single connected island");
}

int Network::bus_index(int external_id) const {
  auto it = index_of_.find(external_id);
  if (it == index_of_.end())
    throw DataError("unknown bus id " + std::to_string(external_id));
  return it->second;
}

BranchSideView Network::side_view(int branch, BranchSide side) const {
  const PiParams& p = pi_[branch];
  BranchSideView v;
  v.g = p.g;
  v.b = p.b;
  if (side == BranchSide::From) {
    v.local = from_idx_[branch];
    v.remote = to_idx_[branch];
    v.gs = p.gs_from;
    v.bs = p.bs_from;
  } else {
    v.local = to_idx_[branch];
    v.remote = from_idx_[branch];
    v.gs = p.gs_to;
    v.bs = p.bs_to;
  }
  return v;
}

PolarState Network::reference_state() const {
  std::vector<double> mag(buses_.size()), ang(buses_.size());
  for (std::size_t i = 0; i < buses_.size(); ++i) {
    mag[i] = buses_[i].ref_v_mag;
    ang[i] = buses_[i].ref_v_ang;
  }
  return PolarState(std::move(mag), std::move(ang), slack_);
}

}  // namespace gridstate
