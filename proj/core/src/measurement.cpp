#include "gridstate/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>

#include "gridstate/errors.hpp"
#include "gridstate/random.hpp"

namespace gridstate {

bool is_bus_type(MeasurementType t) {
  switch (t) {
    case MeasurementType::PInjection:
    case MeasurementType::QInjection:
    case MeasurementType::VMagnitude:
    case MeasurementType::VAnglePmu:
    case MeasurementType::VRealPmu:
    case MeasurementType::VImagPmu:
      return true;
    default:
      return false;
  }
}

bool is_pmu_type(MeasurementType t) {
  switch (t) {
    case MeasurementType::VAnglePmu:
    case MeasurementType::IRealPmu:
    case MeasurementType::IImagPmu:
    case MeasurementType::VRealPmu:
    case MeasurementType::VImagPmu:
      return true;
    default:
      return false;
  }
}

bool is_rectangular_type(MeasurementType t) {
  switch (t) {
    case MeasurementType::IRealPmu:
    case MeasurementType::IImagPmu:
    case MeasurementType::VRealPmu:
    case MeasurementType::VImagPmu:
      return true;
    default:
      return false;
  }
}

std::string type_name(MeasurementType t) {
  switch (t) {
    case MeasurementType::PInjection: return "p_injection";
    case MeasurementType::QInjection: return "q_injection";
    case MeasurementType::PFlow: return "p_flow";
    case MeasurementType::QFlow: return "q_flow";
    case MeasurementType::VMagnitude: return "v_magnitude";
    case MeasurementType::VAnglePmu: return "v_angle_pmu";
    case MeasurementType::IRealPmu: return "i_real_pmu";
    case MeasurementType::IImagPmu: return "i_imag_pmu";
    case MeasurementType::VRealPmu: return "v_real_pmu";
    case MeasurementType::VImagPmu: return "v_imag_pmu";
  }
  return "?";
}

MeasurementType type_from_name(const std::string& name) {
  static const std::map<std::string, MeasurementType> table = {
      {"p_injection", MeasurementType::PInjection},
      {"q_injection", MeasurementType::QInjection},
      {"p_flow", MeasurementType::PFlow},
      {"q_flow", MeasurementType::QFlow},
      {"v_magnitude", MeasurementType::VMagnitude},
      {"v_angle_pmu", MeasurementType::VAnglePmu},
      {"i_real_pmu", MeasurementType::IRealPmu},
      {"i_imag_pmu", MeasurementType::IImagPmu},
      {"v_real_pmu", MeasurementType::VRealPmu},
      {"v_imag_pmu", MeasurementType::VImagPmu},
  };
  auto it = table.find(name);
  if (it == table.end()) throw DataError("unknown measurement kind: " + name);
  return it->second;
}

MeasurementKind MeasurementKind::at_bus(MeasurementType t, int bus_index) {
  if (!is_bus_type(t)) throw DataError("measurement kind is not bus-located: " + type_name(t));
  MeasurementKind k;
  k.type = t;
  k.bus = bus_index;
  return k;
}

MeasurementKind MeasurementKind::at_branch(MeasurementType t, int branch_index,
                                           BranchSide side) {
  if (is_bus_type(t)) throw DataError("measurement kind is not branch-located: " + type_name(t));
  MeasurementKind k;
  k.type = t;
  k.branch = branch_index;
  k.side = side;
  return k;
}

MeasurementPlan MeasurementPlan::full_conventional() { return MeasurementPlan{}; }

MeasurementPlan MeasurementPlan::hybrid(std::vector<int> pmu_buses) {
  MeasurementPlan p;
  p.pmu_buses = std::move(pmu_buses);
  return p;
}

MeasurementPlan MeasurementPlan::pmu_only(std::vector<int> pmu_buses) {
  MeasurementPlan p;
  p.conv_injections = p.conv_flows = p.conv_vmag = false;
  p.pmu_buses = std::move(pmu_buses);
  p.pmu_rectangular = true;
  return p;
}

std::vector<PlannedMeasurement> expand_plan(const Network& net, const MeasurementPlan& plan,
                                            const NoiseSpec& noise) {
  if (plan.empty()) throw ConfigError("measurement plan is empty");
  for (int b : plan.pmu_buses)
    if (b < 0 || b >= net.n_buses()) throw ConfigError("PMU bus index out of range");

  std::vector<PlannedMeasurement> rows;
  const int nb = net.n_buses();
  const int nl = net.n_branches();

  if (plan.conv_injections) {
    for (int i = 0; i < nb; ++i)
      rows.push_back({MeasurementKind::at_bus(MeasurementType::PInjection, i), noise.conv_power});
    for (int i = 0; i < nb; ++i)
      rows.push_back({MeasurementKind::at_bus(MeasurementType::QInjection, i), noise.conv_power});
  }
  if (plan.conv_flows) {
    for (int k = 0; k < nl; ++k)
      for (BranchSide s : {BranchSide::From, BranchSide::To})
        rows.push_back({MeasurementKind::at_branch(MeasurementType::PFlow, k, s), noise.conv_power});
    for (int k = 0; k < nl; ++k)
      for (BranchSide s : {BranchSide::From, BranchSide::To})
        rows.push_back({MeasurementKind::at_branch(MeasurementType::QFlow, k, s), noise.conv_power});
  }
  if (plan.conv_vmag) {
    for (int i = 0; i < nb; ++i)
      rows.push_back({MeasurementKind::at_bus(MeasurementType::VMagnitude, i), noise.conv_vmag});
  }

  for (int b : plan.pmu_buses) {
    if (plan.pmu_rectangular) {
      rows.push_back({MeasurementKind::at_bus(MeasurementType::VRealPmu, b), noise.pmu});
      rows.push_back({MeasurementKind::at_bus(MeasurementType::VImagPmu, b), noise.pmu});
    } else {
      rows.push_back({MeasurementKind::at_bus(MeasurementType::VAnglePmu, b), noise.pmu_angle});
      rows.push_back({MeasurementKind::at_bus(MeasurementType::VMagnitude, b), noise.pmu});
    }
    for (const auto& [branch, side] : net.incident(b)) {
      rows.push_back({MeasurementKind::at_branch(MeasurementType::IRealPmu, branch, side), noise.pmu});
      rows.push_back({MeasurementKind::at_branch(MeasurementType::IImagPmu, branch, side), noise.pmu});
    }
  }
  return rows;
}

namespace {

void check_kind(const Network& net, const MeasurementKind& kind) {
  if (is_bus_type(kind.type)) {
    if (kind.bus < 0 || kind.bus >= net.n_buses())
      throw DataError("measurement references unknown bus index " + std::to_string(kind.bus));
  } else {
    if (kind.branch < 0 || kind.branch >= net.n_branches())
      throw DataError("measurement references unknown branch index " +
                      std::to_string(kind.branch));
  }
}

struct FlowTerms {
  double p, q;
  double dp_di, dp_dj, dp_dvi, dp_dvj;
  double dq_di, dq_dj, dq_dvi, dq_dvj;
};

/// Power flow leaving the local terminal of `v`, plus partials.
FlowTerms flow_terms(const BranchSideView& v, const PolarState& x) {
  const double vi = x.v_mag[v.local], vj = x.v_mag[v.remote];
  const double dij = x.v_ang[v.local] - x.v_ang[v.remote];
  const double c = std::cos(dij), s = std::sin(dij);
  const double gc_bs = v.g * c + v.b * s;
  const double gs_bc = v.g * s - v.b * c;

  FlowTerms t;
  t.p = vi * vi * (v.gs + v.g) - vi * vj * gc_bs;
  t.q = -vi * vi * (v.bs + v.b) - vi * vj * gs_bc;
  t.dp_di = vi * vj * gs_bc;
  t.dp_dj = -t.dp_di;
  t.dp_dvi = 2.0 * vi * (v.gs + v.g) - vj * gc_bs;
  t.dp_dvj = -vi * gc_bs;
  t.dq_di = -vi * vj * gc_bs;
  t.dq_dj = -t.dq_di;
  t.dq_dvi = -2.0 * vi * (v.bs + v.b) - vj * gs_bc;
  t.dq_dvj = -vi * gs_bc;
  return t;
}

struct CurrentTerms {
  double c, d;
  double dc_di, dc_dj, dc_dvi, dc_dvj;
  double dd_di, dd_dj, dd_dvi, dd_dvj;
};

/// Rectangular components of the current leaving the local terminal,
///   C + jD = (Y_s + Y) V_i - Y V_j,
/// written in the polar trigonometric form with Y = |Y|exp(j theta) and
/// Y_s = |Y_s|exp(j theta_s).
CurrentTerms current_terms(const BranchSideView& v, const PolarState& x) {
  const double vi = x.v_mag[v.local], vj = x.v_mag[v.remote];
  const double di = x.v_ang[v.local], dj = x.v_ang[v.remote];
  const double ym = std::hypot(v.g, v.b), th = std::atan2(v.b, v.g);
  const double ysm = std::hypot(v.gs, v.bs), ths = (ysm > 0.0) ? std::atan2(v.bs, v.gs) : 0.0;

  const double cis = std::cos(di + ths), sis = std::sin(di + ths);
  const double ci = std::cos(di + th), si = std::sin(di + th);
  const double cj = std::cos(dj + th), sj = std::sin(dj + th);

  CurrentTerms t;
  t.c = ysm * vi * cis + ym * vi * ci - ym * vj * cj;
  t.d = ysm * vi * sis + ym * vi * si - ym * vj * sj;
  t.dc_dvi = ysm * cis + ym * ci;
  t.dc_dvj = -ym * cj;
  t.dc_di = -ysm * vi * sis - ym * vi * si;
  t.dc_dj = ym * vj * sj;
  t.dd_dvi = ysm * sis + ym * si;
  t.dd_dvj = -ym * sj;
  t.dd_di = ysm * vi * cis + ym * vi * ci;
  t.dd_dj = -ym * vj * cj;
  return t;
}

}  // namespace

double evaluate_h(const Network& net, const PolarState& x, const MeasurementKind& kind) {
  check_kind(net, kind);
  switch (kind.type) {
    case MeasurementType::PInjection: {
      double p = 0.0;
      for (const auto& [branch, side] : net.incident(kind.bus))
        p += flow_terms(net.side_view(branch, side), x).p;
      return p;
    }
    case MeasurementType::QInjection: {
      double q = 0.0;
      for (const auto& [branch, side] : net.incident(kind.bus))
        q += flow_terms(net.side_view(branch, side), x).q;
      return q;
    }
    case MeasurementType::PFlow:
      return flow_terms(net.side_view(kind.branch, kind.side), x).p;
    case MeasurementType::QFlow:
      return flow_terms(net.side_view(kind.branch, kind.side), x).q;
    case MeasurementType::VMagnitude:
      return x.v_mag[kind.bus];
    case MeasurementType::VAnglePmu:
      return x.v_ang[kind.bus];
    case MeasurementType::IRealPmu:
      return current_terms(net.side_view(kind.branch, kind.side), x).c;
    case MeasurementType::IImagPmu:
      return current_terms(net.side_view(kind.branch, kind.side), x).d;
    case MeasurementType::VRealPmu:
      return x.v_mag[kind.bus] * std::cos(x.v_ang[kind.bus]);
    case MeasurementType::VImagPmu:
      return x.v_mag[kind.bus] * std::sin(x.v_ang[kind.bus]);
  }
  throw DataError("unhandled measurement type");
}

Eigen::RowVectorXd jacobian_row(const Network& net, const PolarState& x,
                                const MeasurementKind& kind, const StateIndexer& idx) {
  check_kind(net, kind);
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(idx.columns());
  auto add_ang = [&](int bus, double v) {
    const int c = idx.angle_col(bus);
    if (c >= 0) row[c] += v;
  };
  auto add_mag = [&](int bus, double v) { row[idx.mag_col(bus)] += v; };

  switch (kind.type) {
    case MeasurementType::PInjection:
      for (const auto& [branch, side] : net.incident(kind.bus)) {
        const auto v = net.side_view(branch, side);
        const auto t = flow_terms(v, x);
        add_ang(v.local, t.dp_di);
        add_ang(v.remote, t.dp_dj);
        add_mag(v.local, t.dp_dvi);
        add_mag(v.remote, t.dp_dvj);
      }
      break;
    case MeasurementType::QInjection:
      for (const auto& [branch, side] : net.incident(kind.bus)) {
        const auto v = net.side_view(branch, side);
        const auto t = flow_terms(v, x);
        add_ang(v.local, t.dq_di);
        add_ang(v.remote, t.dq_dj);
        add_mag(v.local, t.dq_dvi);
        add_mag(v.remote, t.dq_dvj);
      }
      break;
    case MeasurementType::PFlow: {
      const auto v = net.side_view(kind.branch, kind.side);
      const auto t = flow_terms(v, x);
      add_ang(v.local, t.dp_di);
      add_ang(v.remote, t.dp_dj);
      add_mag(v.local, t.dp_dvi);
      add_mag(v.remote, t.dp_dvj);
      break;
    }
    case MeasurementType::QFlow: {
      const auto v = net.side_view(kind.branch, kind.side);
      const auto t = flow_terms(v, x);
      add_ang(v.local, t.dq_di);
      add_ang(v.remote, t.dq_dj);
      add_mag(v.local, t.dq_dvi);
      add_mag(v.remote, t.dq_dvj);
      break;
    }
    case MeasurementType::VMagnitude:
      add_mag(kind.bus, 1.0);
      break;
    case MeasurementType::VAnglePmu:
      add_ang(kind.bus, 1.0);  // zero row when measuring the pinned slack angle
      break;
    case MeasurementType::IRealPmu: {
      const auto v = net.side_view(kind.branch, kind.side);
      const auto t = current_terms(v, x);
      add_ang(v.local, t.dc_di);
      add_ang(v.remote, t.dc_dj);
      add_mag(v.local, t.dc_dvi);
      add_mag(v.remote, t.dc_dvj);
      break;
    }
    case MeasurementType::IImagPmu: {
      const auto v = net.side_view(kind.branch, kind.side);
      const auto t = current_terms(v, x);
      add_ang(v.local, t.dd_di);
      add_ang(v.remote, t.dd_dj);
      add_mag(v.local, t.dd_dvi);
      add_mag(v.remote, t.dd_dvj);
      break;
    }
    case MeasurementType::VRealPmu:
      add_mag(kind.bus, std::cos(x.v_ang[kind.bus]));
      add_ang(kind.bus, -x.v_mag[kind.bus] * std::sin(x.v_ang[kind.bus]));
      break;
    case MeasurementType::VImagPmu:
      add_mag(kind.bus, std::sin(x.v_ang[kind.bus]));
      add_ang(kind.bus, x.v_mag[kind.bus] * std::cos(x.v_ang[kind.bus]));
      break;
  }
  return row;
}

Eigen::RowVectorXd jacobian_row(const Network& net, const PolarState& x,
                                const MeasurementKind& kind) {
  StateIndexer idx{net.n_buses(), net.slack_index(), true};
  return jacobian_row(net, x, kind, idx);
}

MeasurementSet simulate_measurements(const Network& net, const PolarState& x_true,
                                     const MeasurementPlan& plan, const NoiseSpec& noise,
                                     std::uint64_t seed) {
  const auto planned = expand_plan(net, plan, noise);
  MeasurementSet set;
  set.rows.reserve(planned.size());
  set.provenance = "simulated seed=" + std::to_string(seed);
  for (std::size_t i = 0; i < planned.size(); ++i) {
    const auto& pm = planned[i];
    Measurement m;
    m.kind = pm.kind;
    m.value = evaluate_h(net, x_true, pm.kind);
    if (pm.noise_sigma > 0.0) m.value += pm.noise_sigma * gaussian_draw(seed, i);
    m.sigma = std::max(pm.noise_sigma, NoiseSpec::kSigmaFloor);
    set.rows.push_back(m);
  }
  return set;
}

MeasurementSet rectangularize_pmu_voltages(const Network& net, const MeasurementSet& set) {
  std::vector<std::optional<double>> ang(net.n_buses()), ang_sigma(net.n_buses());
  for (const auto& m : set.rows) {
    if (m.kind.type == MeasurementType::VAnglePmu) {
      ang[m.kind.bus] = m.value;
      ang_sigma[m.kind.bus] = m.sigma;
    }
  }

  MeasurementSet out;
  out.provenance = set.provenance;
  out.rows.reserve(set.rows.size());
  for (const auto& m : set.rows) {
    switch (m.kind.type) {
      case MeasurementType::VAnglePmu:
        break;  // folded into the matching magnitude row below
      case MeasurementType::VMagnitude: {
        if (!ang[m.kind.bus])
          throw DataError("bus " + std::to_string(net.bus(m.kind.bus).id) +
                          ": |V| row has no matching PMU angle row");
        const double a = *ang[m.kind.bus];
        Measurement e = m, f = m;
        e.kind = MeasurementKind::at_bus(MeasurementType::VRealPmu, m.kind.bus);
        e.value = m.value * std::cos(a);
        f.kind = MeasurementKind::at_bus(MeasurementType::VImagPmu, m.kind.bus);
        f.value = m.value * std::sin(a);
        out.rows.push_back(e);
        out.rows.push_back(f);
        break;
      }
      case MeasurementType::IRealPmu:
      case MeasurementType::IImagPmu:
      case MeasurementType::VRealPmu:
      case MeasurementType::VImagPmu:
        out.rows.push_back(m);
        break;
      default:
        throw DataError("cannot express " + type_name(m.kind.type) +
                        " as a rectangular PMU row");
    }
  }
  return out;
}

bool is_pmu_rectangular(const MeasurementSet& set) {
  return !set.empty() &&
         std::all_of(set.rows.begin(), set.rows.end(),
                     [](const Measurement& m) { return is_rectangular_type(m.kind.type); });
}

}  // namespace gridstate
