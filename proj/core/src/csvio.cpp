#include "gridstate/csvio.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "gridstate/errors.hpp"

namespace gridstate {
namespace {

const char* kind_name(BusKind k) {
  switch (k) {
    case BusKind::Slack: return "slack";
    case BusKind::PV: return "pv";
    case BusKind::PQ: return "pq";
  }
  return "?";
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) out.push_back(field);
  return out;
}

std::string location_of(const Network& net, const MeasurementKind& kind) {
  if (is_bus_type(kind.type)) return std::to_string(net.bus(kind.bus).id);
  const Branch& br = net.branch(kind.branch);
  return std::to_string(br.from_bus) + "-" + std::to_string(br.to_bus);
}

const char* side_of(const MeasurementKind& kind) {
  if (is_bus_type(kind.type)) return "-";
  return kind.side == BranchSide::From ? "from" : "to";
}

int find_branch(const Network& net, int from_id, int to_id) {
  for (int k = 0; k < net.n_branches(); ++k) {
    const Branch& br = net.branch(k);
    if (br.from_bus == from_id && br.to_bus == to_id) return k;
  }
  throw DataError("unknown branch " + std::to_string(from_id) + "-" + std::to_string(to_id));
}

}  // namespace

std::string format_double(double v, int precision) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
  return buf;
}

void write_buses_csv(std::ostream& out, const Network& net) {
  out << "id,name,base_kv,kind,ref_v_mag,ref_v_ang_rad\n";
  for (const Bus& b : net.buses()) {
    out << b.id << ',' << b.name << ',' << format_double(b.base_kv) << ',' << kind_name(b.kind)
        << ',' << format_double(b.ref_v_mag) << ',' << format_double(b.ref_v_ang) << '\n';
  }
}

void write_branches_csv(std::ostream& out, const Network& net) {
  out << "from,to,series_g,series_b,shunt_g_from,shunt_b_from,shunt_g_to,shunt_b_to,tap_ratio\n";
  for (const Branch& br : net.branches()) {
    out << br.from_bus << ',' << br.to_bus << ',' << format_double(br.series_g) << ','
        << format_double(br.series_b) << ',' << format_double(br.shunt_g_from) << ','
        << format_double(br.shunt_b_from) << ',' << format_double(br.shunt_g_to) << ','
        << format_double(br.shunt_b_to) << ',' << format_double(br.tap_ratio) << '\n';
  }
}

void write_measurements_csv(std::ostream& out, const Network& net, const MeasurementSet& set) {
  out << "kind,location,side,value,sigma\n";
  for (const Measurement& m : set.rows) {
    out << type_name(m.kind.type) << ',' << location_of(net, m.kind) << ',' << side_of(m.kind)
        << ',' << format_double(m.value, 17) << ',' << format_double(m.sigma, 17) << '\n';
  }
}

MeasurementSet read_measurements_csv(std::istream& in, const Network& net) {
  MeasurementSet set;
  set.provenance = "file";
  std::string line;
  bool header = true;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      if (line.rfind("kind,", 0) == 0) continue;  // header row optional
    }
    const auto f = split_csv(line);
    if (f.size() != 5)
      throw FormatError("measurement CSV line " + std::to_string(lineno) +
                        ": expected 5 fields, got " + std::to_string(f.size()));
    const MeasurementType type = type_from_name(f[0]);
    Measurement m;
    if (is_bus_type(type)) {
      m.kind = MeasurementKind::at_bus(type, net.bus_index(std::stoi(f[1])));
    } else {
      const auto dash = f[1].find('-');
      if (dash == std::string::npos)
        throw FormatError("measurement CSV line " + std::to_string(lineno) +
                          ": branch location must be from-to");
      const int branch = find_branch(net, std::stoi(f[1].substr(0, dash)),
                                     std::stoi(f[1].substr(dash + 1)));
      if (f[2] != "from" && f[2] != "to")
        throw FormatError("measurement CSV line " + std::to_string(lineno) +
                          ": side must be from|to");
      m.kind = MeasurementKind::at_branch(
          type, branch, f[2] == "from" ? BranchSide::From : BranchSide::To);
    }
    m.value = std::stod(f[3]);
    m.sigma = std::stod(f[4]);
    if (!(m.sigma > 0.0))
      throw DataError("measurement CSV line " + std::to_string(lineno) + ": sigma must be > 0");
    set.rows.push_back(m);
  }
  return set;
}

MeasurementSet read_measurements_file(const std::string& path, const Network& net) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open measurement file: " + path);
  return read_measurements_csv(in, net);
}

void write_estimate_csv(std::ostream& out, const Network& net, const EstimationResult& res,
                        const PolarState& truth) {
  out << "bus,v_mag_est,v_ang_est_rad,v_mag_true,v_ang_true\n";
  for (int b = 0; b < net.n_buses(); ++b) {
    out << net.bus(b).id << ',' << format_double(res.state.v_mag[b]) << ','
        << format_double(res.state.v_ang[b]) << ',' << format_double(truth.v_mag[b]) << ','
        << format_double(truth.v_ang[b]) << '\n';
  }
  out << "# summary: iterations=" << res.iterations << " objective="
      << format_double(res.objective) << " converged=" << (res.converged ? 1 : 0)
      << " max_step=" << format_double(res.max_step) << '\n';
}

void write_suite_report_csv(std::ostream& out, const std::vector<CaseReport>& reports) {
  out << "# angle standard deviations are in radians\n";
  out << "case,label,pmu_count,avg_sd_vmag,pct_vmag,avg_sd_vang,pct_vang,failed_trials\n";
  char pct_mag[32], pct_ang[32];
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const CaseReport& r = reports[i];
    std::snprintf(pct_mag, sizeof(pct_mag), "%.2f", r.pct_vmag);
    std::snprintf(pct_ang, sizeof(pct_ang), "%.2f", r.pct_vang);
    out << (i + 1) << ',' << r.label << ',' << r.pmu_count << ','
        << format_double(r.avg_sd_vmag, 9) << ',' << pct_mag << ','
        << format_double(r.avg_sd_vang, 9) << ',' << pct_ang << ',' << r.failed_trials << '\n';
  }
}

void write_per_bus_sd_csv(std::ostream& out, const Network& net,
                          const std::vector<CaseReport>& reports) {
  out << "# angle standard deviations are in radians\n";
  out << "case,label,bus,sd_vmag,sd_vang\n";
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const CaseReport& r = reports[i];
    for (int b = 0; b < net.n_buses(); ++b) {
      out << (i + 1) << ',' << r.label << ',' << net.bus(b).id << ','
          << format_double(r.per_bus_sd_vmag[b], 9) << ','
          << format_double(r.per_bus_sd_vang[b], 9) << '\n';
    }
  }
}

}  // namespace gridstate
