#include "gridstate/cdf.hpp"

#include <cctype>
#include <cmath>
#include <complex>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <vector>

namespace gridstate {
namespace {

constexpr double kPi = 3.14159265358979323846;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> tokens_of(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

std::optional<double> to_double(const std::string& s) {
  const std::string t = trim(s);
  if (t.empty()) return std::nullopt;
  try {
    std::size_t pos = 0;
    const double v = std::stod(t, &pos);
    if (pos != t.size()) return std::nullopt;
    return v;
  } catch (...) {
    return std::nullopt;
  }
}

std::optional<long> to_long(const std::string& s) {
  const std::string t = trim(s);
  if (t.empty()) return std::nullopt;
  try {
    std::size_t pos = 0;
    const long v = std::stol(t, &pos);
    if (pos != t.size()) return std::nullopt;
    return v;
  } catch (...) {
    return std::nullopt;
  }
}

std::string col(const std::string& line, std::size_t start, std::size_t len) {
  if (start >= line.size()) return "";
  return line.substr(start, len);
}

BusKind kind_of(long type_code, int bus_id) {
  switch (type_code) {
    case 0:
    case 1:
      return BusKind::PQ;
    case 2:
      return BusKind::PV;
    case 3:
      return BusKind::Slack;
    default:
      throw DataError("bus " + std::to_string(bus_id) + ": unknown type code " +
                      std::to_string(type_code));
  }
}

/// Bus card in the standard fixed-column layout: id 1-4, name 6-17,
/// type 25-26, final voltage 28-33, final angle 34-40, base kV 77-83.
std::optional<Bus> parse_bus_fixed(const std::string& line) {
  if (line.size() < 40) return std::nullopt;
  const auto id = to_long(col(line, 0, 4));
  const auto type = to_long(col(line, 24, 2));
  const auto vmag = to_double(col(line, 27, 6));
  const auto ang = to_double(col(line, 33, 7));
  if (!id || !type || !vmag || !ang || *vmag <= 0.0) return std::nullopt;
  Bus b;
  b.id = static_cast<int>(*id);
  b.name = trim(col(line, 5, 12));
  b.kind = kind_of(*type, b.id);
  b.ref_v_mag = *vmag;
  b.ref_v_ang = *ang * kPi / 180.0;
  const auto kv = to_double(col(line, 76, 7));
  b.base_kv = (kv && *kv > 0.0) ? *kv : 1.0;
  return b;
}

/// Whitespace fallback: id name area zone type v_pu angle_deg [rest...].
Bus parse_bus_tokens(const std::string& line) {
  const auto tok = tokens_of(line);
  if (tok.size() < 7) throw FormatError("bus card too short: '" + trim(line) + "'");
  const auto id = to_long(tok[0]);
  const auto type = to_long(tok[4]);
  const auto vmag = to_double(tok[5]);
  const auto ang = to_double(tok[6]);
  if (!id || !type || !vmag || !ang)
    throw FormatError("unparseable bus card: '" + trim(line) + "'");
  Bus b;
  b.id = static_cast<int>(*id);
  b.name = tok[1];
  b.kind = kind_of(*type, b.id);
  b.ref_v_mag = *vmag;
  b.ref_v_ang = *ang * kPi / 180.0;
  if (tok.size() >= 13) {
    const auto kv = to_double(tok[12]);
    if (kv && *kv > 0.0) b.base_kv = *kv;
  }
  return b;
}

/// Branch cards carry no text fields, so whitespace splitting always works:
/// from to area zone circuit type r x b mva1 mva2 mva3 ctrl side ratio angle...
Branch parse_branch(const std::string& line) {
  const auto tok = tokens_of(line);
  if (tok.size() < 9) throw FormatError("branch card too short: '" + trim(line) + "'");
  const auto from = to_long(tok[0]);
  const auto to = to_long(tok[1]);
  const auto r = to_double(tok[6]);
  const auto x = to_double(tok[7]);
  const auto chg = to_double(tok[8]);
  if (!from || !to || !r || !x || !chg)
    throw FormatError("unparseable branch card: '" + trim(line) + "'");
  if (*r == 0.0 && *x == 0.0)
    throw DataError("branch " + tok[0] + "-" + tok[1] + ": r = x = 0");

  Branch br;
  br.from_bus = static_cast<int>(*from);
  br.to_bus = static_cast<int>(*to);
  const std::complex<double> y = 1.0 / std::complex<double>(*r, *x);
  br.series_g = y.real();
  br.series_b = y.imag();
  br.shunt_b_from = br.shunt_b_to = *chg / 2.0;

  if (tok.size() > 14) {
    const auto ratio = to_double(tok[14]);
    if (ratio && *ratio > 0.0) br.tap_ratio = *ratio;
  }
  if (tok.size() > 15) {
    const auto shift = to_double(tok[15]);
    if (shift && *shift != 0.0)
      throw DataError("branch " + tok[0] + "-" + tok[1] +
                      ": phase-shift angles are not supported");
  }
  return br;
}

double parse_mva_base(const std::string& title) {
  // Standard location is columns 32-37 of the title card.
  if (const auto v = to_double(col(title, 31, 6)); v && *v > 0.0) return *v;
  for (const auto& tok : tokens_of(title))
    if (const auto v = to_double(tok); v && *v > 0.0) return *v;
  throw FormatError("title card carries no MVA base: '" + trim(title) + "'");
}

}  // namespace

CdfCase parse_ieee_cdf(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty CDF input");
  const std::string title = trim(line);
  const double mva_base = parse_mva_base(line);

  enum class Section { Preamble, Bus, Branch, Done };
  Section section = Section::Preamble;
  bool bus_seen = false, bus_closed = false;
  bool branch_seen = false, branch_closed = false;

  std::vector<Bus> buses;
  std::vector<Branch> branches;

  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty()) continue;
    switch (section) {
      case Section::Preamble:
        if (t.rfind("BUS DATA", 0) == 0) {
          section = Section::Bus;
          bus_seen = true;
        } else if (t.rfind("BRANCH DATA", 0) == 0) {
          section = Section::Branch;
          branch_seen = true;
        } else if (t.rfind("END OF DATA", 0) == 0) {
          section = Section::Done;
        }
        break;
      case Section::Bus:
        if (t.rfind("-999", 0) == 0) {
          bus_closed = true;
          section = Section::Preamble;
        } else if (std::isalpha(static_cast<unsigned char>(t[0]))) {
          throw FormatError("BUS DATA section missing -999 terminator");
        } else if (auto b = parse_bus_fixed(line)) {
          buses.push_back(std::move(*b));
        } else {
          buses.push_back(parse_bus_tokens(line));
        }
        break;
      case Section::Branch:
        if (t.rfind("-999", 0) == 0) {
          branch_closed = true;
          section = Section::Preamble;
        } else if (std::isalpha(static_cast<unsigned char>(t[0]))) {
          throw FormatError("BRANCH DATA section missing -999 terminator");
        } else {
          branches.push_back(parse_branch(line));
        }
        break;
      case Section::Done:
        break;
    }
    if (section == Section::Done) break;
  }

  if (!bus_seen) throw FormatError("no BUS DATA section");
  if (!branch_seen) throw FormatError("no BRANCH DATA section");
  if (!bus_closed) throw FormatError("BUS DATA section missing -999 terminator");
  if (!branch_closed) throw FormatError("BRANCH DATA section missing -999 terminator");

  Network net(std::move(buses), std::move(branches), mva_base);
  PolarState ref = net.reference_state();
  return CdfCase{std::move(net), std::move(ref), title};
}

CdfCase parse_ieee_cdf(const std::string& text) {
  std::istringstream is(text);
  return parse_ieee_cdf(is);
}

CdfCase load_cdf_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open case file: " + path);
  return parse_ieee_cdf(in);
}

}  // namespace gridstate
