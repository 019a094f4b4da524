#pragma once

#include <iosfwd>
#include <string>

#include "gridstate/network.hpp"
#include "gridstate/state.hpp"

namespace gridstate {

struct CdfCase {
  Network network;
  PolarState reference;  // solved voltages from the bus section, angles in radians
  std::string title;
};

/// Parse IEEE Common Data Format text: title card, BUS DATA and BRANCH DATA
/// sections each terminated by -999. Bus cards are read by the standard
/// fixed columns when the line is long enough to carry them, otherwise by
/// whitespace-separated fields (id name area zone type v_pu angle_deg ...),
/// which accepts compact hand-written cases. Branch cards are whitespace
/// separated in both layouts. A zero turns-ratio field means 1.0; a zero
/// base-kV field means unspecified and is stored as 1.0. Branch phase-shift
/// angles are rejected.
CdfCase parse_ieee_cdf(std::istream& in);
CdfCase parse_ieee_cdf(const std::string& text);
CdfCase load_cdf_file(const std::string& path);

}  // namespace gridstate
