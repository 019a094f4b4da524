#pragma once

#include <string>

#include "gridstate/cdf.hpp"

#ifndef GRIDSTATE_DATA_DIR
#error "GRIDSTATE_DATA_DIR must point at the bundled case files"
#endif

namespace fixtures {

inline std::string data_path(const std::string& name) {
  return std::string(GRIDSTATE_DATA_DIR) + "/" + name;
}

inline const gridstate::CdfCase& ieee14() {
  static const gridstate::CdfCase c = gridstate::load_cdf_file(data_path("ieee14cdf.txt"));
  return c;
}

inline const gridstate::CdfCase& ieee30() {
  static const gridstate::CdfCase c = gridstate::load_cdf_file(data_path("ieee30cdf.txt"));
  return c;
}

}  // namespace fixtures
