#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "gridstate/errors.hpp"

namespace gridstate {

/// Bus voltages in polar coordinates: N per-unit magnitudes and N angles in
/// radians. The slack bus angle is the network-wide reference; iterative
/// estimation normally keeps it pinned, so the free state has 2N-1
/// coordinates (N magnitudes, N-1 angles).
struct PolarState {
  std::vector<double> v_mag;  // per unit, > 0
  std::vector<double> v_ang;  // radians
  int slack = 0;              // internal bus index of the slack bus

  PolarState() = default;
  PolarState(std::vector<double> mag, std::vector<double> ang, int slack_index)
      : v_mag(std::move(mag)), v_ang(std::move(ang)), slack(slack_index) {
    if (v_mag.size() != v_ang.size())
      throw DataError("PolarState: magnitude/angle size mismatch");
    if (slack < 0 || static_cast<std::size_t>(slack) >= v_mag.size())
      throw DataError("PolarState: slack index out of range");
    for (double m : v_mag)
      if (!(m > 0.0)) throw DataError("PolarState: voltage magnitude must be > 0");
  }

  int size() const { return static_cast<int>(v_mag.size()); }

  std::complex<double> phasor(int bus) const {
    return std::polar(v_mag[bus], v_ang[bus]);
  }

  static PolarState flat(int n_buses, int slack_index, double slack_angle = 0.0) {
    PolarState x(std::vector<double>(n_buses, 1.0), std::vector<double>(n_buses, 0.0),
                 slack_index);
    x.v_ang[slack_index] = slack_angle;
    return x;
  }
};

/// Bus voltages in rectangular coordinates, V_i = E_i + jF_i. This is the
/// natural parameterization of the linear PMU-only estimator: all 2N
/// coordinates are free because PMU phasors carry an absolute angle
/// reference.
struct RectangularState {
  std::vector<double> e;
  std::vector<double> f;

  int size() const { return static_cast<int>(e.size()); }

  static RectangularState from_polar(const PolarState& x) {
    RectangularState r;
    r.e.resize(x.v_mag.size());
    r.f.resize(x.v_mag.size());
    for (std::size_t i = 0; i < x.v_mag.size(); ++i) {
      r.e[i] = x.v_mag[i] * std::cos(x.v_ang[i]);
      r.f[i] = x.v_mag[i] * std::sin(x.v_ang[i]);
    }
    return r;
  }

  PolarState to_polar(int slack_index) const {
    std::vector<double> mag(e.size()), ang(e.size());
    for (std::size_t i = 0; i < e.size(); ++i) {
      mag[i] = std::hypot(e[i], f[i]);
      ang[i] = std::atan2(f[i], e[i]);
    }
    return PolarState(std::move(mag), std::move(ang), slack_index);
  }
};

/// Maps (bus, coordinate kind) to a dense column index of the polar-state
/// Jacobian. With the slack angle pinned the layout is
///   [ang of non-slack buses in internal order | mag of all buses],
/// i.e. 2N-1 columns; without pinning all N angles get a column (2N).
struct StateIndexer {
  int n_buses = 0;
  int slack = 0;
  bool pin_slack = true;

  int columns() const { return pin_slack ? 2 * n_buses - 1 : 2 * n_buses; }
  int n_angles() const { return pin_slack ? n_buses - 1 : n_buses; }

  /// Column of bus i's angle, or -1 for the pinned slack angle.
  int angle_col(int bus) const {
    if (!pin_slack) return bus;
    if (bus == slack) return -1;
    return bus < slack ? bus : bus - 1;
  }

  int mag_col(int bus) const { return n_angles() + bus; }
};

}  // namespace gridstate
