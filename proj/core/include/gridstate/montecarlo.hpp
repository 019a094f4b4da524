#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gridstate/estimator.hpp"
#include "gridstate/measurement.hpp"
#include "gridstate/network.hpp"

namespace gridstate {

/// Greedy PMU placement: repeatedly pick the bus whose PMU would cover the
/// most not-yet-covered buses (itself plus its neighbors), ties broken by
/// lowest external bus id. Returns internal indices in pick order, so any
/// shorter placement is a prefix of a longer one.
std::vector<int> place_pmus(const Network& net, int count);

/// Greedy picks continued until the PMU-only rectangular plan reaches full
/// rank (the Only-PMUs placement of the study).
std::vector<int> place_pmus_observable(const Network& net);

struct CaseSpec {
  std::string label;
  std::vector<int> pmu_buses;  // internal indices, placement order
  MeasurementPlan plan;
  int trials = 1000;
  std::uint64_t seed = 0;
  bool linear_solver = false;  // Only-PMUs case: one linear solve per trial
};

struct CaseReport {
  std::string label;
  int pmu_count = 0;
  double avg_sd_vmag = 0.0;
  double avg_sd_vang = 0.0;  // radians
  double pct_vmag = 100.0;   // relative to the no-PMU baseline
  double pct_vang = 100.0;
  int failed_trials = 0;
  std::vector<double> per_bus_sd_vmag;  // indexed by internal bus index
  std::vector<double> per_bus_sd_vang;
};

/// Run one case: `trials` independent noisy estimations of x_true, error
/// statistics per bus, averaged into the report. avg_sd_vmag averages all
/// buses; avg_sd_vang averages the non-slack buses (the angle state
/// variables). Trials that fail to converge are counted; more than 1% of
/// them aborts the case. Trials are independent and may run on `jobs`
/// threads; per-trial seeding keeps the outcome identical for any value.
CaseReport run_case(const Network& net, const PolarState& x_true, const CaseSpec& spec,
                    const NoiseSpec& noise, const SolverOptions& opts = {}, int jobs = 1);

/// The six case specs of the penetration sweep: no PMUs, 10/20/30/40%
/// (nested greedy placements on top of the full conventional plan), and a
/// PMU-only case with every bus instrumented, solved linearly. All cases
/// share the same seed so rows common to consecutive cases see identical
/// noise, which makes the accuracy trend a structural rather than
/// statistical property.
std::vector<CaseSpec> suite_case_specs(const Network& net, int trials, std::uint64_t seed);

/// Run the six-case sweep and normalize percentages to the first case.
std::vector<CaseReport> run_suite(const Network& net, const PolarState& x_true, int trials,
                                  std::uint64_t seed, const NoiseSpec& noise,
                                  const SolverOptions& opts = {}, int jobs = 1);

/// Fractions of the six-case sweep, in order.
const std::vector<double>& suite_pmu_fractions();

/// Round-half-up bus count of a penetration fraction.
int pmu_count_for_fraction(int n_buses, double fraction);

}  // namespace gridstate
