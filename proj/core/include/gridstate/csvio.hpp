#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "gridstate/estimator.hpp"
#include "gridstate/measurement.hpp"
#include "gridstate/montecarlo.hpp"
#include "gridstate/network.hpp"

namespace gridstate {

/// All CSV output uses '.' decimals, LF line endings and fixed column
/// orders; identical inputs serialize byte-identically.

/// Debug dump of the network model:
///   buses.csv    id,name,base_kv,kind,ref_v_mag,ref_v_ang_rad
///   branches.csv from,to,series_g,series_b,shunt_g_from,shunt_b_from,
///                shunt_g_to,shunt_b_to,tap_ratio
void write_buses_csv(std::ostream& out, const Network& net);
void write_branches_csv(std::ostream& out, const Network& net);

/// kind,location,side,value,sigma. `location` is the external bus id for
/// bus kinds and "from-to" for branch kinds; `side` is from|to|-.
void write_measurements_csv(std::ostream& out, const Network& net, const MeasurementSet& set);
MeasurementSet read_measurements_csv(std::istream& in, const Network& net);
MeasurementSet read_measurements_file(const std::string& path, const Network& net);

/// bus,v_mag_est,v_ang_est_rad,v_mag_true,v_ang_true followed by a
/// '# summary' line with iterations, objective and the convergence flag.
void write_estimate_csv(std::ostream& out, const Network& net, const EstimationResult& res,
                        const PolarState& truth);

/// case,label,pmu_count,avg_sd_vmag,pct_vmag,avg_sd_vang,pct_vang,failed_trials
void write_suite_report_csv(std::ostream& out, const std::vector<CaseReport>& reports);

/// case,label,bus,sd_vmag,sd_vang
void write_per_bus_sd_csv(std::ostream& out, const Network& net,
                          const std::vector<CaseReport>& reports);

std::string format_double(double v, int precision = 12);

}  // namespace gridstate
