#include "gridstate/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "gridstate/errors.hpp"
#include "gridstate/random.hpp"

namespace gridstate {

std::vector<int> place_pmus(const Network& net, int count) {
  if (count < 0 || count > net.n_buses())
    throw ConfigError("PMU count " + std::to_string(count) + " out of range 0.." +
                      std::to_string(net.n_buses()));
  std::vector<int> picks;
  std::vector<char> chosen(net.n_buses(), 0), covered(net.n_buses(), 0);
  while (static_cast<int>(picks.size()) < count) {
    int best = -1, best_gain = -1;
    for (int b = 0; b < net.n_buses(); ++b) {
      if (chosen[b]) continue;
      int gain = covered[b] ? 0 : 1;
      for (int nb : net.neighbors(b)) gain += covered[nb] ? 0 : 1;
      if (gain > best_gain ||
          (gain == best_gain && net.bus(b).id < net.bus(best).id)) {
        best = b;
        best_gain = gain;
      }
    }
    chosen[best] = 1;
    covered[best] = 1;
    for (int nb : net.neighbors(best)) covered[nb] = 1;
    picks.push_back(best);
  }
  return picks;
}

std::vector<int> place_pmus_observable(const Network& net) {
  for (int count = 1; count <= net.n_buses(); ++count) {
    auto picks = place_pmus(net, count);
    const auto rep = observability_rank(net, MeasurementPlan::pmu_only(picks));
    if (rep.observable) return picks;
  }
  throw UnobservableError("no PMU placement makes the network observable");
}

namespace {

struct TrialErrors {
  std::vector<double> dmag, dang;
  bool converged = false;
};

TrialErrors run_trial(const Network& net, const PolarState& x_true, const CaseSpec& spec,
                      const NoiseSpec& noise, const SolverOptions& opts,
                      std::uint64_t trial_seed) {
  const MeasurementSet z = simulate_measurements(net, x_true, spec.plan, noise, trial_seed);

  TrialErrors out;
  EstimationResult res;
  if (spec.linear_solver) {
    res = linear_pmu_estimate(net, z, opts);
  } else {
    PolarState x0 = PolarState::flat(net.n_buses(), net.slack_index(),
                                     x_true.v_ang[net.slack_index()]);
    res = wls_estimate(net, z, x0, opts);
  }
  out.converged = res.converged;
  if (!res.converged) return out;

  out.dmag.resize(net.n_buses());
  out.dang.resize(net.n_buses());
  for (int b = 0; b < net.n_buses(); ++b) {
    out.dmag[b] = res.state.v_mag[b] - x_true.v_mag[b];
    out.dang[b] = res.state.v_ang[b] - x_true.v_ang[b];
  }
  return out;
}

double sample_sd(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

CaseReport run_case(const Network& net, const PolarState& x_true, const CaseSpec& spec,
                    const NoiseSpec& noise, const SolverOptions& opts, int jobs) {
  if (spec.trials <= 0) throw ConfigError("trial count must be positive");
  if (jobs < 1) jobs = 1;

  std::vector<TrialErrors> trials(spec.trials);
  const auto worker = [&](int begin, int end) {
    for (int t = begin; t < end; ++t)
      trials[t] = run_trial(net, x_true, spec, noise, opts,
                            mix_seed(spec.seed, static_cast<std::uint64_t>(t)));
  };

  if (jobs == 1 || spec.trials < 2 * jobs) {
    worker(0, spec.trials);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (spec.trials + jobs - 1) / jobs;
    for (int j = 0; j < jobs; ++j) {
      const int begin = j * chunk;
      const int end = std::min(spec.trials, begin + chunk);
      if (begin < end) pool.emplace_back(worker, begin, end);
    }
    for (auto& th : pool) th.join();
  }

  CaseReport rep;
  rep.label = spec.label;
  rep.pmu_count = static_cast<int>(spec.pmu_buses.size());
  for (const auto& t : trials)
    if (!t.converged) ++rep.failed_trials;
  if (rep.failed_trials * 100 > spec.trials)
    throw DataError("case '" + spec.label + "': " + std::to_string(rep.failed_trials) +
                    " of " + std::to_string(spec.trials) + " trials failed to converge");

  rep.per_bus_sd_vmag.resize(net.n_buses());
  rep.per_bus_sd_vang.resize(net.n_buses());
  std::vector<double> col;
  col.reserve(trials.size());
  for (int b = 0; b < net.n_buses(); ++b) {
    col.clear();
    for (const auto& t : trials)
      if (t.converged) col.push_back(t.dmag[b]);
    rep.per_bus_sd_vmag[b] = sample_sd(col);
    col.clear();
    for (const auto& t : trials)
      if (t.converged) col.push_back(t.dang[b]);
    rep.per_bus_sd_vang[b] = sample_sd(col);
  }

  double sum_mag = 0.0, sum_ang = 0.0;
  for (int b = 0; b < net.n_buses(); ++b) {
    sum_mag += rep.per_bus_sd_vmag[b];
    if (b != net.slack_index()) sum_ang += rep.per_bus_sd_vang[b];
  }
  rep.avg_sd_vmag = sum_mag / net.n_buses();
  rep.avg_sd_vang = sum_ang / std::max(1, net.n_buses() - 1);
  return rep;
}

const std::vector<double>& suite_pmu_fractions() {
  static const std::vector<double> fractions = {0.1, 0.2, 0.3, 0.4};
  return fractions;
}

int pmu_count_for_fraction(int n_buses, double fraction) {
  return static_cast<int>(std::floor(fraction * n_buses + 0.5));
}

std::vector<CaseSpec> suite_case_specs(const Network& net, int trials, std::uint64_t seed) {
  if (trials <= 0) throw ConfigError("trial count must be positive");

  std::vector<CaseSpec> specs;
  specs.push_back({"No PMUs", {}, MeasurementPlan::full_conventional(), trials, seed, false});
  for (double frac : suite_pmu_fractions()) {
    const int count = pmu_count_for_fraction(net.n_buses(), frac);
    auto buses = place_pmus(net, count);
    CaseSpec s;
    s.label = std::to_string(static_cast<int>(frac * 100 + 0.5)) + "% PMUs";
    s.plan = MeasurementPlan::hybrid(buses);
    s.pmu_buses = std::move(buses);
    s.trials = trials;
    s.seed = seed;
    specs.push_back(std::move(s));
  }
  {
    // Every bus instrumented: the PMU-only data set of the final case.
    std::vector<int> all(net.n_buses());
    for (int b = 0; b < net.n_buses(); ++b) all[b] = b;
    CaseSpec s;
    s.label = "Only PMUs";
    s.plan = MeasurementPlan::pmu_only(all);
    s.pmu_buses = std::move(all);
    s.trials = trials;
    s.seed = seed;
    s.linear_solver = true;
    specs.push_back(std::move(s));
  }
  return specs;
}

std::vector<CaseReport> run_suite(const Network& net, const PolarState& x_true, int trials,
                                  std::uint64_t seed, const NoiseSpec& noise,
                                  const SolverOptions& opts, int jobs) {
  const auto specs = suite_case_specs(net, trials, seed);
  std::vector<CaseReport> reports;
  reports.reserve(specs.size());
  for (const auto& spec : specs)
    reports.push_back(run_case(net, x_true, spec, noise, opts, jobs));

  const double base_mag = reports.front().avg_sd_vmag;
  const double base_ang = reports.front().avg_sd_vang;
  for (auto& rep : reports) {
    rep.pct_vmag = base_mag > 0.0 ? 100.0 * rep.avg_sd_vmag / base_mag : 100.0;
    rep.pct_vang = base_ang > 0.0 ? 100.0 * rep.avg_sd_vang / base_ang : 100.0;
  }
  return reports;
}

}  // namespace gridstate
