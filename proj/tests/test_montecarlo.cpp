#include <doctest.h>

#include <cmath>

#include "gridstate/errors.hpp"
#include "gridstate/montecarlo.hpp"
#include "support/fixtures.hpp"

using namespace gridstate;

namespace {

NoiseSpec silent_noise() {
  NoiseSpec n;
  n.conv_power = n.conv_vmag = n.pmu = n.pmu_angle = 0.0;
  return n;
}

bool reports_equal(const CaseReport& a, const CaseReport& b) {
  if (a.label != b.label || a.pmu_count != b.pmu_count || a.failed_trials != b.failed_trials)
    return false;
  if (a.avg_sd_vmag != b.avg_sd_vmag || a.avg_sd_vang != b.avg_sd_vang) return false;
  if (a.per_bus_sd_vmag != b.per_bus_sd_vmag) return false;
  if (a.per_bus_sd_vang != b.per_bus_sd_vang) return false;
  return true;
}

}  // namespace

TEST_CASE("greedy placement") {
  const Network& net = fixtures::ieee14().network;

  SUBCASE("count 0 places nothing") { CHECK(place_pmus(net, 0).empty()); }
  SUBCASE("count out of range") {
    CHECK_THROWS_AS(place_pmus(net, 15), ConfigError);
    CHECK_THROWS_AS(place_pmus(net, -1), ConfigError);
  }
  SUBCASE("the single 10% PMU lands on the highest-degree bus") {
    CHECK(pmu_count_for_fraction(14, 0.1) == 1);
    const auto picks = place_pmus(net, 1);
    REQUIRE(picks.size() == 1u);
    CHECK(net.bus(picks[0]).id == 4);  // covers itself plus five neighbors
  }
  SUBCASE("placements are nested prefixes") {
    const auto longer = place_pmus(net, 8);
    for (int k = 1; k < 8; ++k) {
      const auto shorter = place_pmus(net, k);
      REQUIRE(shorter.size() == static_cast<std::size_t>(k));
      for (int i = 0; i < k; ++i) CHECK(shorter[i] == longer[i]);
    }
  }
  SUBCASE("observable placement passes the rectangular rank check") {
    for (const auto* sys : {"ieee14cdf.txt", "ieee30cdf.txt"}) {
      const auto c = load_cdf_file(fixtures::data_path(sys));
      const auto picks = place_pmus_observable(c.network);
      const auto rep = observability_rank(c.network, MeasurementPlan::pmu_only(picks));
      CHECK(rep.observable);
      CHECK(rep.columns == 2 * c.network.n_buses());
    }
  }
  SUBCASE("fraction rounding is half-up") {
    CHECK(pmu_count_for_fraction(14, 0.2) == 3);  // 2.8
    CHECK(pmu_count_for_fraction(14, 0.3) == 4);  // 4.2
    CHECK(pmu_count_for_fraction(14, 0.4) == 6);  // 5.6
    CHECK(pmu_count_for_fraction(30, 0.1) == 3);
    CHECK(pmu_count_for_fraction(30, 0.3) == 9);
  }
}

TEST_CASE("run_case with zero noise reports zero standard deviations") {
  const auto& c = fixtures::ieee14();

  SUBCASE("hybrid iterative case") {
    CaseSpec spec;
    spec.label = "test";
    spec.pmu_buses = place_pmus(c.network, 2);
    spec.plan = MeasurementPlan::hybrid(spec.pmu_buses);
    spec.trials = 2;
    spec.seed = 11;
    const auto rep = run_case(c.network, c.reference, spec, silent_noise());
    CHECK(rep.avg_sd_vmag == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(rep.avg_sd_vang == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(rep.failed_trials == 0);
  }
  SUBCASE("linear PMU-only case") {
    std::vector<int> all(c.network.n_buses());
    for (int b = 0; b < c.network.n_buses(); ++b) all[b] = b;
    CaseSpec spec;
    spec.label = "test";
    spec.pmu_buses = all;
    spec.plan = MeasurementPlan::pmu_only(all);
    spec.trials = 2;
    spec.seed = 11;
    spec.linear_solver = true;
    const auto rep = run_case(c.network, c.reference, spec, silent_noise());
    CHECK(rep.avg_sd_vmag < 1e-12);
    CHECK(rep.avg_sd_vang < 1e-12);
  }
}

TEST_CASE("run_case is deterministic and independent of the job count") {
  const auto& c = fixtures::ieee14();
  CaseSpec spec;
  spec.label = "det";
  spec.pmu_buses = place_pmus(c.network, 1);
  spec.plan = MeasurementPlan::hybrid(spec.pmu_buses);
  spec.trials = 40;
  spec.seed = 123;

  const auto a = run_case(c.network, c.reference, spec, NoiseSpec{}, SolverOptions{}, 1);
  const auto b = run_case(c.network, c.reference, spec, NoiseSpec{}, SolverOptions{}, 1);
  const auto d = run_case(c.network, c.reference, spec, NoiseSpec{}, SolverOptions{}, 4);
  CHECK(reports_equal(a, b));
  CHECK(reports_equal(a, d));
}

TEST_CASE("run_case aborts when more than 1% of trials fail") {
  const auto& c = fixtures::ieee14();
  CaseSpec spec;
  spec.label = "hopeless";
  spec.plan = MeasurementPlan::full_conventional();
  spec.trials = 10;
  spec.seed = 3;
  SolverOptions opts;
  opts.max_iterations = 1;  // cannot converge in one step from flat start
  opts.epsilon = 1e-15;
  CHECK_THROWS_AS(run_case(c.network, c.reference, spec, NoiseSpec{}, opts), DataError);
}

TEST_CASE("six-case suite: shape, normalization and accuracy trend") {
  const auto& c = fixtures::ieee14();
  const auto reports = run_suite(c.network, c.reference, 80, 42, NoiseSpec{}, SolverOptions{}, 2);
  REQUIRE(reports.size() == 6u);

  CHECK(reports[0].label == "No PMUs");
  CHECK(reports[1].label == "10% PMUs");
  CHECK(reports[5].label == "Only PMUs");
  CHECK(reports[0].pmu_count == 0);
  CHECK(reports[1].pmu_count == 1);
  CHECK(reports[4].pmu_count == 6);
  CHECK(reports[5].pmu_count == 14);

  // Self-normalization is exact.
  CHECK(reports[0].pct_vmag == 100.0);
  CHECK(reports[0].pct_vang == 100.0);

  for (int i = 1; i < 6; ++i) {
    CHECK(reports[i].avg_sd_vmag <= reports[i - 1].avg_sd_vmag);
    CHECK(reports[i].avg_sd_vang <= reports[i - 1].avg_sd_vang);
  }
  for (int i = 0; i < 5; ++i) {
    CHECK(reports[5].avg_sd_vmag <= reports[i].avg_sd_vmag);
    CHECK(reports[5].avg_sd_vang <= reports[i].avg_sd_vang);
  }
}

TEST_CASE("PMU-only standard deviation scales linearly in the PMU sigma") {
  const auto& c = fixtures::ieee14();
  std::vector<int> all(c.network.n_buses());
  for (int b = 0; b < c.network.n_buses(); ++b) all[b] = b;
  CaseSpec spec;
  spec.label = "Only PMUs";
  spec.pmu_buses = all;
  spec.plan = MeasurementPlan::pmu_only(all);
  spec.trials = 200;
  spec.seed = 9;
  spec.linear_solver = true;

  NoiseSpec full;
  NoiseSpec half;
  half.pmu /= 2.0;
  half.pmu_angle /= 2.0;
  const auto a = run_case(c.network, c.reference, spec, full);
  const auto b = run_case(c.network, c.reference, spec, half);
  CHECK(b.avg_sd_vmag == doctest::Approx(a.avg_sd_vmag / 2.0).epsilon(0.10));
  CHECK(b.avg_sd_vang == doctest::Approx(a.avg_sd_vang / 2.0).epsilon(0.10));
}
