#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "gridstate/errors.hpp"
#include "gridstate/estimator.hpp"
#include "gridstate/montecarlo.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace gridstate;

namespace {

NoiseSpec silent_noise() {
  NoiseSpec n;
  n.conv_power = n.conv_vmag = n.pmu = n.pmu_angle = 0.0;
  return n;
}

double max_state_diff(const PolarState& a, const PolarState& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.v_mag.size(); ++i) {
    m = std::max(m, std::abs(a.v_mag[i] - b.v_mag[i]));
    m = std::max(m, std::abs(a.v_ang[i] - b.v_ang[i]));
  }
  return m;
}

}  // namespace

TEST_CASE("objective") {
  const auto& c = fixtures::ieee14();
  const Network& net = c.network;

  SUBCASE("zero-noise measurements evaluated at their generator state give 0") {
    const auto z = simulate_measurements(net, c.reference, MeasurementPlan::full_conventional(),
                                         silent_noise(), 3);
    CHECK(objective(net, c.reference, z) == doctest::Approx(0.0).epsilon(1e-15));
  }
  SUBCASE("one measurement: z=1.1, h=1.0, sigma=0.1 gives 1.0") {
    MeasurementSet z;
    Measurement m;
    m.kind = MeasurementKind::at_bus(MeasurementType::VMagnitude, 0);
    m.value = 1.1;
    m.sigma = 0.1;
    z.rows.push_back(m);
    PolarState x = PolarState::flat(net.n_buses(), net.slack_index());
    CHECK(objective(net, x, z) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("random set matches term-by-term recomputation through the oracle h") {
    const auto z = simulate_measurements(net, c.reference, MeasurementPlan::hybrid({1, 7}),
                                         NoiseSpec{}, 17);
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> mag(0.97, 1.08), ang(-0.25, 0.25);
    PolarState x = c.reference;
    for (int b = 0; b < net.n_buses(); ++b) {
      x.v_mag[b] = mag(rng);
      if (b != net.slack_index()) x.v_ang[b] = ang(rng);
    }
    double want = 0.0;
    for (const auto& m : z.rows) {
      const double r = (m.value - oracles::reference_h(net, x, m.kind)) / m.sigma;
      want += r * r;
    }
    CHECK(objective(net, x, z) == doctest::Approx(want).epsilon(1e-9));
  }
}

TEST_CASE("zero-noise full conventional set recovers the reference state") {
  const auto& c = fixtures::ieee14();
  const auto z = simulate_measurements(c.network, c.reference,
                                       MeasurementPlan::full_conventional(), silent_noise(), 1);
  const PolarState x0 = PolarState::flat(c.network.n_buses(), c.network.slack_index());
  const auto res = wls_estimate(c.network, z, x0);
  CHECK(res.converged);
  CHECK(res.iterations <= 10);
  CHECK(max_state_diff(res.state, c.reference) < 1e-8);
}

TEST_CASE("wls matches the dense reference solver on the three-bus fixture") {
  const Network net = oracles::three_bus_network();
  const PolarState truth = net.reference_state();
  SolverOptions opts;
  opts.epsilon = 1e-13;
  opts.max_iterations = 60;
  // Two noisy measurements per free coordinate: 5 free -> use full redundancy.
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto z =
        simulate_measurements(net, truth, MeasurementPlan::full_conventional(), NoiseSpec{}, seed);
    const auto res = wls_estimate(net, z, PolarState::flat(3, net.slack_index()), opts);
    REQUIRE(res.converged);
    const auto ref =
        oracles::reference_wls(net, z, PolarState::flat(3, net.slack_index()), true);
    CHECK(max_state_diff(res.state, ref) < 1e-10);
  }
}

TEST_CASE("hybrid estimation converges within 10 iterations from flat start") {
  const auto& c = fixtures::ieee14();
  const auto pmus = place_pmus(c.network, 3);
  const auto z = simulate_measurements(c.network, c.reference, MeasurementPlan::hybrid(pmus),
                                       NoiseSpec{}, 99);
  const auto res =
      wls_estimate(c.network, z, PolarState::flat(c.network.n_buses(), c.network.slack_index()));
  CHECK(res.converged);
  CHECK(res.iterations <= 10);
}

TEST_CASE("gauss-newton descends monotonically on the bundled cases") {
  for (const auto* sys : {"ieee14cdf.txt", "ieee30cdf.txt"}) {
    const auto c = load_cdf_file(fixtures::data_path(sys));
    for (std::uint64_t seed : {2u, 3u}) {
      const auto pmus = place_pmus(c.network, c.network.n_buses() / 5);
      const auto z = simulate_measurements(c.network, c.reference, MeasurementPlan::hybrid(pmus),
                                           NoiseSpec{}, seed);
      const auto res = wls_estimate(
          c.network, z, PolarState::flat(c.network.n_buses(), c.network.slack_index()));
      REQUIRE(res.converged);
      for (std::size_t i = 1; i < res.objective_history.size(); ++i)
        CHECK(res.objective_history[i] <= res.objective_history[i - 1] * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("first-order optimality holds at a tightly converged solution") {
  SolverOptions opts;
  opts.epsilon = 1e-12;
  opts.max_iterations = 50;
  const StateIndexer idx14{14, 0, true};

  const auto check_gradient = [&](const Network& net, const MeasurementSet& z,
                                  const EstimationResult& res) {
    const StateIndexer idx{net.n_buses(), net.slack_index(), true};
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(idx.columns());
    for (int i = 0; i < z.size(); ++i) {
      const double w = 1.0 / (z.rows[i].sigma * z.rows[i].sigma);
      grad += jacobian_row(net, res.state, z.rows[i].kind, idx).transpose() * w *
              res.residuals[i];
    }
    CHECK(grad.cwiseAbs().maxCoeff() < 1e-6);
  };

  {
    const Network net = oracles::three_bus_network();
    const auto z = simulate_measurements(net, net.reference_state(),
                                         MeasurementPlan::full_conventional(), NoiseSpec{}, 21);
    const auto res = wls_estimate(net, z, PolarState::flat(3, net.slack_index()), opts);
    REQUIRE(res.converged);
    check_gradient(net, z, res);
  }
  {
    const auto& c = fixtures::ieee14();
    const auto z = simulate_measurements(c.network, c.reference,
                                         MeasurementPlan::full_conventional(), NoiseSpec{}, 22);
    const auto res = wls_estimate(c.network, z,
                                  PolarState::flat(14, c.network.slack_index()), opts);
    REQUIRE(res.converged);
    check_gradient(c.network, z, res);
  }
}

TEST_CASE("result invariants: stored objective and residuals are recomputable") {
  const auto& c = fixtures::ieee14();
  const auto z = simulate_measurements(c.network, c.reference, MeasurementPlan::hybrid({4}),
                                       NoiseSpec{}, 6);
  const auto res = wls_estimate(c.network, z,
                                PolarState::flat(14, c.network.slack_index()));
  REQUIRE(res.converged);
  CHECK(res.max_step < 1e-6);
  double j = 0.0;
  for (int i = 0; i < z.size(); ++i) {
    const double r = res.residuals[i] / z.rows[i].sigma;
    j += r * r;
    CHECK(res.residuals[i] ==
          doctest::Approx(z.rows[i].value - evaluate_h(c.network, res.state, z.rows[i].kind))
              .epsilon(1e-12));
  }
  CHECK(res.objective == doctest::Approx(j).epsilon(1e-9));
}

TEST_CASE("linear PMU-only estimation") {
  const auto& c = fixtures::ieee14();
  const Network& net = c.network;

  SUBCASE("noiseless complete placement recovers the reference exactly in one solve") {
    const auto pmus = place_pmus_observable(net);
    const auto z = simulate_measurements(net, c.reference, MeasurementPlan::pmu_only(pmus),
                                         silent_noise(), 5);
    const auto res = linear_pmu_estimate(net, z);
    CHECK(res.iterations == 1);
    CHECK(res.converged);
    CHECK(max_state_diff(res.state, c.reference) < 1e-10);
  }

  SUBCASE("two-bus system: H rows carry the pi-model constants") {
    const auto tiny = parse_ieee_cdf(
        "TINY TEST CASE                 100.0\n"
        "BUS DATA FOLLOWS\n"
        "1 One 1 1 3 1.00 0.0 0 0 0 0 0 0.0 0 0 0 0 0\n"
        "2 Two 1 1 0 0.98 -3.0 0 0 0 0 0 0.0 0 0 0 0 0\n"
        "-999\n"
        "BRANCH DATA FOLLOWS\n"
        "1 2 1 1 1 0 0.01 0.1 0.02 0 0 0 0 0 0.0 0.0\n"
        "-999\n"
        "END OF DATA\n");
    const auto v = tiny.network.side_view(0, BranchSide::From);

    const auto e1 = rectangular_jacobian_row(
        tiny.network, MeasurementKind::at_bus(MeasurementType::VRealPmu, 0));
    const auto f1 = rectangular_jacobian_row(
        tiny.network, MeasurementKind::at_bus(MeasurementType::VImagPmu, 0));
    const auto c12 = rectangular_jacobian_row(
        tiny.network, MeasurementKind::at_branch(MeasurementType::IRealPmu, 0, BranchSide::From));
    const auto d12 = rectangular_jacobian_row(
        tiny.network, MeasurementKind::at_branch(MeasurementType::IImagPmu, 0, BranchSide::From));

    CHECK(e1 == Eigen::RowVector4d(1, 0, 0, 0));
    CHECK(f1 == Eigen::RowVector4d(0, 0, 1, 0));
    CHECK(c12[0] == doctest::Approx(v.g + v.gs));
    CHECK(c12[1] == doctest::Approx(-v.g));
    CHECK(c12[2] == doctest::Approx(-v.b - v.bs));
    CHECK(c12[3] == doctest::Approx(v.b));
    CHECK(d12[0] == doctest::Approx(v.b + v.bs));
    CHECK(d12[1] == doctest::Approx(-v.b));
    CHECK(d12[2] == doctest::Approx(v.g + v.gs));
    CHECK(d12[3] == doctest::Approx(-v.g));

    // That 4x4 system is observable from the single PMU.
    const auto rep = observability_rank(tiny.network, MeasurementPlan::pmu_only({0}));
    CHECK(rep.columns == 4);
    CHECK(rep.observable);
  }

  SUBCASE("linear and iterative solutions agree on the same rectangular set") {
    std::vector<int> all(net.n_buses());
    for (int b = 0; b < net.n_buses(); ++b) all[b] = b;
    const auto z =
        simulate_measurements(net, c.reference, MeasurementPlan::pmu_only(all), NoiseSpec{}, 77);

    const auto lin = linear_pmu_estimate(net, z);
    CHECK(lin.iterations == 1);

    SolverOptions opts;
    opts.epsilon = 1e-12;
    opts.max_iterations = 50;
    opts.pin_slack = false;  // PMU phasors carry the absolute reference
    const auto itr = wls_estimate(net, z, PolarState::flat(net.n_buses(), net.slack_index()), opts);
    REQUIRE(itr.converged);
    CHECK(max_state_diff(lin.state, itr.state) < 1e-8);
  }

  SUBCASE("insufficient coverage raises UnobservableError naming unreached buses") {
    const auto z = simulate_measurements(net, c.reference, MeasurementPlan::pmu_only({0}),
                                         NoiseSpec{}, 9);
    try {
      linear_pmu_estimate(net, z);
      FAIL("expected UnobservableError");
    } catch (const UnobservableError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("unreached") != std::string::npos);
      CHECK(msg.find(" 8") != std::string::npos);  // bus 8 hangs off bus 7 only
    }
  }

  SUBCASE("polar voltage rows are rejected until rectangularized") {
    MeasurementPlan polar_pmu;
    polar_pmu.conv_injections = polar_pmu.conv_flows = polar_pmu.conv_vmag = false;
    polar_pmu.pmu_buses = place_pmus_observable(net);
    const auto z = simulate_measurements(net, c.reference, polar_pmu, NoiseSpec{}, 8);
    CHECK_THROWS_AS(linear_pmu_estimate(net, z), DataError);
    const auto rect = rectangularize_pmu_voltages(net, z);
    CHECK(linear_pmu_estimate(net, rect).iterations == 1);
  }
}

TEST_CASE("observability rank") {
  const auto& c14 = fixtures::ieee14();
  SUBCASE("full conventional plan on the 14-bus system has rank 27") {
    const auto rep = observability_rank(c14.network, MeasurementPlan::full_conventional());
    CHECK(rep.rank == 27);
    CHECK(rep.columns == 27);
    CHECK(rep.observable);
  }
  SUBCASE("a single |V| measurement has rank 1") {
    const std::vector<MeasurementKind> kinds = {
        MeasurementKind::at_bus(MeasurementType::VMagnitude, 2)};
    const auto rep = observability_rank(c14.network, kinds, false);
    CHECK(rep.rank == 1);
    CHECK(!rep.observable);
  }
  SUBCASE("greedy PMU-only placement on the 30-bus system reaches rank 60") {
    const auto& c30 = fixtures::ieee30();
    const auto pmus = place_pmus_observable(c30.network);
    const auto rep = observability_rank(c30.network, MeasurementPlan::pmu_only(pmus));
    CHECK(rep.columns == 60);
    CHECK(rep.rank == 60);
    CHECK(rep.observable);
  }
}

TEST_CASE("unobservable conventional set fails loudly") {
  const auto& c = fixtures::ieee14();
  MeasurementSet z;
  Measurement m;
  m.kind = MeasurementKind::at_bus(MeasurementType::VMagnitude, 2);
  m.value = 1.0;
  m.sigma = 0.004;
  z.rows.push_back(m);
  CHECK_THROWS_AS(
      wls_estimate(c.network, z, PolarState::flat(14, c.network.slack_index())),
      UnobservableError);
}

TEST_CASE("estimation error scales linearly with the noise level") {
  const auto& c = fixtures::ieee14();
  const Network& net = c.network;
  const int trials = 200;
  std::vector<double> scales = {0.25, 0.5, 1.0};
  std::vector<double> rms(scales.size(), 0.0);

  for (std::size_t s = 0; s < scales.size(); ++s) {
    NoiseSpec noise;
    noise.conv_power *= scales[s];
    noise.conv_vmag *= scales[s];
    noise.pmu *= scales[s];
    noise.pmu_angle *= scales[s];
    double ss = 0.0;
    int n = 0;
    for (int t = 0; t < trials; ++t) {
      const auto z = simulate_measurements(net, c.reference, MeasurementPlan::full_conventional(),
                                           noise, 5000 + t);
      const auto res =
          wls_estimate(net, z, PolarState::flat(net.n_buses(), net.slack_index()));
      REQUIRE(res.converged);
      for (int b = 0; b < net.n_buses(); ++b) {
        ss += std::pow(res.state.v_mag[b] - c.reference.v_mag[b], 2);
        ss += std::pow(res.state.v_ang[b] - c.reference.v_ang[b], 2);
        n += 2;
      }
    }
    rms[s] = std::sqrt(ss / n);
  }

  // Least-squares slope of log(rms) against log(scale).
  double mx = 0.0, my = 0.0;
  for (std::size_t s = 0; s < scales.size(); ++s) {
    mx += std::log(scales[s]);
    my += std::log(rms[s]);
  }
  mx /= scales.size();
  my /= scales.size();
  double num = 0.0, den = 0.0;
  for (std::size_t s = 0; s < scales.size(); ++s) {
    num += (std::log(scales[s]) - mx) * (std::log(rms[s]) - my);
    den += std::pow(std::log(scales[s]) - mx, 2);
  }
  const double slope = num / den;
  CHECK(slope == doctest::Approx(1.0).epsilon(0.15));
}
