#include "gridstate/estimator.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "gridstate/errors.hpp"

namespace gridstate {
namespace {

/// Whitened Jacobian (rows scaled by 1/sigma) of a measurement set at x.
Eigen::MatrixXd whitened_jacobian(const Network& net, const PolarState& x,
                                  const MeasurementSet& z, const StateIndexer& idx) {
  Eigen::MatrixXd h(z.size(), idx.columns());
  for (int i = 0; i < z.size(); ++i)
    h.row(i) = jacobian_row(net, x, z.rows[i].kind, idx) / z.rows[i].sigma;
  return h;
}

Eigen::VectorXd whitened_residual(const Network& net, const PolarState& x,
                                  const MeasurementSet& z) {
  Eigen::VectorXd r(z.size());
  for (int i = 0; i < z.size(); ++i)
    r[i] = (z.rows[i].value - evaluate_h(net, x, z.rows[i].kind)) / z.rows[i].sigma;
  return r;
}

int numerical_rank(const Eigen::MatrixXd& m, double tol) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(m);
  qr.setThreshold(tol);
  return static_cast<int>(qr.rank());
}

/// Solve G dx = rhs with G = H' H (H already whitened). LDLT with a pivot
/// ratio check so a rank-deficient gain matrix fails loudly.
Eigen::VectorXd solve_normal_equations(const Eigen::MatrixXd& h, const Eigen::VectorXd& r,
                                       double rank_tol, const std::string& context) {
  const Eigen::MatrixXd g = h.transpose() * h;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(g.selfadjointView<Eigen::Lower>());
  const auto d = ldlt.vectorD();
  const double dmax = d.maxCoeff();
  if (ldlt.info() != Eigen::Success || !(dmax > 0.0) ||
      d.minCoeff() < rank_tol * rank_tol * dmax) {
    throw UnobservableError(context);
  }
  return ldlt.solve(h.transpose() * r);
}

std::vector<double> raw_residuals(const Network& net, const PolarState& x,
                                  const MeasurementSet& z) {
  std::vector<double> r(z.rows.size());
  for (std::size_t i = 0; i < z.rows.size(); ++i)
    r[i] = z.rows[i].value - evaluate_h(net, x, z.rows[i].kind);
  return r;
}

}  // namespace

double objective(const Network& net, const PolarState& x, const MeasurementSet& z) {
  if (z.empty()) throw ConfigError("objective of an empty measurement set");
  double j = 0.0;
  for (const auto& m : z.rows) {
    const double r = (m.value - evaluate_h(net, x, m.kind)) / m.sigma;
    j += r * r;
  }
  return j;
}

EstimationResult wls_estimate(const Network& net, const MeasurementSet& z,
                              const PolarState& x0, const SolverOptions& opts) {
  if (z.empty()) throw ConfigError("cannot estimate from an empty measurement set");
  StateIndexer idx{net.n_buses(), net.slack_index(), opts.pin_slack};

  {
    const Eigen::MatrixXd h0 = whitened_jacobian(net, x0, z, idx);
    const int rank = numerical_rank(h0, opts.rank_tolerance);
    if (rank < idx.columns())
      throw UnobservableError("measurement set is unobservable: Jacobian rank " +
                              std::to_string(rank) + " < " + std::to_string(idx.columns()));
  }

  EstimationResult res;
  res.state = x0;
  for (int it = 0; it < opts.max_iterations; ++it) {
    const Eigen::MatrixXd h = whitened_jacobian(net, res.state, z, idx);
    const Eigen::VectorXd r = whitened_residual(net, res.state, z);
    const Eigen::VectorXd dx =
        solve_normal_equations(h, r, opts.rank_tolerance, "gain matrix is rank deficient");

    for (int b = 0; b < net.n_buses(); ++b) {
      const int ac = idx.angle_col(b);
      if (ac >= 0) res.state.v_ang[b] += dx[ac];
      res.state.v_mag[b] += dx[idx.mag_col(b)];
    }
    res.iterations = it + 1;
    res.max_step = dx.cwiseAbs().maxCoeff();
    res.objective_history.push_back(objective(net, res.state, z));
    if (res.max_step < opts.epsilon) {
      res.converged = true;
      break;
    }
  }

  res.objective = objective(net, res.state, z);
  res.residuals = raw_residuals(net, res.state, z);
  return res;
}

namespace {

int e_col(int bus) { return bus; }
int f_col(int n_buses, int bus) { return n_buses + bus; }

}  // namespace

Eigen::RowVectorXd rectangular_jacobian_row(const Network& net, const MeasurementKind& kind) {
  const int n = net.n_buses();
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(2 * n);
  switch (kind.type) {
    case MeasurementType::VRealPmu:
      row[e_col(kind.bus)] = 1.0;
      break;
    case MeasurementType::VImagPmu:
      row[f_col(n, kind.bus)] = 1.0;
      break;
    case MeasurementType::IRealPmu: {
      const auto v = net.side_view(kind.branch, kind.side);
      row[e_col(v.local)] = v.g + v.gs;
      row[e_col(v.remote)] = -v.g;
      row[f_col(n, v.local)] = -(v.b + v.bs);
      row[f_col(n, v.remote)] = v.b;
      break;
    }
    case MeasurementType::IImagPmu: {
      const auto v = net.side_view(kind.branch, kind.side);
      row[e_col(v.local)] = v.b + v.bs;
      row[e_col(v.remote)] = -v.b;
      row[f_col(n, v.local)] = v.g + v.gs;
      row[f_col(n, v.remote)] = -v.g;
      break;
    }
    default:
      throw DataError("not a rectangular PMU measurement: " + type_name(kind.type));
  }
  return row;
}

namespace {

std::string unreached_message(const Network& net, const MeasurementSet& z) {
  std::string msg = "PMU coverage is insufficient; unreached buses:";
  for (int b : pmu_unreached_buses(net, z)) msg += " " + std::to_string(net.bus(b).id);
  return msg;
}

}  // namespace

EstimationResult linear_pmu_estimate(const Network& net, const MeasurementSet& z,
                                     const SolverOptions& opts) {
  if (z.empty()) throw ConfigError("cannot estimate from an empty measurement set");
  if (!is_pmu_rectangular(z))
    throw DataError(
        "linear estimation needs a rectangular PMU-only set (E, F, C, D rows); "
        "convert voltage phasors with rectangularize_pmu_voltages first");

  const int n = net.n_buses();
  Eigen::MatrixXd h(z.size(), 2 * n);
  Eigen::VectorXd zv(z.size());
  for (int i = 0; i < z.size(); ++i) {
    h.row(i) = rectangular_jacobian_row(net, z.rows[i].kind) / z.rows[i].sigma;
    zv[i] = z.rows[i].value / z.rows[i].sigma;
  }

  if (numerical_rank(h, opts.rank_tolerance) < 2 * n)
    throw UnobservableError(unreached_message(net, z));

  const Eigen::VectorXd xr =
      solve_normal_equations(h, zv, opts.rank_tolerance, unreached_message(net, z));

  RectangularState rect;
  rect.e.assign(xr.data(), xr.data() + n);
  rect.f.assign(xr.data() + n, xr.data() + 2 * n);

  EstimationResult res;
  res.state = rect.to_polar(net.slack_index());
  res.iterations = 1;  // single calculation, no iteration
  res.converged = true;
  res.max_step = 0.0;
  res.objective = objective(net, res.state, z);
  res.objective_history.push_back(res.objective);
  res.residuals = raw_residuals(net, res.state, z);
  return res;
}

ObservabilityReport observability_rank(const Network& net, const MeasurementPlan& plan,
                                       double rank_tolerance) {
  const auto planned = expand_plan(net, plan, NoiseSpec{});
  std::vector<MeasurementKind> kinds;
  kinds.reserve(planned.size());
  for (const auto& p : planned) kinds.push_back(p.kind);
  return observability_rank(net, kinds, plan.pmu_rectangular && !plan.has_conventional(),
                            rank_tolerance);
}

ObservabilityReport observability_rank(const Network& net,
                                       const std::vector<MeasurementKind>& kinds,
                                       bool rectangular, double rank_tolerance) {
  ObservabilityReport rep;
  if (rectangular) {
    rep.columns = 2 * net.n_buses();
    Eigen::MatrixXd h(static_cast<int>(kinds.size()), rep.columns);
    for (std::size_t i = 0; i < kinds.size(); ++i)
      h.row(static_cast<int>(i)) = rectangular_jacobian_row(net, kinds[i]);
    rep.rank = numerical_rank(h, rank_tolerance);
  } else {
    StateIndexer idx{net.n_buses(), net.slack_index(), true};
    rep.columns = idx.columns();
    const PolarState flat = PolarState::flat(net.n_buses(), net.slack_index());
    Eigen::MatrixXd h(static_cast<int>(kinds.size()), rep.columns);
    for (std::size_t i = 0; i < kinds.size(); ++i)
      h.row(static_cast<int>(i)) = jacobian_row(net, flat, kinds[i], idx);
    rep.rank = numerical_rank(h, rank_tolerance);
  }
  rep.observable = rep.rank == rep.columns;
  return rep;
}

std::vector<int> pmu_unreached_buses(const Network& net, const MeasurementSet& z) {
  std::set<int> reached;
  for (const auto& m : z.rows) {
    switch (m.kind.type) {
      case MeasurementType::VRealPmu:
      case MeasurementType::VImagPmu:
      case MeasurementType::VAnglePmu:
        reached.insert(m.kind.bus);
        break;
      case MeasurementType::IRealPmu:
      case MeasurementType::IImagPmu: {
        // A measured branch current plus the local phasor determines the
        // far-end phasor, so both terminals count as reached.
        const auto v = net.side_view(m.kind.branch, m.kind.side);
        reached.insert(v.local);
        reached.insert(v.remote);
        break;
      }
      default:
        break;
    }
  }
  std::vector<int> out;
  for (int b = 0; b < net.n_buses(); ++b)
    if (!reached.count(b)) out.push_back(b);
  return out;
}

}  // namespace gridstate
