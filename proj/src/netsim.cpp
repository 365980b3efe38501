// Copyright 2026 The slicerl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "slicerl/netsim.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "slicerl/errors.hpp"

namespace slicerl::netsim {

namespace {

void add_edge(std::vector<std::vector<int>>& nbr, int a, int b) {
  if (a == b) return;
  if (std::find(nbr[a].begin(), nbr[a].end(), b) == nbr[a].end()) nbr[a].push_back(b);
  if (std::find(nbr[b].begin(), nbr[b].end(), a) == nbr[b].end()) nbr[b].push_back(a);
}

Topology make_empty(int cells) {
  if (cells < 1) throw ConfigError("cell count must be positive", "/scenario/topology/cells");
  Topology t;
  t.cell_count = cells;
  t.neighbors.assign(static_cast<size_t>(cells), {});
  return t;
}

}  // namespace

Topology Topology::ring(int cells) {
  Topology t = make_empty(cells);
  for (int k = 0; k < cells; ++k) add_edge(t.neighbors, k, (k + 1) % cells);
  for (auto& n : t.neighbors) std::sort(n.begin(), n.end());
  return t;
}

Topology Topology::full(int cells) {
  Topology t = make_empty(cells);
  for (int a = 0; a < cells; ++a)
    for (int b = a + 1; b < cells; ++b) add_edge(t.neighbors, a, b);
  for (auto& n : t.neighbors) std::sort(n.begin(), n.end());
  return t;
}

Topology Topology::grid(int cells, int cols) {
  if (cols < 1) throw ConfigError("grid needs at least one column", "/scenario/topology/cols");
  Topology t = make_empty(cells);
  for (int k = 0; k < cells; ++k) {
    if (k % cols + 1 < cols && k + 1 < cells) add_edge(t.neighbors, k, k + 1);
    if (k + cols < cells) add_edge(t.neighbors, k, k + cols);
  }
  for (auto& n : t.neighbors) std::sort(n.begin(), n.end());
  return t;
}

void Topology::validate() const {
  if (cell_count < 1) throw ConfigError("cell count must be positive", "/scenario/topology/cells");
  if (static_cast<int>(neighbors.size()) != cell_count)
    throw ConfigError("neighbor table size differs from cell count", "/scenario/topology");
  for (int k = 0; k < cell_count; ++k) {
    for (int j : neighbors[k]) {
      if (j < 0 || j >= cell_count)
        throw ConfigError("neighbor index out of range", "/scenario/topology");
      if (j == k) throw ConfigError("cell lists itself as neighbor", "/scenario/topology");
      const auto& back = neighbors[j];
      if (std::find(back.begin(), back.end(), k) == back.end())
        throw ConfigError("neighbor relation is not symmetric", "/scenario/topology");
    }
  }
  if (!(bandwidth_hz > 0)) throw ConfigError("must be positive", "/scenario/bandwidth_hz");
  if (!(coupling >= 0)) throw ConfigError("must be non-negative", "/scenario/coupling");
  if (!(max_spectral_efficiency > 0))
    throw ConfigError("must be positive", "/scenario/max_spectral_efficiency");
}

TrafficMask::TrafficMask(std::vector<std::pair<double, double>> points, double period)
    : points_(std::move(points)), period_(period) {
  if (points_.empty()) throw ConfigError("traffic mask has no breakpoints");
  std::stable_sort(points_.begin(), points_.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [t, v] : points_) {
    if (!std::isfinite(t) || !(v >= 0.0 && v <= 1.0))
      throw ConfigError("traffic mask values must lie in [0,1]");
  }
}

TrafficMask TrafficMask::constant(double value) { return TrafficMask({{0.0, value}}, 0.0); }

double TrafficMask::eval(double t) const {
  if (points_.empty()) throw ConfigError("traffic mask has no breakpoints");
  if (period_ > 0) {
    t = std::fmod(t, period_);
    if (t < 0) t += period_;
  }
  if (t <= points_.front().first) return points_.front().second;
  if (t >= points_.back().first) return points_.back().second;
  auto hi = std::upper_bound(points_.begin(), points_.end(), t,
                             [](double x, const auto& p) { return x < p.first; });
  auto lo = hi - 1;
  const double span = hi->first - lo->first;
  if (span <= 0) return hi->second;
  const double w = (t - lo->first) / span;
  return lo->second + w * (hi->second - lo->second);
}

double eval_mask(const TrafficMask& mask, double t) { return mask.eval(t); }

bool Allocation::on_simplex(double tol) const {
  for (Eigen::Index k = 0; k < share.rows(); ++k) {
    double sum = 0.0;
    for (Eigen::Index n = 0; n < share.cols(); ++n) {
      const double v = share(k, n);
      if (!std::isfinite(v) || v < -tol || v > 1.0 + tol) return false;
      sum += v;
    }
    if (std::abs(sum - 1.0) > tol) return false;
  }
  return true;
}

double Allocation::max_budget_error() const {
  double worst = 0.0;
  for (Eigen::Index k = 0; k < share.rows(); ++k)
    worst = std::max(worst, std::abs(1.0 - share.row(k).sum()));
  return worst;
}

Allocation Allocation::uniform(int cells, int slices) {
  return {Eigen::MatrixXd::Constant(cells, slices + 1, 1.0 / (slices + 1))};
}

Allocation Allocation::broadcast(int cells, const Eigen::VectorXd& per_cell) {
  Allocation a{Eigen::MatrixXd(cells, per_cell.size())};
  for (int k = 0; k < cells; ++k) a.share.row(k) = per_cell.transpose();
  return a;
}

NetState NetState::idle(int cells, int slices, double delay_base_s) {
  NetState s;
  s.throughput = Eigen::MatrixXd::Zero(cells, slices);
  s.delay = Eigen::MatrixXd::Constant(cells, slices, delay_base_s);
  s.load = Eigen::MatrixXd::Zero(cells, slices);
  s.served = Eigen::MatrixXd::Zero(cells, slices);
  s.users = Eigen::MatrixXi::Zero(cells, slices);
  return s;
}

void Scenario::validate() const {
  topology.validate();
  if (slices.empty()) throw ConfigError("at least one slice required", "/scenario/slices");
  if (masks.size() != slices.size())
    throw ConfigError("one traffic mask per slice required", "/scenario/slices");
  for (size_t n = 0; n < slices.size(); ++n) {
    const auto& s = slices[n];
    const std::string at = "/scenario/slices/" + std::to_string(n);
    if (!(s.throughput_req_bps > 0)) throw ConfigError("must be positive", at + "/throughput_req_bps");
    if (!(s.delay_req_s > 0)) throw ConfigError("must be positive", at + "/delay_req_s");
    if (!(s.user_demand_bps > 0)) throw ConfigError("must be positive", at + "/user_demand_bps");
  }
  if (group_size_max < 1) throw ConfigError("must be positive", "/scenario/group_size_max");
  if (!(p_stay >= 0 && p_stay <= 1)) throw ConfigError("must lie in [0,1]", "/scenario/p_stay");
  if (!(kpi.delay_base_s > 0)) throw ConfigError("must be positive", "/scenario/delay_base_s");
  if (!(kpi.load_cap > 0 && kpi.load_cap < 1))
    throw ConfigError("must lie in (0,1)", "/scenario/load_cap");
  if (!(fixed_point.tolerance > 0))
    throw ConfigError("must be positive", "/scenario/fixed_point/tolerance");
  if (fixed_point.max_iter < 1)
    throw ConfigError("must be positive", "/scenario/fixed_point/max_iter");
}

UserDistribution move_users(Rng& rng, const Topology& topology, Population& population,
                            double p_stay, int group_size_max,
                            const std::vector<double>& mask_values) {
  const int cells = topology.cell_count;
  const int slices = static_cast<int>(mask_values.size());
  if (static_cast<int>(population.cell_of.size()) != slices) {
    population.cell_of.assign(static_cast<size_t>(slices), {});
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  UserDistribution out{Eigen::MatrixXi::Zero(cells, slices)};
  for (int n = 0; n < slices; ++n) {
    auto& where = population.cell_of[n];
    if (static_cast<int>(where.size()) != group_size_max) {
      std::uniform_int_distribution<int> any_cell(0, cells - 1);
      where.resize(static_cast<size_t>(group_size_max));
      for (int& c : where) c = any_cell(rng);
    }
    for (int& c : where) {
      const double u = unit(rng);
      const auto& nbr = topology.neighbors[c];
      if (u >= p_stay && !nbr.empty()) {
        // Reuse the tail of the draw: (u - p_stay) / (1 - p_stay) is uniform.
        const double v = (u - p_stay) / (1.0 - p_stay);
        const auto pick = std::min(static_cast<size_t>(v * nbr.size()), nbr.size() - 1);
        c = nbr[pick];
      }
    }
    const double tau = std::clamp(mask_values[n], 0.0, 1.0);
    const int active = static_cast<int>(std::lround(group_size_max * tau));
    for (int i = 0; i < active; ++i) ++out.counts(where[i], n);
  }
  return out;
}

Eigen::MatrixXd offered_traffic(const UserDistribution& users, const std::vector<Slice>& slices) {
  Eigen::MatrixXd lambda = users.counts.cast<double>();
  for (Eigen::Index n = 0; n < lambda.cols(); ++n) lambda.col(n) *= slices[n].user_demand_bps;
  return lambda;
}

Eigen::MatrixXd effective_capacity(const Topology& topology, const Allocation& allocation,
                                   const Eigen::MatrixXd& load) {
  const int cells = topology.cell_count;
  const Eigen::Index slices = load.cols();
  const Eigen::VectorXd total = load.rowwise().sum();
  const double peak = topology.bandwidth_hz * topology.max_spectral_efficiency;
  Eigen::MatrixXd cap(cells, slices);
  for (int k = 0; k < cells; ++k) {
    double interference = 0.0;
    for (int j : topology.neighbors[k]) interference += total(j);
    const double scale = peak / (1.0 + topology.coupling * interference);
    for (Eigen::Index n = 0; n < slices; ++n) cap(k, n) = allocation.share(k, n + 1) * scale;
  }
  return cap;
}

LoadSolution solve_coupled_loads(const Topology& topology, const Allocation& allocation,
                                 const Eigen::MatrixXd& offered,
                                 const FixedPointOptions& options) {
  const int cells = topology.cell_count;
  const Eigen::Index slices = offered.cols();
  if (allocation.cells() != cells || allocation.slices() != slices || offered.rows() != cells)
    throw DimensionError("solve_coupled_loads: shape mismatch");

  auto map = [&](const Eigen::MatrixXd& cap) {
    Eigen::MatrixXd next(cells, slices);
    for (int k = 0; k < cells; ++k) {
      for (Eigen::Index n = 0; n < slices; ++n) {
        const double lambda = offered(k, n);
        const double c = cap(k, n);
        if (lambda <= 0.0) next(k, n) = 0.0;
        else if (c <= 0.0) next(k, n) = 1.0;
        else next(k, n) = std::min(1.0, lambda / c);
      }
    }
    return next;
  };

  LoadSolution sol;
  sol.load = Eigen::MatrixXd::Zero(cells, slices);
  for (int it = 1; it <= options.max_iter; ++it) {
    Eigen::MatrixXd next = map(effective_capacity(topology, allocation, sol.load));
    const double diff = (next - sol.load).cwiseAbs().maxCoeff();
    sol.load = std::move(next);
    sol.iterations = it;
    if (diff < options.tolerance) {
      sol.converged = true;
      break;
    }
  }
  sol.capacity = effective_capacity(topology, allocation, sol.load);
  return sol;
}

NetState compute_kpis(const LoadSolution& loads, const Eigen::MatrixXd& offered,
                      const UserDistribution& users, const KpiOptions& options) {
  const Eigen::Index cells = offered.rows(), slices = offered.cols();
  NetState s = NetState::idle(static_cast<int>(cells), static_cast<int>(slices), options.delay_base_s);
  s.load = loads.load;
  s.users = users.counts;
  s.converged = loads.converged;
  for (Eigen::Index k = 0; k < cells; ++k) {
    for (Eigen::Index n = 0; n < slices; ++n) {
      const double served = std::min(offered(k, n), std::max(0.0, loads.capacity(k, n)));
      s.served(k, n) = served;
      const int u = users.counts(k, n);
      if (u == 0) continue;  // phi = 0, d = d_base
      s.throughput(k, n) = served / u;
      s.delay(k, n) = options.delay_base_s / (1.0 - std::min(loads.load(k, n), options.load_cap));
    }
  }
  return s;
}

Environment::Environment(Scenario scenario, std::uint64_t seed)
    : scenario_(std::move(scenario)) {
  scenario_.validate();
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(scenario_.seed),
                    static_cast<std::uint32_t>(scenario_.seed >> 32), 0x6e657473u};
  rng_.seed(seq);
  users_.counts = Eigen::MatrixXi::Zero(scenario_.cells(), scenario_.slice_count());
}

NetState Environment::initial_state() const {
  NetState s = NetState::idle(scenario_.cells(), scenario_.slice_count(), scenario_.kpi.delay_base_s);
  s.step = time_;
  return s;
}

NetState Environment::step(const Allocation& allocation) {
  if (allocation.cells() != scenario_.cells() || allocation.slices() != scenario_.slice_count())
    throw DimensionError("allocation shape does not match the scenario");
  if (!allocation.on_simplex(1e-9)) {
    std::ostringstream os;
    os << "allocation off the simplex (max budget error " << allocation.max_budget_error() << ")";
    throw ConstraintViolation(os.str());
  }
  std::vector<double> tau(scenario_.slices.size());
  for (size_t n = 0; n < tau.size(); ++n)
    tau[n] = scenario_.masks[n].eval(static_cast<double>(time_));

  users_ = move_users(rng_, scenario_.topology, population_, scenario_.p_stay,
                      scenario_.group_size_max, tau);
  const Eigen::MatrixXd lambda = offered_traffic(users_, scenario_.slices);
  const LoadSolution loads =
      solve_coupled_loads(scenario_.topology, allocation, lambda, scenario_.fixed_point);
  NetState s = compute_kpis(loads, lambda, users_, scenario_.kpi);
  s.step = time_;
  ++time_;
  return s;
}

}  // namespace slicerl::netsim
