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

// Multi-cell slicing environment.
//
// Users of each slice random-walk over the cell graph; a periodic traffic mask
// decides how many of them are active. Offered traffic is turned into per-slice
// loads by a load-coupled interference model: the effective capacity of a slice
// shrinks with the total load of the neighboring cells,
//
//   C[k][n] = a[k][n] * B * se_max / (1 + alpha * sum_{j in nbr(k)} L[j]),
//   L[j]    = sum_n l[j][n],    l[k][n] = min(1, lambda[k][n] / C[k][n]),
//
// which is solved by fixed-point iteration starting from zero load.

#ifndef SLICERL_NETSIM_HPP_
#define SLICERL_NETSIM_HPP_

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace slicerl::netsim {

using Rng = std::mt19937_64;

struct Topology {
  int cell_count = 1;
  std::vector<std::vector<int>> neighbors;  // 0-based cell ids
  double bandwidth_hz = 20e6;
  double coupling = 0.0;                 // alpha
  double max_spectral_efficiency = 1.0;  // bit/s/Hz

  // ring: k +/- 1 (mod K); full: every other cell; grid: 4-neighborhood on a
  // row-major grid with `cols` columns (last row may be partial).
  static Topology ring(int cells);
  static Topology full(int cells);
  static Topology grid(int cells, int cols);

  // Throws ConfigError on asymmetric or self neighbor relations.
  void validate() const;
};

struct Slice {
  std::string name;
  double throughput_req_bps = 1.0;  // phi*
  double delay_req_s = 1e-3;        // d*
  double user_demand_bps = 1.0;     // per active user
};

// Piecewise-linear, periodic in `period` (no wrap when period <= 0). Values
// before the first or after the last breakpoint hold the nearest end value.
class TrafficMask {
 public:
  TrafficMask() = default;
  TrafficMask(std::vector<std::pair<double, double>> points, double period);

  double eval(double t) const;
  const std::vector<std::pair<double, double>>& points() const { return points_; }
  double period() const { return period_; }

  static TrafficMask constant(double value);

 private:
  std::vector<std::pair<double, double>> points_;
  double period_ = 0.0;
};

// Active user count per cell (rows) and slice (cols).
struct UserDistribution {
  Eigen::MatrixXi counts;
};

// Positions of every user in every slice group; the first m users of a group
// are the active ones.
struct Population {
  std::vector<std::vector<int>> cell_of;  // [slice][user]
};

// Rows are cells; column 0 is the headroom, column n (1..N) slice n.
struct Allocation {
  Eigen::MatrixXd share;

  int cells() const { return static_cast<int>(share.rows()); }
  int slices() const { return static_cast<int>(share.cols()) - 1; }

  // Every row in [0,1] and summing to one within `tol`.
  bool on_simplex(double tol = 1e-9) const;
  // Largest |1 - row sum| over cells.
  double max_budget_error() const;

  static Allocation uniform(int cells, int slices);
  static Allocation broadcast(int cells, const Eigen::VectorXd& per_cell);
};

struct LoadSolution {
  Eigen::MatrixXd load;      // K x N
  Eigen::MatrixXd capacity;  // K x N, bit/s at the returned loads
  int iterations = 0;
  bool converged = false;
};

struct FixedPointOptions {
  double tolerance = 1e-6;
  int max_iter = 1000;
};

struct NetState {
  Eigen::MatrixXd throughput;  // per-user average, bit/s
  Eigen::MatrixXd delay;       // s
  Eigen::MatrixXd load;        // [0,1]
  Eigen::MatrixXd served;      // slice throughput, bit/s
  Eigen::MatrixXi users;
  long step = 0;
  bool converged = true;

  static NetState idle(int cells, int slices, double delay_base_s);
};

struct KpiOptions {
  double delay_base_s = 0.5e-3;
  double load_cap = 0.99;
};

struct Scenario {
  Topology topology;
  std::vector<Slice> slices;
  std::vector<TrafficMask> masks;  // one per slice
  int group_size_max = 32;
  double p_stay = 0.8;
  KpiOptions kpi;
  FixedPointOptions fixed_point;
  std::uint64_t seed = 1;

  int cells() const { return topology.cell_count; }
  int slice_count() const { return static_cast<int>(slices.size()); }
  void validate() const;
};

double eval_mask(const TrafficMask& mask, double t);

// Advances every user one Markov step and counts the first
// round(group_size_max * mask_value[n]) users of slice n.
UserDistribution move_users(Rng& rng, const Topology& topology, Population& population,
                            double p_stay, int group_size_max,
                            const std::vector<double>& mask_values);

Eigen::MatrixXd offered_traffic(const UserDistribution& users, const std::vector<Slice>& slices);

LoadSolution solve_coupled_loads(const Topology& topology, const Allocation& allocation,
                                 const Eigen::MatrixXd& offered,
                                 const FixedPointOptions& options = {});

// Capacity at fixed loads (one evaluation of the interference map).
Eigen::MatrixXd effective_capacity(const Topology& topology, const Allocation& allocation,
                                   const Eigen::MatrixXd& load);

NetState compute_kpis(const LoadSolution& loads, const Eigen::MatrixXd& offered,
                      const UserDistribution& users, const KpiOptions& options);

class Environment {
 public:
  Environment(Scenario scenario, std::uint64_t seed);

  // Throws ConstraintViolation when `allocation` is off the simplex.
  NetState step(const Allocation& allocation);

  long time() const { return time_; }
  const Scenario& scenario() const { return scenario_; }
  const UserDistribution& users() const { return users_; }
  NetState initial_state() const;

 private:
  Scenario scenario_;
  Rng rng_;
  Population population_;
  UserDistribution users_;
  long time_ = 0;
};

}  // namespace slicerl::netsim

#endif  // SLICERL_NETSIM_HPP_
