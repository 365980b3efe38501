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

// RL-facing view of the environment: observation vectors, neighbor-load
// messages, rewards and the action projection used by the penalty agents.

#ifndef SLICERL_MDP_HPP_
#define SLICERL_MDP_HPP_

#include <Eigen/Dense>

#include <string_view>
#include <vector>

#include "slicerl/netsim.hpp"

namespace slicerl::mdp {

using netsim::Allocation;
using netsim::NetState;
using netsim::Slice;
using netsim::Topology;

// Throughput is divided by `throughput[n]` (the requirement by default), user
// counts by `users`; every feature is clamped to [0,1].
struct Normalizers {
  std::vector<double> throughput;
  double users = 32.0;

  static Normalizers from_scenario(const netsim::Scenario& scenario);
};

// [phi_1..phi_N, l_1..l_N, u_1..u_N] of cell k, normalized. Length 3N.
Eigen::VectorXd local_state(const NetState& net, int k, const Normalizers& norm);
// Concatenation of all local states in cell order. Length 3NK.
Eigen::VectorXd global_state(const NetState& net, const Normalizers& norm);

// Per-slice mean load over the neighbors of k; zeros when k has none.
Eigen::VectorXd extract_message(const NetState& net, const Topology& topology, int k);

enum class RewardVariant { plain, delay_aware, penalized };
enum class PenaltyForm { absolute, signed_sum };
enum class PenaltyAggregation { max_over_cells, mean_over_cells };

RewardVariant parse_reward_variant(std::string_view s);
PenaltyForm parse_penalty_form(std::string_view s);
std::string_view to_string(RewardVariant v);
std::string_view to_string(PenaltyForm f);

struct RewardSpec {
  RewardVariant variant = RewardVariant::delay_aware;
  double beta = 1.2;
  PenaltyForm penalty_form = PenaltyForm::absolute;
};

// min over active slices of min{phi/phi*, d*/d, 1}; the delay term is dropped
// for the plain variant. Idle slices (u = 0) are skipped; an all-idle cell
// scores 1.
double reward_local(const NetState& net, const std::vector<Slice>& slices, int k,
                    RewardVariant variant = RewardVariant::delay_aware);
double reward_global(const NetState& net, const std::vector<Slice>& slices,
                     RewardVariant variant = RewardVariant::delay_aware);

// Per-cell budget error of a raw proposal (rows = cells, cols = N+1):
// |1 - sum| (absolute) or sum - 1 (signed), aggregated over cells. Rows within
// kBudgetTolerance of a unit sum count as exactly zero.
inline constexpr double kBudgetTolerance = 1e-9;
double budget_violation(const Eigen::MatrixXd& proposal, PenaltyAggregation aggregation,
                        PenaltyForm form = PenaltyForm::absolute);

double reward_penalized(double raw_reward, const Eigen::MatrixXd& proposal, double beta,
                        PenaltyAggregation aggregation,
                        PenaltyForm form = PenaltyForm::absolute);

// Clips negatives to zero and renormalizes each row onto the simplex. Rows
// already on the simplex are returned bit-for-bit; all-zero rows become
// uniform. Throws NumericError on non-finite input.
Allocation project_or_reject(const Eigen::MatrixXd& proposal);

}  // namespace slicerl::mdp

#endif  // SLICERL_MDP_HPP_
