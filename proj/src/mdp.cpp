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

#include "slicerl/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "slicerl/errors.hpp"

namespace slicerl::mdp {

Normalizers Normalizers::from_scenario(const netsim::Scenario& scenario) {
  Normalizers n;
  for (const auto& s : scenario.slices) n.throughput.push_back(s.throughput_req_bps);
  n.users = scenario.group_size_max;
  return n;
}

Eigen::VectorXd local_state(const NetState& net, int k, const Normalizers& norm) {
  const Eigen::Index slices = net.throughput.cols();
  if (static_cast<Eigen::Index>(norm.throughput.size()) != slices)
    throw DimensionError("normalizer count differs from slice count");
  Eigen::VectorXd s(3 * slices);
  for (Eigen::Index n = 0; n < slices; ++n) {
    s(n) = std::clamp(net.throughput(k, n) / norm.throughput[n], 0.0, 1.0);
    s(slices + n) = std::clamp(net.load(k, n), 0.0, 1.0);
    s(2 * slices + n) = std::clamp(net.users(k, n) / norm.users, 0.0, 1.0);
  }
  return s;
}

Eigen::VectorXd global_state(const NetState& net, const Normalizers& norm) {
  const Eigen::Index cells = net.throughput.rows(), per = 3 * net.throughput.cols();
  Eigen::VectorXd s(cells * per);
  for (Eigen::Index k = 0; k < cells; ++k)
    s.segment(k * per, per) = local_state(net, static_cast<int>(k), norm);
  return s;
}

Eigen::VectorXd extract_message(const NetState& net, const Topology& topology, int k) {
  const auto& nbr = topology.neighbors[k];
  Eigen::VectorXd c = Eigen::VectorXd::Zero(net.load.cols());
  if (nbr.empty()) return c;
  for (int i : nbr) c += net.load.row(i).transpose();
  return c / static_cast<double>(nbr.size());
}

RewardVariant parse_reward_variant(std::string_view s) {
  if (s == "plain") return RewardVariant::plain;
  if (s == "delay_aware") return RewardVariant::delay_aware;
  if (s == "penalized") return RewardVariant::penalized;
  throw ConfigError("unknown reward variant '" + std::string(s) + "'");
}

PenaltyForm parse_penalty_form(std::string_view s) {
  if (s == "absolute") return PenaltyForm::absolute;
  if (s == "signed") return PenaltyForm::signed_sum;
  throw ConfigError("unknown penalty form '" + std::string(s) + "'");
}

std::string_view to_string(RewardVariant v) {
  switch (v) {
    case RewardVariant::plain: return "plain";
    case RewardVariant::delay_aware: return "delay_aware";
    case RewardVariant::penalized: return "penalized";
  }
  return "?";
}

std::string_view to_string(PenaltyForm f) {
  return f == PenaltyForm::absolute ? "absolute" : "signed";
}

double reward_local(const NetState& net, const std::vector<Slice>& slices, int k,
                    RewardVariant variant) {
  double r = 1.0;
  for (size_t n = 0; n < slices.size(); ++n) {
    const auto col = static_cast<Eigen::Index>(n);
    if (net.users(k, col) == 0) continue;
    r = std::min(r, net.throughput(k, col) / slices[n].throughput_req_bps);
    if (variant != RewardVariant::plain)
      r = std::min(r, slices[n].delay_req_s / net.delay(k, col));
  }
  return std::max(r, 0.0);
}

double reward_global(const NetState& net, const std::vector<Slice>& slices,
                     RewardVariant variant) {
  double r = 1.0;
  for (Eigen::Index k = 0; k < net.throughput.rows(); ++k)
    r = std::min(r, reward_local(net, slices, static_cast<int>(k), variant));
  return r;
}

double budget_violation(const Eigen::MatrixXd& proposal, PenaltyAggregation aggregation,
                        PenaltyForm form) {
  if (proposal.rows() == 0) return 0.0;
  double worst = 0.0, total = 0.0;
  for (Eigen::Index k = 0; k < proposal.rows(); ++k) {
    double excess = proposal.row(k).sum() - 1.0;
    if (std::abs(excess) <= kBudgetTolerance) excess = 0.0;
    const double h = form == PenaltyForm::absolute ? std::abs(excess) : excess;
    worst = k == 0 ? h : std::max(worst, h);
    total += h;
  }
  return aggregation == PenaltyAggregation::max_over_cells
             ? worst
             : total / static_cast<double>(proposal.rows());
}

double reward_penalized(double raw_reward, const Eigen::MatrixXd& proposal, double beta,
                        PenaltyAggregation aggregation, PenaltyForm form) {
  if (!(beta >= 0)) throw ConfigError("penalty weight must be non-negative", "/agent/reward/beta");
  return raw_reward - beta * budget_violation(proposal, aggregation, form);
}

Allocation project_or_reject(const Eigen::MatrixXd& proposal) {
  if (!proposal.allFinite()) throw NumericError("non-finite action proposal");
  Allocation out{proposal};
  for (Eigen::Index k = 0; k < proposal.rows(); ++k) {
    auto row = out.share.row(k);
    if ((row.array() >= 0.0).all() && std::abs(row.sum() - 1.0) <= 1e-12) continue;
    row = row.cwiseMax(0.0);
    const double sum = row.sum();
    if (sum <= 0.0) row.setConstant(1.0 / static_cast<double>(row.size()));
    else row /= sum;
  }
  return out;
}

}  // namespace slicerl::mdp
