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

#include "slicerl/schemes.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include "slicerl/errors.hpp"

namespace slicerl::schemes {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

bool is_centralized(SchemeKind k) { return k == SchemeKind::cen_pen || k == SchemeKind::cen_soft; }

Eigen::VectorXd default_static(int slices) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(slices + 1);
  if (slices == 2) {
    v << 0.0, 0.8, 0.2;
  } else {
    v.tail(slices).setConstant(1.0 / slices);
  }
  return v;
}

}  // namespace

SchemeKind parse_scheme_kind(std::string_view s) {
  if (s == "cen_pen") return SchemeKind::cen_pen;
  if (s == "cen_soft") return SchemeKind::cen_soft;
  if (s == "dist") return SchemeKind::dist;
  if (s == "dist_comm") return SchemeKind::dist_comm;
  if (s == "baseline") return SchemeKind::baseline;
  if (s == "static_default") return SchemeKind::static_default;
  throw ConfigError("unknown scheme '" + std::string(s) + "'", "/scheme/kind");
}

std::string_view to_string(SchemeKind k) {
  switch (k) {
    case SchemeKind::cen_pen: return "cen_pen";
    case SchemeKind::cen_soft: return "cen_soft";
    case SchemeKind::dist: return "dist";
    case SchemeKind::dist_comm: return "dist_comm";
    case SchemeKind::baseline: return "baseline";
    case SchemeKind::static_default: return "static_default";
  }
  return "?";
}

bool is_learning(SchemeKind k) {
  return k != SchemeKind::baseline && k != SchemeKind::static_default;
}

Eigen::VectorXd baseline_allocation(const netsim::UserDistribution& users, int k) {
  const int n = static_cast<int>(users.counts.cols());
  Eigen::VectorXd a = Eigen::VectorXd::Zero(n + 1);
  const double total = users.counts.row(k).cast<double>().sum();
  if (total <= 0) {
    a.tail(n).setConstant(1.0 / n);
  } else {
    for (int j = 0; j < n; ++j) a(j + 1) = users.counts(k, j) / total;
  }
  return a;
}

Controller::Controller(SchemeConfig config, const netsim::Scenario& scenario, std::uint64_t seed)
    : config_(std::move(config)), scenario_(scenario),
      norm_(config_.normalizers ? *config_.normalizers : mdp::Normalizers::from_scenario(scenario)) {
  scenario_.validate();
  if (static_cast<int>(norm_.throughput.size()) != scenario_.slice_count() || !(norm_.users > 0))
    throw ConfigError("normalizers must list one positive throughput per slice",
                      "/scenario/normalizers");
  for (double v : norm_.throughput)
    if (!(v > 0)) throw ConfigError("throughput normalizers must be positive", "/scenario/normalizers");
  const int K = scenario_.cells();
  const int N = scenario_.slice_count();
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    0x5c4e3e5u};
  rng_.seed(seq);

  if (config_.kind == SchemeKind::static_default) {
    if (config_.static_default.size() == 0) config_.static_default = default_static(N);
    if (config_.static_default.size() != N + 1)
      throw ConfigError("static allocation needs " + std::to_string(N + 1) + " entries",
                        "/scheme/static_allocation");
    netsim::Allocation check = netsim::Allocation::broadcast(1, config_.static_default);
    if (!check.on_simplex())
      throw ConfigError("static allocation must be non-negative and sum to one",
                        "/scheme/static_allocation");
  }
  if (!is_learning(config_.kind)) return;

  td3::AgentSpec spec;
  spec.block_size = N + 1;
  spec.activation = config_.activation;
  spec.hp = config_.hp;
  spec.mode = config_.kind == SchemeKind::cen_pen ? td3::ConstraintMode::penalty
                                                  : td3::ConstraintMode::softmax_embedded;
  int agents = 1;
  if (is_centralized(config_.kind)) {
    spec.state_dim = 3 * N * K;
    spec.block_count = K;
    spec.actor_hidden = {96, 64, 48};
    spec.critic_hidden = {120, 64, 32};
  } else {
    spec.state_dim = config_.kind == SchemeKind::dist_comm ? 4 * N : 3 * N;
    spec.block_count = 1;
    spec.actor_hidden = {48, 24};
    spec.critic_hidden = {64, 24};
    agents = K;
  }
  if (!config_.actor_hidden.empty()) spec.actor_hidden = config_.actor_hidden;
  if (!config_.critic_hidden.empty()) spec.critic_hidden = config_.critic_hidden;

  agents_.reserve(agents);
  buffers_.reserve(agents);
  for (int i = 0; i < agents; ++i) {
    const std::uint64_t agent_seed =
        splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(config_.shared_init ? 0 : i) + 1));
    agents_.emplace_back(spec, agent_seed);
    buffers_.emplace_back(config_.hp.replay_capacity);
  }
}

int Controller::state_dim() const { return agents_.empty() ? 0 : agents_[0].spec().state_dim; }
int Controller::action_dim() const { return agents_.empty() ? 0 : agents_[0].spec().action_dim(); }

std::size_t Controller::parameter_count() const {
  std::size_t n = 0;
  for (const auto& a : agents_) n += a.parameter_count();
  return n;
}

bool Controller::penalized() const {
  return config_.kind == SchemeKind::cen_pen ||
         config_.reward.variant == mdp::RewardVariant::penalized;
}

Eigen::VectorXd Controller::observe(const netsim::NetState& net, int agent) const {
  switch (config_.kind) {
    case SchemeKind::cen_pen:
    case SchemeKind::cen_soft:
      return mdp::global_state(net, norm_);
    case SchemeKind::dist:
      return mdp::local_state(net, agent, norm_);
    case SchemeKind::dist_comm: {
      const Eigen::VectorXd local = mdp::local_state(net, agent, norm_);
      const Eigen::VectorXd msg = mdp::extract_message(net, scenario_.topology, agent);
      Eigen::VectorXd out(local.size() + msg.size());
      out << local, msg;
      return out;
    }
    default:
      return Eigen::VectorXd();
  }
}

Decision Controller::act(const netsim::NetState& net, td3::ActMode mode, double epsilon) {
  const int K = scenario_.cells();
  const int N = scenario_.slice_count();
  Decision d;
  d.proposal.resize(K, N + 1);

  if (config_.kind == SchemeKind::baseline) {
    netsim::UserDistribution users{net.users};
    for (int k = 0; k < K; ++k) d.proposal.row(k) = baseline_allocation(users, k).transpose();
    d.executed = netsim::Allocation{d.proposal};
    return d;
  }
  if (config_.kind == SchemeKind::static_default) {
    d.executed = netsim::Allocation::broadcast(K, config_.static_default);
    d.proposal = d.executed.share;
    return d;
  }

  std::uniform_real_distribution<double> coin(0.0, 1.0);
  Eigen::MatrixXd executed(K, N + 1);
  double violation = 0.0;
  for (int i = 0; i < agent_count(); ++i) {
    td3::Agent& agent = agents_[i];
    Eigen::VectorXd obs = observe(net, i);
    td3::ActMode m = mode;
    if (mode == td3::ActMode::train_noisy && epsilon > 0 && coin(rng_) < epsilon)
      m = td3::ActMode::explore_random;
    td3::ActionSample s = agent.select_action(obs, m);
    if (agent.spec().mode == td3::ConstraintMode::penalty)
      violation += td3::block_budget_violation(agent.policy(obs), agent.spec().block_size);
    const int first = is_centralized(config_.kind) ? 0 : i;
    for (int b = 0; b < agent.spec().block_count; ++b) {
      d.proposal.row(first + b) = s.proposal.segment(b * (N + 1), N + 1).transpose();
      executed.row(first + b) = s.executed.segment(b * (N + 1), N + 1).transpose();
    }
    d.observations.push_back(std::move(obs));
    d.agent_proposals.push_back(std::move(s.proposal));
    d.agent_executed.push_back(std::move(s.executed));
  }
  d.policy_violation = agent_count() > 0 ? violation / agent_count() : 0.0;
  d.executed = netsim::Allocation{executed};
  return d;
}

LearnOutcome Controller::learn(const Decision& decision, const netsim::NetState& next, bool train,
                               long train_step) {
  LearnOutcome out;
  if (!is_learning(config_.kind)) return out;
  if (decision.observations.size() != agents_.size())
    throw DimensionError("decision does not match the controller's agents");

  const mdp::RewardVariant base = config_.reward.variant == mdp::RewardVariant::plain
                                      ? mdp::RewardVariant::plain
                                      : mdp::RewardVariant::delay_aware;
  double sums_loss = 0, sums_td = 0, sums_obj = 0;
  int trained = 0, actor_updates = 0;
  for (int i = 0; i < agent_count(); ++i) {
    double r;
    if (is_centralized(config_.kind)) {
      r = mdp::reward_global(next, scenario_.slices, base);
      if (penalized())
        r = mdp::reward_penalized(r, decision.proposal, config_.reward.beta,
                                  mdp::PenaltyAggregation::mean_over_cells,
                                  config_.reward.penalty_form);
    } else {
      r = mdp::reward_local(next, scenario_.slices, i, base);
      if (penalized())
        r = mdp::reward_penalized(r, decision.proposal.row(i), config_.reward.beta,
                                  mdp::PenaltyAggregation::max_over_cells,
                                  config_.reward.penalty_form);
    }
    out.stored_rewards.push_back(r);
    buffers_[i].push(td3::Experience{decision.observations[i], decision.agent_executed[i],
                                     decision.agent_proposals[i], r, observe(next, i)});
    if (!train) continue;
    td3::Diagnostics dg = agents_[i].train_step(buffers_[i], train_step);
    if (!dg.trained) continue;
    ++trained;
    sums_loss += dg.critic_loss;
    sums_td += dg.td_error;
    if (dg.actor_updated) {
      ++actor_updates;
      sums_obj += dg.actor_objective;
    }
  }
  if (trained > 0) {
    out.diagnostics.trained = true;
    out.diagnostics.critic_loss = sums_loss / trained;
    out.diagnostics.td_error = sums_td / trained;
  }
  if (actor_updates > 0) {
    out.diagnostics.actor_updated = true;
    out.diagnostics.actor_objective = sums_obj / actor_updates;
  }
  return out;
}

void Controller::save_checkpoints(const std::filesystem::path& dir) const {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create checkpoint directory " + dir.string() + ": " + ec.message());
  for (int i = 0; i < agent_count(); ++i) {
    const auto path = dir / ("agent_" + std::to_string(i) + ".json");
    std::ofstream f(path);
    if (!f) throw IoError("cannot write " + path.string());
    f << agents_[i].checkpoint().dump() << '\n';
    if (!f) throw IoError("write failed for " + path.string());
  }
}

}  // namespace slicerl::schemes
