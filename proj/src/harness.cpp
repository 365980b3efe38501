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

#include "slicerl/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "slicerl/errors.hpp"
#include "slicerl/mdp.hpp"
#include "slicerl/schemes.hpp"

namespace slicerl::harness {

namespace {

using nlohmann::json;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double mean(const std::vector<double>& v) {
  if (v.empty()) return kNaN;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double median(std::vector<double> v) {
  v.erase(std::remove_if(v.begin(), v.end(), [](double x) { return std::isnan(x); }), v.end());
  if (v.empty()) return kNaN;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_from(const json& v) { return v.is_null() ? kNaN : v.get<double>(); }

std::vector<double> mask_values(const netsim::Scenario& sc, long t) {
  std::vector<double> out;
  for (const auto& m : sc.masks) out.push_back(netsim::eval_mask(m, static_cast<double>(t)));
  return out;
}

Eigen::MatrixXd policy_matrix(const schemes::Controller& c, const schemes::Decision& d, int K, int N) {
  // Deterministic actor output reassembled into K x (N+1).
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(K, N + 1);
  int row = 0;
  for (int i = 0; i < c.agent_count(); ++i) {
    const Eigen::VectorXd p = c.agent(i).policy(d.observations[i]);
    for (int b = 0; b < c.agent(i).spec().block_count; ++b, ++row)
      out.row(row) = p.segment(b * (N + 1), N + 1).transpose();
  }
  return out;
}

}  // namespace

std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::explore: return "explore";
    case Phase::train: return "train";
    case Phase::eval: return "eval";
  }
  return "?";
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double resource_efficiency(const netsim::NetState& net, const netsim::Allocation& allocation,
                           const netsim::Topology& topology, int k) {
  const Eigen::Index N = net.served.cols();
  if (N == 0) return 0.0;
  double sum = 0.0;
  for (Eigen::Index n = 0; n < N; ++n) {
    const double a = allocation.share(k, n + 1);
    if (a > 0) sum += net.served(k, n) / (a * topology.bandwidth_hz);
  }
  return sum / static_cast<double>(N);
}

std::vector<std::pair<double, double>> survival_function(const std::vector<double>& samples,
                                                         const std::vector<double>& grid) {
  if (samples.empty()) throw std::invalid_argument("survival function needs at least one sample");
  std::vector<double> sorted(samples);
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::pair<double, double>> out;
  out.reserve(grid.size());
  for (double x : grid) {
    const auto above = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), x);
    out.emplace_back(x, static_cast<double>(above) / static_cast<double>(sorted.size()));
  }
  return out;
}

std::optional<double> mask_correlation(const std::vector<double>& trace,
                                       const std::vector<double>& mask) {
  if (trace.size() != mask.size() || trace.size() < 2) return std::nullopt;
  auto constant = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
  };
  if (constant(trace) || constant(mask)) return std::nullopt;
  const double mx = mean(trace), my = mean(mask);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const double dx = trace[i] - mx, dy = mask[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (!(sxx > 0) || !(syy > 0)) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> smooth(const std::vector<double>& values, std::size_t window) {
  if (window == 0) window = 1;
  std::vector<double> out(values.size());
  // Summed per window; a running sum drifts over long traces.
  for (std::size_t i = 0; i < values.size(); ++i) {
    const std::size_t first = i + 1 >= window ? i + 1 - window : 0;
    double sum = 0.0;
    for (std::size_t j = first; j <= i; ++j) sum += values[j];
    out[i] = sum / static_cast<double>(i + 1 - first);
  }
  return out;
}

std::optional<long> steps_to_fraction_of_final(const std::vector<double>& values,
                                               std::size_t window, double fraction) {
  if (values.empty()) return std::nullopt;
  const std::vector<double> s = smooth(values, window);
  const double final_value = s.back();
  const double threshold =
      final_value >= 0 ? fraction * final_value : final_value - (1.0 - fraction) * std::abs(final_value);
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s[i] >= threshold) return static_cast<long>(i);
  return static_cast<long>(s.size() - 1);
}

Summary summarize(const config::ExperimentConfig& cfg, std::uint64_t seed,
                  const std::vector<StepRecord>& records, std::size_t parameter_count) {
  const netsim::Scenario& sc = cfg.scenario;
  const int K = sc.cells(), N = sc.slice_count();
  Summary s;
  s.scheme = std::string(schemes::to_string(cfg.scheme.kind));
  s.seed = seed;
  s.scenario_hash = config::scenario_hash(cfg);
  s.phases = cfg.phases;
  s.steps = static_cast<long>(records.size());
  s.parameter_count = parameter_count;

  std::vector<double> reward, reward_pen, eff, headroom, penalty, train_pen, train_policy_pen,
      train_reward;
  std::vector<double> ratio_sum(N, 0.0), delay_sum(N, 0.0);
  std::vector<long> active(N, 0);
  std::vector<std::vector<double>> alloc_trace(N), mask_trace(N);
  for (const StepRecord& r : records) {
    if (!r.converged) ++s.nonconverged_steps;
    if (r.phase == Phase::train) {
      train_reward.push_back(r.training_reward);
      train_pen.push_back(r.penalty);
      train_policy_pen.push_back(r.policy_penalty);
    }
    if (r.phase != Phase::eval) continue;
    reward.push_back(r.reward);
    reward_pen.push_back(r.reward_penalized);
    eff.push_back(r.efficiency.mean());
    headroom.push_back(r.action.col(0).mean());
    penalty.push_back(r.penalty);
    for (int n = 0; n < N; ++n) {
      for (int k = 0; k < K; ++k) {
        if (r.users(k, n) <= 0) continue;
        ratio_sum[n] += r.throughput(k, n) / sc.slices[n].throughput_req_bps;
        delay_sum[n] += r.delay(k, n);
        ++active[n];
      }
      alloc_trace[n].push_back(r.action.col(n + 1).mean());
      mask_trace[n].push_back(r.mask(n));
    }
  }
  s.mean_eval_reward = mean(reward);
  s.mean_eval_reward_penalized = mean(reward_pen);
  s.mean_efficiency = mean(eff);
  s.mean_eval_headroom = mean(headroom);
  s.mean_eval_penalty = mean(penalty);
  const std::size_t tail = std::min<std::size_t>(1000, train_pen.size());
  s.final_train_penalty = mean(std::vector<double>(train_pen.end() - tail, train_pen.end()));
  s.final_train_policy_penalty =
      mean(std::vector<double>(train_policy_pen.end() - tail, train_policy_pen.end()));
  s.steps_to_90 = steps_to_fraction_of_final(train_reward);
  for (int n = 0; n < N; ++n) {
    SliceSummary sl;
    sl.name = sc.slices[n].name;
    sl.throughput_ratio = active[n] ? ratio_sum[n] / active[n] : kNaN;
    sl.mean_delay_s = active[n] ? delay_sum[n] / active[n] : kNaN;
    sl.mask_correlation = mask_correlation(alloc_trace[n], mask_trace[n]);
    s.slices.push_back(sl);
  }
  return s;
}

RunResult run_experiment(const config::ExperimentConfig& cfg, std::uint64_t seed,
                         const RunOptions& options) {
  const netsim::Scenario& sc = cfg.scenario;
  const int K = sc.cells(), N = sc.slice_count();
  netsim::Environment env(sc, seed);
  schemes::Controller controller(cfg.scheme, sc, seed);
  const bool penalty_agent = controller.agent_count() > 0 &&
                             controller.agent(0).spec().mode == td3::ConstraintMode::penalty;
  const double beta = cfg.scheme.reward.beta;
  const auto form = cfg.scheme.reward.penalty_form;
  const auto base_variant = cfg.scheme.reward.variant == mdp::RewardVariant::plain
                                ? mdp::RewardVariant::plain
                                : mdp::RewardVariant::delay_aware;

  const long total = cfg.phases.total();
  const long anneal = cfg.phases.explore + cfg.phases.train;
  RunResult result;
  result.records.reserve(static_cast<std::size_t>(total));
  netsim::NetState state = env.initial_state();
  for (long t = 0; t < total; ++t) {
    Phase phase = t < cfg.phases.explore ? Phase::explore
                  : t < anneal           ? Phase::train
                                         : Phase::eval;
    double epsilon = 0.0;
    if (phase != Phase::eval && anneal > 0)
      epsilon = cfg.exploration.epsilon_start +
                (cfg.exploration.epsilon_end - cfg.exploration.epsilon_start) *
                    static_cast<double>(t) / static_cast<double>(anneal);
    const td3::ActMode mode = phase == Phase::explore ? td3::ActMode::explore_random
                              : phase == Phase::train ? td3::ActMode::train_noisy
                                                      : td3::ActMode::eval;
    schemes::Decision decision = controller.act(state, mode, phase == Phase::train ? epsilon : 0.0);
    const std::vector<double> masks = mask_values(sc, env.time());
    netsim::NetState next = env.step(decision.executed);

    StepRecord rec;
    rec.t = t;
    rec.phase = phase;
    rec.epsilon = epsilon;
    rec.reward = mdp::reward_global(next, sc.slices, base_variant);
    const double h = mdp::budget_violation(decision.proposal, mdp::PenaltyAggregation::mean_over_cells, form);
    rec.penalty = beta * h;
    rec.reward_penalized = rec.reward - rec.penalty;
    rec.policy_penalty =
        penalty_agent ? beta * mdp::budget_violation(policy_matrix(controller, decision, K, N),
                                                     mdp::PenaltyAggregation::mean_over_cells, form)
                      : 0.0;
    rec.converged = next.converged;
    rec.throughput = next.throughput;
    rec.delay = next.delay;
    rec.load = next.load;
    rec.users = next.users;
    rec.action = decision.executed.share;
    rec.efficiency.resize(K);
    for (int k = 0; k < K; ++k) rec.efficiency(k) = resource_efficiency(next, decision.executed, sc.topology, k);
    rec.mask = Eigen::Map<const Eigen::VectorXd>(masks.data(), N);

    schemes::LearnOutcome learned;
    if (phase != Phase::eval)
      learned = controller.learn(decision, next, phase == Phase::train, t - cfg.phases.explore);
    rec.training_reward = learned.stored_rewards.empty() ? rec.reward : mean(learned.stored_rewards);
    rec.critic_loss = learned.diagnostics.critic_loss;
    rec.actor_objective = learned.diagnostics.actor_objective;
    rec.td_error = learned.diagnostics.td_error;
    result.records.push_back(std::move(rec));
    state = std::move(next);
  }
  result.summary = summarize(cfg, seed, result.records, controller.parameter_count());

  if (options.out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(*options.out_dir, ec);
    if (ec) throw IoError("cannot create " + options.out_dir->string() + ": " + ec.message());
    write_csv(*options.out_dir / "steps.csv", result.records);
    const auto summary_path = *options.out_dir / "summary.json";
    std::ofstream f(summary_path);
    if (!f) throw IoError("cannot write " + summary_path.string());
    f << to_json(result.summary).dump(2) << '\n';
    if (!f) throw IoError("write failed for " + summary_path.string());
    if (options.checkpoints && controller.agent_count() > 0)
      controller.save_checkpoints(*options.out_dir / "checkpoints");
  }
  return result;
}

std::string csv_header(int cells, int slices) {
  std::string h = "t,phase,epsilon,reward,reward_penalized,training_reward,penalty,policy_penalty,converged";
  auto kn = [](const char* name, int k, int n) {
    return std::string(",") + name + "_" + std::to_string(k) + "_" + std::to_string(n);
  };
  for (const char* name : {"throughput", "delay", "load", "users"})
    for (int k = 0; k < cells; ++k)
      for (int n = 1; n <= slices; ++n) h += kn(name, k, n);
  for (int k = 0; k < cells; ++k)
    for (int n = 0; n <= slices; ++n) h += kn("action", k, n);
  for (int k = 0; k < cells; ++k) h += ",efficiency_" + std::to_string(k);
  for (int n = 1; n <= slices; ++n) h += ",mask_" + std::to_string(n);
  h += ",critic_loss,actor_objective,td_error";
  return h;
}

std::string csv_row(const StepRecord& r) {
  std::string s = std::to_string(r.t);
  s.reserve(1024);
  auto add = [&s](double v) {
    s += ',';
    s += format_double(v);
  };
  s += ',';
  s += to_string(r.phase);
  add(r.epsilon);
  add(r.reward);
  add(r.reward_penalized);
  add(r.training_reward);
  add(r.penalty);
  add(r.policy_penalty);
  s += r.converged ? ",1" : ",0";
  for (const Eigen::MatrixXd* m : {&r.throughput, &r.delay, &r.load})
    for (Eigen::Index k = 0; k < m->rows(); ++k)
      for (Eigen::Index n = 0; n < m->cols(); ++n) add((*m)(k, n));
  for (Eigen::Index k = 0; k < r.users.rows(); ++k)
    for (Eigen::Index n = 0; n < r.users.cols(); ++n) s += "," + std::to_string(r.users(k, n));
  for (Eigen::Index k = 0; k < r.action.rows(); ++k)
    for (Eigen::Index n = 0; n < r.action.cols(); ++n) add(r.action(k, n));
  for (Eigen::Index k = 0; k < r.efficiency.size(); ++k) add(r.efficiency(k));
  for (Eigen::Index n = 0; n < r.mask.size(); ++n) add(r.mask(n));
  add(r.critic_loss);
  add(r.actor_objective);
  add(r.td_error);
  return s;
}

void write_csv(const std::filesystem::path& path, const std::vector<StepRecord>& records) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  const int K = records.empty() ? 0 : static_cast<int>(records.front().action.rows());
  const int N = records.empty() ? 0 : static_cast<int>(records.front().action.cols()) - 1;
  f << csv_header(K, N) << '\n';
  for (const auto& r : records) f << csv_row(r) << '\n';
  if (!f) throw IoError("write failed for " + path.string());
}

std::vector<StepRecord> read_csv(const std::filesystem::path& path, int K, int N) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(f, line) || line != csv_header(K, N))
    throw IoError(path.string() + ": header does not match a " + std::to_string(K) + "-cell, " +
                  std::to_string(N) + "-slice scenario");
  std::vector<StepRecord> out;
  long lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    std::vector<std::string_view> fields;
    std::string_view rest(line);
    for (;;) {
      const auto p = rest.find(',');
      fields.push_back(rest.substr(0, p));
      if (p == std::string_view::npos) break;
      rest.remove_prefix(p + 1);
    }
    std::size_t i = 0;
    auto fail = [&] { throw IoError(path.string() + ":" + std::to_string(lineno) + ": malformed row"); };
    auto next = [&]() -> std::string_view {
      if (i >= fields.size()) fail();
      return fields[i++];
    };
    auto num = [&]() {
      const std::string_view v = next();
      if (v == "nan") return kNaN;
      if (v == "inf") return std::numeric_limits<double>::infinity();
      if (v == "-inf") return -std::numeric_limits<double>::infinity();
      double x = 0;
      auto res = std::from_chars(v.data(), v.data() + v.size(), x);
      if (res.ec != std::errc() || res.ptr != v.data() + v.size()) fail();
      return x;
    };
    auto integer = [&]() {
      const std::string_view v = next();
      long x = 0;
      auto res = std::from_chars(v.data(), v.data() + v.size(), x);
      if (res.ec != std::errc() || res.ptr != v.data() + v.size()) fail();
      return x;
    };
    StepRecord r;
    r.t = integer();
    const std::string_view ph = next();
    if (ph == "explore") r.phase = Phase::explore;
    else if (ph == "train") r.phase = Phase::train;
    else if (ph == "eval") r.phase = Phase::eval;
    else fail();
    r.epsilon = num();
    r.reward = num();
    r.reward_penalized = num();
    r.training_reward = num();
    r.penalty = num();
    r.policy_penalty = num();
    r.converged = integer() != 0;
    for (Eigen::MatrixXd* m : {&r.throughput, &r.delay, &r.load}) {
      m->resize(K, N);
      for (int k = 0; k < K; ++k)
        for (int n = 0; n < N; ++n) (*m)(k, n) = num();
    }
    r.users.resize(K, N);
    for (int k = 0; k < K; ++k)
      for (int n = 0; n < N; ++n) r.users(k, n) = static_cast<int>(integer());
    r.action.resize(K, N + 1);
    for (int k = 0; k < K; ++k)
      for (int n = 0; n <= N; ++n) r.action(k, n) = num();
    r.efficiency.resize(K);
    for (int k = 0; k < K; ++k) r.efficiency(k) = num();
    r.mask.resize(N);
    for (int n = 0; n < N; ++n) r.mask(n) = num();
    r.critic_loss = num();
    r.actor_objective = num();
    r.td_error = num();
    if (i != fields.size()) fail();
    out.push_back(std::move(r));
  }
  return out;
}

json to_json(const Summary& s) {
  json slices = json::array();
  for (const auto& sl : s.slices)
    slices.push_back({{"name", sl.name},
                      {"throughput_ratio", number_or_null(sl.throughput_ratio)},
                      {"mean_delay_s", number_or_null(sl.mean_delay_s)},
                      {"mask_correlation", sl.mask_correlation ? json(*sl.mask_correlation) : json(nullptr)}});
  return {{"format", "slicerl.summary"},
          {"version", 1},
          {"scheme", s.scheme},
          {"seed", s.seed},
          {"scenario_hash", s.scenario_hash},
          {"phases", {{"explore", s.phases.explore}, {"train", s.phases.train}, {"eval", s.phases.eval}}},
          {"steps", s.steps},
          {"mean_eval_reward", number_or_null(s.mean_eval_reward)},
          {"mean_eval_reward_penalized", number_or_null(s.mean_eval_reward_penalized)},
          {"mean_efficiency", number_or_null(s.mean_efficiency)},
          {"mean_eval_headroom", number_or_null(s.mean_eval_headroom)},
          {"mean_eval_penalty", number_or_null(s.mean_eval_penalty)},
          {"final_train_penalty", number_or_null(s.final_train_penalty)},
          {"final_train_policy_penalty", number_or_null(s.final_train_policy_penalty)},
          {"steps_to_90", s.steps_to_90 ? json(*s.steps_to_90) : json(nullptr)},
          {"nonconverged_steps", s.nonconverged_steps},
          {"parameter_count", s.parameter_count},
          {"slices", slices},
          {"steps_csv", "steps.csv"}};
}

Summary summary_from_json(const json& doc) {
  try {
    if (doc.value("format", "") != "slicerl.summary" || doc.value("version", 0) != 1)
      throw IoError("not a version-1 run summary");
    Summary s;
    s.scheme = doc.at("scheme").get<std::string>();
    s.seed = doc.at("seed").get<std::uint64_t>();
    s.scenario_hash = doc.at("scenario_hash").get<std::string>();
    s.phases.explore = doc.at("phases").at("explore").get<long>();
    s.phases.train = doc.at("phases").at("train").get<long>();
    s.phases.eval = doc.at("phases").at("eval").get<long>();
    s.steps = doc.at("steps").get<long>();
    s.mean_eval_reward = number_from(doc.at("mean_eval_reward"));
    s.mean_eval_reward_penalized = number_from(doc.at("mean_eval_reward_penalized"));
    s.mean_efficiency = number_from(doc.at("mean_efficiency"));
    s.mean_eval_headroom = number_from(doc.at("mean_eval_headroom"));
    s.mean_eval_penalty = number_from(doc.at("mean_eval_penalty"));
    s.final_train_penalty = number_from(doc.at("final_train_penalty"));
    s.final_train_policy_penalty = number_from(doc.at("final_train_policy_penalty"));
    if (!doc.at("steps_to_90").is_null()) s.steps_to_90 = doc.at("steps_to_90").get<long>();
    s.nonconverged_steps = doc.at("nonconverged_steps").get<long>();
    s.parameter_count = doc.at("parameter_count").get<std::size_t>();
    for (const auto& e : doc.at("slices")) {
      SliceSummary sl;
      sl.name = e.at("name").get<std::string>();
      sl.throughput_ratio = number_from(e.at("throughput_ratio"));
      sl.mean_delay_s = number_from(e.at("mean_delay_s"));
      if (!e.at("mask_correlation").is_null()) sl.mask_correlation = e.at("mask_correlation").get<double>();
      s.slices.push_back(sl);
    }
    return s;
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed run summary: ") + e.what());
  }
}

Comparison compare_runs(const std::vector<Summary>& summaries,
                        const std::vector<std::vector<double>>& reward_traces) {
  if (summaries.empty()) throw std::invalid_argument("nothing to compare");
  for (const auto& s : summaries)
    if (s.scenario_hash != summaries.front().scenario_hash)
      throw ConfigError("runs come from different scenarios (" + summaries.front().scenario_hash +
                        " vs " + s.scenario_hash + ")");
  if (!reward_traces.empty() && reward_traces.size() != summaries.size())
    throw std::invalid_argument("one reward trace per summary required");

  std::vector<std::string> order;
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < summaries.size(); ++i) {
    auto [it, inserted] = groups.try_emplace(summaries[i].scheme);
    if (inserted) order.push_back(summaries[i].scheme);
    it->second.push_back(i);
  }

  json table = json::array(), curves = json::object(), survival = json::object();
  std::vector<double> grid;
  for (int i = 0; i <= 100; ++i) grid.push_back(i / 100.0);
  for (const std::string& scheme : order) {
    const auto& idx = groups[scheme];
    auto collect = [&](const std::function<double(const Summary&)>& f) {
      std::vector<double> v;
      for (std::size_t i : idx) v.push_back(f(summaries[i]));
      return v;
    };
    const std::vector<double> rewards = collect([](const Summary& s) { return s.mean_eval_reward; });
    json seeds = json::array();
    for (std::size_t i : idx) seeds.push_back(summaries[i].seed);
    json slices = json::array();
    const std::size_t nslices = summaries[idx.front()].slices.size();
    for (std::size_t n = 0; n < nslices; ++n) {
      auto pick = [&](auto field) {
        return median(collect([&](const Summary& s) { return n < s.slices.size() ? field(s.slices[n]) : kNaN; }));
      };
      slices.push_back(
          {{"name", summaries[idx.front()].slices[n].name},
           {"throughput_ratio", number_or_null(pick([](const SliceSummary& x) { return x.throughput_ratio; }))},
           {"mean_delay_s", number_or_null(pick([](const SliceSummary& x) { return x.mean_delay_s; }))},
           {"mask_correlation", number_or_null(pick([](const SliceSummary& x) {
              return x.mask_correlation ? *x.mask_correlation : kNaN;
            }))}});
    }
    const auto [lo, hi] = std::minmax_element(rewards.begin(), rewards.end());
    table.push_back(
        {{"scheme", scheme},
         {"runs", idx.size()},
         {"seeds", seeds},
         {"median_eval_reward", number_or_null(median(rewards))},
         {"reward_spread", number_or_null(*hi - *lo)},
         {"median_efficiency", number_or_null(median(collect([](const Summary& s) { return s.mean_efficiency; })))},
         {"median_headroom", number_or_null(median(collect([](const Summary& s) { return s.mean_eval_headroom; })))},
         {"median_final_train_penalty",
          number_or_null(median(collect([](const Summary& s) { return s.final_train_penalty; })))},
         {"median_steps_to_90", number_or_null(median(collect([](const Summary& s) {
            return s.steps_to_90 ? static_cast<double>(*s.steps_to_90) : kNaN;
          })))},
         {"parameter_count", summaries[idx.front()].parameter_count},
         {"slices", slices}});

    if (reward_traces.empty()) continue;
    std::vector<std::vector<double>> smoothed;
    std::vector<double> eval_rewards;
    for (std::size_t i : idx) {
      const auto& trace = reward_traces[i];
      if (trace.empty()) continue;
      smoothed.push_back(smooth(trace, 100));
      const long eval = std::min<long>(summaries[i].phases.eval, static_cast<long>(trace.size()));
      eval_rewards.insert(eval_rewards.end(), trace.end() - eval, trace.end());
    }
    if (smoothed.empty()) continue;
    std::size_t len = smoothed.front().size();
    for (const auto& c : smoothed) len = std::min(len, c.size());
    json curve = json::array();
    for (std::size_t t = 0; t < len; ++t) {
      std::vector<double> at;
      for (const auto& c : smoothed) at.push_back(c[t]);
      curve.push_back(median(at));
    }
    curves[scheme] = curve;
    if (!eval_rewards.empty()) {
      json sf = json::array();
      for (const auto& [x, p] : survival_function(eval_rewards, grid)) sf.push_back({x, p});
      survival[scheme] = sf;
    }
  }
  Comparison c;
  c.report = {{"scenario_hash", summaries.front().scenario_hash},
              {"table", table},
              {"curves", {{"window", 100}, {"median_smoothed_reward", curves}}},
              {"survival", {{"metric", "eval_reward"}, {"series", survival}}}};
  return c;
}

Comparison compare_files(const std::vector<std::filesystem::path>& paths) {
  std::vector<Summary> summaries;
  std::vector<std::vector<double>> traces;
  for (const auto& p : paths) {
    std::ifstream f(p);
    if (!f) throw IoError("cannot open " + p.string());
    json doc;
    try {
      doc = json::parse(f);
    } catch (const json::exception& e) {
      throw IoError(p.string() + ": " + e.what());
    }
    summaries.push_back(summary_from_json(doc));
    std::vector<double> trace;
    const auto csv = p.parent_path() / doc.value("steps_csv", "steps.csv");
    std::ifstream c(csv);
    if (c) {
      std::string line;
      std::getline(c, line);
      while (std::getline(c, line)) {
        // reward is the fourth column
        std::size_t pos = 0;
        for (int i = 0; i < 3; ++i) pos = line.find(',', pos) + 1;
        const std::size_t end = line.find(',', pos);
        double v = kNaN;
        std::from_chars(line.data() + pos, line.data() + end, v);
        trace.push_back(v);
      }
    }
    traces.push_back(std::move(trace));
  }
  return compare_runs(summaries, traces);
}

OracleResult oracle_grid(const config::ExperimentConfig& cfg, double step) {
  if (!(step > 0 && step <= 1)) throw ConfigError("grid step must lie in (0,1]", "step");
  const long m = std::lround(1.0 / step);
  if (std::abs(static_cast<double>(m) * step - 1.0) > 1e-9)
    throw ConfigError("grid step must divide 1", "step");
  const int N = cfg.scenario.slice_count();
  const int K = cfg.scenario.cells();
  const auto variant = cfg.scheme.reward.variant == mdp::RewardVariant::plain ? mdp::RewardVariant::plain
                                                                              : mdp::RewardVariant::delay_aware;
  OracleResult best;
  best.reward = -std::numeric_limits<double>::infinity();
  std::vector<long> parts(N + 1, 0);
  const std::uint64_t seed = cfg.seeds.front();
  // Enumerate compositions of m into N+1 non-negative parts.
  std::function<void(int, long)> visit = [&](int idx, long remaining) {
    if (idx == N) {
      parts[N] = remaining;
      Eigen::VectorXd a(N + 1);
      for (int i = 0; i <= N; ++i) a(i) = static_cast<double>(parts[i]) / static_cast<double>(m);
      netsim::Environment env(cfg.scenario, seed);
      const netsim::NetState s = env.step(netsim::Allocation::broadcast(K, a));
      const double r = mdp::reward_global(s, cfg.scenario.slices, variant);
      ++best.evaluated;
      if (r > best.reward) {
        best.reward = r;
        best.allocation = a;
      }
      return;
    }
    for (long v = 0; v <= remaining; ++v) {
      parts[idx] = v;
      visit(idx + 1, remaining - v);
    }
  };
  visit(0, m);
  return best;
}

}  // namespace slicerl::harness
