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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits with
// the number of failed criteria.
//
//   acceptance <config_dir> <work_dir>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "slicerl/config.hpp"
#include "slicerl/harness.hpp"
#include "slicerl/netsim.hpp"
#include "slicerl/nn.hpp"
#include "slicerl/schemes.hpp"

namespace fs = std::filesystem;
using namespace slicerl;
using schemes::SchemeKind;

namespace {

constexpr double kSimplexTol = 1e-9;

struct Verdict {
  bool pass = false;
  std::string detail;
};

struct RunStats {
  harness::Summary summary;
  long violations = 0;  // executed rows off the simplex
  double seconds = 0.0;
};

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string fmt(double v, int precision = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

std::string list(const std::vector<double>& v, int precision = 3) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? " " : "") + fmt(v[i], precision);
  return out + "]";
}

long count_violations(const std::vector<harness::StepRecord>& records) {
  long bad = 0;
  for (const auto& r : records)
    for (Eigen::Index k = 0; k < r.action.rows(); ++k) {
      const auto row = r.action.row(k);
      if (!row.allFinite() || row.minCoeff() < -kSimplexTol || std::abs(row.sum() - 1.0) > kSimplexTol) ++bad;
    }
  return bad;
}

RunStats run(config::ExperimentConfig cfg, SchemeKind kind, std::uint64_t seed, const fs::path& out) {
  cfg.scheme.kind = kind;
  const auto t0 = std::chrono::steady_clock::now();
  harness::RunResult r = harness::run_experiment(cfg, seed, {out, false});
  RunStats s;
  s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  s.violations = count_violations(r.records);
  s.summary = std::move(r.summary);
  std::cerr << "  ran " << schemes::to_string(kind) << " seed " << seed << " in " << fmt(s.seconds, 1) << " s\n";
  return s;
}

// ---- criterion 2 -------------------------------------------------------

Verdict gradient_oracle() {
  std::mt19937_64 rng(20260601);
  std::uniform_int_distribution<int> width(2, 8), blocks(1, 3), bsize(2, 4), depth(1, 3);
  std::normal_distribution<double> g(0.0, 1.0);
  const double h = 1e-5;
  double worst = 0.0;
  long compared = 0;
  for (int net_i = 0; net_i < 100; ++net_i) {
    nn::MlpSpec spec;
    spec.hidden = net_i % 2 ? nn::Activation::tanh : nn::Activation::relu;
    spec.sizes.push_back(width(rng));
    for (int l = depth(rng); l > 0; --l) spec.sizes.push_back(width(rng));
    if (net_i % 4 < 2) {
      const int b = blocks(rng), s = bsize(rng);
      spec.sizes.push_back(b * s);
      spec.head = nn::OutputHead::softmax(s, b);
    } else {
      spec.sizes.push_back(width(rng));
    }
    nn::Mlp net = nn::Mlp::init(rng, spec);
    Eigen::VectorXd p = net.flat_params();
    for (Eigen::Index i = 0; i < p.size(); ++i) p(i) += 0.1 * g(rng);
    net.set_flat_params(p);
    Eigen::VectorXd x(net.input_dim()), c(net.output_dim());
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = g(rng);
    for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = g(rng);
    nn::ForwardCache cache;
    net.forward(x, &cache);
    const Eigen::VectorXd analytic = net.backward(cache, c).flatten();
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      nn::Mlp plus = net, minus = net;
      Eigen::VectorXd q = p;
      q(i) += h;
      plus.set_flat_params(q);
      q(i) -= 2 * h;
      minus.set_flat_params(q);
      const double fd = (c.dot(plus(x)) - c.dot(minus(x))) / (2 * h);
      // Below 1e-6 in magnitude the difference quotient is dominated by rounding.
      const double scale = std::max({std::abs(fd), std::abs(analytic(i)), 1e-6});
      worst = std::max(worst, std::abs(fd - analytic(i)) / scale);
      ++compared;
    }
  }
  return {worst < 1e-4, "100 nets, " + std::to_string(compared) + " parameters, max relative error " +
                            sci(worst) + " (threshold 1e-4)"};
}

// ---- criterion 3 -------------------------------------------------------

Verdict fixed_point_oracle() {
  using namespace netsim;
  Topology pair = Topology::ring(2);
  pair.bandwidth_hz = 20e6;
  pair.max_spectral_efficiency = 2;
  pair.coupling = 1.0;
  Allocation a{Eigen::MatrixXd(2, 2)};
  a.share << 0.5, 0.5, 0.5, 0.5;
  const auto sol = solve_coupled_loads(pair, a, Eigen::MatrixXd::Constant(2, 1, 5e6));
  const double err = std::max(std::abs(sol.load(0, 0) - 1.0 / 3), std::abs(sol.load(1, 0) - 1.0 / 3));

  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const FixedPointOptions tight{1e-13, 100000};
  int monotone = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int K = 2 + static_cast<int>(u(rng) * 4);
    const int N = 1 + static_cast<int>(u(rng) * 3);
    Topology t = u(rng) < 0.5 ? Topology::ring(K) : Topology::full(K);
    t.coupling = 1.5 * u(rng);
    t.max_spectral_efficiency = 1 + 9 * u(rng);
    Allocation alloc{Eigen::MatrixXd(K, N + 1)};
    for (int k = 0; k < K; ++k) {
      Eigen::VectorXd e(N + 1);
      for (int n = 0; n <= N; ++n) e(n) = -std::log(1 - u(rng));
      alloc.share.row(k) = (e / e.sum()).transpose();
    }
    Eigen::MatrixXd lambda(K, N);
    for (Eigen::Index i = 0; i < lambda.size(); ++i) lambda(i) = 40e6 * u(rng);
    Eigen::MatrixXd more = lambda;
    more(static_cast<Eigen::Index>(u(rng) * lambda.size())) += 20e6 * u(rng);
    const auto lo = solve_coupled_loads(t, alloc, lambda, tight);
    const auto hi = solve_coupled_loads(t, alloc, more, tight);
    monotone += (hi.load.array() >= lo.load.array() - 1e-9).all();
  }
  return {err < 1e-6 && monotone == 1000, "symmetric load error " + sci(err) +
                                              " (threshold 1e-6), monotone instances " +
                                              std::to_string(monotone) + "/1000"};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 3) {
    std::cerr << "usage: acceptance <config_dir> <work_dir>\n";
    return 64;
  }
  const fs::path config_dir = argv[1], work = argv[2];
  fs::remove_all(work);
  fs::create_directories(work);
  const auto start = std::chrono::steady_clock::now();

  const config::ExperimentConfig ref = config::load_config(config_dir / "reference.json");
  const config::ExperimentConfig toy = config::load_config(config_dir / "toy.json");

  std::cerr << "reference scenario " << config::scenario_hash(ref) << ", seeds " << ref.seeds.size() << "\n";
  std::map<SchemeKind, std::vector<RunStats>> pool;
  const std::vector<SchemeKind> kinds{SchemeKind::baseline, SchemeKind::dist, SchemeKind::dist_comm,
                                      SchemeKind::cen_soft, SchemeKind::cen_pen};
  for (SchemeKind kind : kinds)
    for (std::uint64_t seed : ref.seeds)
      pool[kind].push_back(run(ref, kind, seed,
                               work / std::string(schemes::to_string(kind)) / ("seed_" + std::to_string(seed))));
  const RunStats fixed = run(ref, SchemeKind::static_default, ref.seeds.front(), work / "static_default");

  auto collect = [&](SchemeKind kind, auto field) {
    std::vector<double> v;
    for (const auto& r : pool[kind]) v.push_back(field(r.summary));
    return v;
  };
  auto reward = [](const harness::Summary& s) { return s.mean_eval_reward; };
  auto efficiency = [](const harness::Summary& s) { return s.mean_efficiency; };

  std::vector<Verdict> verdicts(10);

  {  // 1
    long softmax_bad = 0, other_bad = fixed.violations;
    double slowest = fixed.seconds;
    for (const auto& [kind, runs] : pool)
      for (const auto& r : runs) {
        (kind == SchemeKind::cen_soft || kind == SchemeKind::dist || kind == SchemeKind::dist_comm ? softmax_bad
                                                                                                   : other_bad) +=
            r.violations;
        slowest = std::max(slowest, r.seconds);
      }
    verdicts[1] = {softmax_bad == 0 && other_bad == 0 && slowest < 300,
                   "violations: softmax schemes " + std::to_string(softmax_bad) +
                       ", baseline/static/cen_pen executed " + std::to_string(other_bad) + " over " +
                       std::to_string(pool.size() * ref.seeds.size() + 1) + " runs of " +
                       std::to_string(ref.phases.total()) + " steps; slowest run " + fmt(slowest, 1) +
                       " s (limit 300)"};
  }
  verdicts[2] = gradient_oracle();
  verdicts[3] = fixed_point_oracle();

  {  // 4
    const auto t0 = std::chrono::steady_clock::now();
    const harness::OracleResult oracle = harness::oracle_grid(toy, 0.01);
    std::vector<double> rewards;
    int good = 0;
    for (std::uint64_t seed : toy.seeds) {
      const RunStats r = run(toy, toy.scheme.kind, seed, work / "toy" / ("seed_" + std::to_string(seed)));
      rewards.push_back(r.summary.mean_eval_reward);
      good += r.summary.mean_eval_reward >= 0.95 * oracle.reward;
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    verdicts[4] = {good >= 4 && toy.seeds.size() >= 5 && secs < 600,
                   "r* " + fmt(oracle.reward) + " over " + std::to_string(oracle.evaluated) + " grid points; " +
                       std::string(schemes::to_string(toy.scheme.kind)) + " eval rewards " + list(rewards) +
                       ", " + std::to_string(good) + "/" + std::to_string(toy.seeds.size()) +
                       " seeds >= 0.95 r*; " + fmt(secs, 1) + " s (limit 600)"};
  }

  {  // 5
    const double eta_comm = median(collect(SchemeKind::dist_comm, efficiency));
    const double eta_base = median(collect(SchemeKind::baseline, efficiency));
    const double r_comm = median(collect(SchemeKind::dist_comm, reward));
    const double r_base = median(collect(SchemeKind::baseline, reward));
    verdicts[5] = {eta_comm >= 1.5 * eta_base && r_comm >= 0.9 * r_base,
                   "median eta dist_comm " + fmt(eta_comm) + " vs baseline " + fmt(eta_base) + " (ratio " +
                       fmt(eta_comm / eta_base, 3) + ", need >= 1.5); median reward " + fmt(r_comm) + " vs " +
                       fmt(r_base) + " (ratio " + fmt(r_comm / r_base, 3) + ", need >= 0.9)"};
  }

  {  // 6
    const auto comm = collect(SchemeKind::dist_comm, reward), dist = collect(SchemeKind::dist, reward);
    verdicts[6] = {median(comm) >= median(dist), "median eval reward dist_comm " + fmt(median(comm)) + " " +
                                                     list(comm) + " vs dist " + fmt(median(dist)) + " " + list(dist)};
  }

  {  // 7
    auto t90 = [&](const harness::Summary& s) {
      return static_cast<double>(s.steps_to_90.value_or(s.phases.train));
    };
    const auto soft = collect(SchemeKind::cen_soft, t90), pen = collect(SchemeKind::cen_pen, t90);
    const auto policy_pen =
        collect(SchemeKind::cen_pen, [](const harness::Summary& s) { return s.final_train_policy_penalty; });
    const auto noisy_pen =
        collect(SchemeKind::cen_pen, [](const harness::Summary& s) { return s.final_train_penalty; });
    verdicts[7] = {median(soft) <= median(pen) && median(policy_pen) < 0.05,
                   "median train steps to 90% cen_soft " + fmt(median(soft), 0) + " vs cen_pen " +
                       fmt(median(pen), 0) + "; cen_pen policy penalty (last 1000 train steps) median " +
                       fmt(median(policy_pen)) + " " + list(policy_pen) + " (need < 0.05); with exploration noise " +
                       list(noisy_pen)};
  }

  {  // 8
    std::string others;
    std::vector<double> comm;
    for (SchemeKind kind : {SchemeKind::dist_comm, SchemeKind::dist, SchemeKind::cen_soft, SchemeKind::cen_pen}) {
      std::vector<double> rho;
      for (const auto& r : pool[kind])
        rho.push_back(r.summary.slices.at(0).mask_correlation.value_or(std::nan("")));
      if (kind == SchemeKind::dist_comm) comm = rho;
      else others += " " + std::string(schemes::to_string(kind)) + " " + fmt(median(rho), 3);
    }
    const double m = median(comm);
    verdicts[8] = {m >= 0.5, "dist_comm eval correlation of " + ref.scenario.slices.at(0).name +
                                 " allocation with its mask: median " + fmt(m, 3) + " " + list(comm) +
                                 " (need >= 0.5); others:" + others};
  }

  {  // 9
    const fs::path a = work / "dist_comm" / ("seed_" + std::to_string(ref.seeds.front())) / "steps.csv";
    run(ref, SchemeKind::dist_comm, ref.seeds.front(), work / "determinism");
    auto slurp = [](const fs::path& p) {
      std::ifstream f(p, std::ios::binary);
      std::ostringstream ss;
      ss << f.rdbuf();
      return ss.str();
    };
    const std::string x = slurp(a), y = slurp(work / "determinism" / "steps.csv");
    verdicts[9] = {!x.empty() && x == y, "dist_comm seed " + std::to_string(ref.seeds.front()) + " steps.csv " +
                                             std::to_string(x.size()) + " bytes, rerun " +
                                             (x == y ? "byte-identical" : "differs")};
  }

  nlohmann::json results = nlohmann::json::array();
  int failed = 0;
  for (int c = 1; c <= 9; ++c) {
    std::cout << "criterion " << c << ": " << (verdicts[c].pass ? "PASS" : "FAIL") << "  " << verdicts[c].detail
              << "\n";
    failed += !verdicts[c].pass;
    results.push_back({{"criterion", c}, {"pass", verdicts[c].pass}, {"detail", verdicts[c].detail}});
  }
  std::ofstream(work / "acceptance.json") << results.dump(2) << "\n";
  const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::cout << "acceptance: " << 9 - failed << "/9 criteria passed in " << fmt(total, 0) << " s\n";
  return failed;
}
