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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "slicerl/errors.hpp"
#include "slicerl/netsim.hpp"

using namespace slicerl;
using namespace slicerl::netsim;

TEST_CASE("traffic mask interpolation and periodicity") {
  TrafficMask m({{0, 0.2}, {100, 1.0}}, 0);
  CHECK(eval_mask(m, 0) == doctest::Approx(0.2));
  CHECK(eval_mask(m, 50) == doctest::Approx(0.6));
  CHECK(eval_mask(m, 500) == doctest::Approx(1.0));
  TrafficMask p({{0, 0.2}, {100, 1.0}}, 200);
  CHECK(eval_mask(p, 250) == doctest::Approx(0.6));
  CHECK(eval_mask(p, 150) == doctest::Approx(1.0));
}

TEST_CASE("traffic mask rejects bad breakpoints") {
  CHECK_THROWS_AS(TrafficMask({}, 0), ConfigError);
  CHECK_THROWS_AS(TrafficMask({{0, 1.5}}, 0), ConfigError);
  CHECK_THROWS_AS(TrafficMask({{0, -0.1}}, 0), ConfigError);
}

TEST_CASE("topology factories and validation") {
  Topology r = Topology::ring(3);
  CHECK(r.neighbors[0] == std::vector<int>{1, 2});
  r.validate();
  Topology f = Topology::full(4);
  CHECK(f.neighbors[2].size() == 3);
  f.validate();
  Topology g = Topology::grid(6, 3);
  g.validate();
  CHECK(g.neighbors[0].size() == 2);
  CHECK(g.neighbors[4].size() == 3);
  CHECK(Topology::ring(1).neighbors[0].empty());
  CHECK(Topology::ring(2).neighbors[0] == std::vector<int>{1});

  Topology bad = Topology::ring(3);
  bad.neighbors[0] = {1};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = Topology::ring(3);
  bad.neighbors[0].push_back(0);
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("move_users conserves active counts") {
  Topology t = Topology::ring(3);
  Rng rng(7);
  Population pop;
  for (double tau : {0.0, 0.3, 1.0}) {
    UserDistribution u = move_users(rng, t, pop, 0.8, 32, {tau, 1.0 - tau});
    CHECK(u.counts.col(0).sum() == std::lround(32 * tau));
    CHECK(u.counts.col(1).sum() == std::lround(32 * (1.0 - tau)));
    CHECK(u.counts.minCoeff() >= 0);
  }
  Population single;
  UserDistribution one = move_users(rng, Topology::ring(1), single, 0.8, 32, {1.0, 0.0});
  CHECK(one.counts(0, 0) == 32);
  CHECK(one.counts(0, 1) == 0);
}

TEST_CASE("move_users is deterministic under a fixed seed") {
  Topology t = Topology::ring(4);
  Rng a(11), b(11);
  Population pa, pb;
  for (int i = 0; i < 50; ++i) {
    auto ua = move_users(a, t, pa, 0.8, 32, {0.5, 0.7});
    auto ub = move_users(b, t, pb, 0.8, 32, {0.5, 0.7});
    REQUIRE(ua.counts == ub.counts);
  }
}

TEST_CASE("offered traffic is users times per-user demand") {
  UserDistribution u{Eigen::MatrixXi(1, 2)};
  u.counts << 10, 0;
  std::vector<Slice> slices{{"a", 5e6, 1e-3, 5e6}, {"b", 3e6, 1e-3, 3e6}};
  Eigen::MatrixXd l = offered_traffic(u, slices);
  CHECK(l(0, 0) == doctest::Approx(50e6));
  CHECK(l(0, 1) == 0.0);
  u.counts *= 2;
  CHECK(offered_traffic(u, slices)(0, 0) == doctest::Approx(100e6));
}

TEST_CASE("single cell load has the closed form") {
  Topology t = Topology::ring(1);
  t.bandwidth_hz = 20e6;
  t.max_spectral_efficiency = 2;
  Allocation a{Eigen::MatrixXd(1, 2)};
  a.share << 0.5, 0.5;
  Eigen::MatrixXd lambda(1, 1);
  lambda << 10e6;
  auto sol = solve_coupled_loads(t, a, lambda);
  CHECK(sol.converged);
  CHECK(sol.load(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  lambda.setZero();
  CHECK(solve_coupled_loads(t, a, lambda).load(0, 0) == 0.0);
}

TEST_CASE("zero allocation with traffic saturates the load") {
  Topology t = Topology::ring(1);
  Allocation a{Eigen::MatrixXd(1, 3)};
  a.share << 0.5, 0.5, 0.0;
  Eigen::MatrixXd lambda(1, 2);
  lambda << 1e6, 1e6;
  auto sol = solve_coupled_loads(t, a, lambda);
  CHECK(sol.load(0, 1) == 1.0);
}

// Plain iteration of l <- 0.25 (1 + l) written out independently.
static double symmetric_oracle(int iterations) {
  double l = 0.0;
  for (int i = 0; i < iterations; ++i) {
    const double cap = 0.5 * 20e6 * 2.0 / (1.0 + 1.0 * l);
    l = std::min(1.0, 5e6 / cap);
  }
  return l;
}

TEST_CASE("two symmetric coupled cells converge to one third") {
  Topology t = Topology::ring(2);
  t.bandwidth_hz = 20e6;
  t.max_spectral_efficiency = 2;
  t.coupling = 1.0;
  Allocation a{Eigen::MatrixXd(2, 2)};
  a.share << 0.5, 0.5, 0.5, 0.5;
  Eigen::MatrixXd lambda = Eigen::MatrixXd::Constant(2, 1, 5e6);
  auto sol = solve_coupled_loads(t, a, lambda);
  CHECK(sol.converged);
  CHECK(std::abs(sol.load(0, 0) - 1.0 / 3.0) < 1e-6);
  CHECK(std::abs(sol.load(1, 0) - 1.0 / 3.0) < 1e-6);
  CHECK(std::abs(symmetric_oracle(10000) - 1.0 / 3.0) < 1e-12);
  CHECK(std::abs(sol.load(0, 0) - symmetric_oracle(10000)) < 1e-6);
}

TEST_CASE("fixed-point iterates rise monotonically and stay bounded") {
  Scenario sc = fixtures::two_slice_scenario(3, 0.8, 3.0);
  Allocation a{Eigen::MatrixXd(3, 3)};
  a.share << 0.1, 0.5, 0.4, 0.2, 0.3, 0.5, 0.0, 0.6, 0.4;
  Eigen::MatrixXd lambda(3, 2);
  lambda << 20e6, 10e6, 15e6, 12e6, 5e6, 30e6;
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(3, 2);
  double prev_diff = INFINITY;
  for (int it = 0; it < 200; ++it) {
    Eigen::MatrixXd cap = effective_capacity(sc.topology, a, l);
    Eigen::MatrixXd next = (lambda.array() / cap.array()).min(1.0).matrix();
    CHECK((next.array() >= l.array() - 1e-15).all());
    CHECK(next.maxCoeff() <= 1.0);
    const double diff = (next - l).cwiseAbs().maxCoeff();
    CHECK(diff <= prev_diff + 1e-15);
    prev_diff = diff;
    l = next;
  }
}

TEST_CASE("non-convergence is flagged, not fatal") {
  Scenario sc = fixtures::two_slice_scenario(3, 1.0, 2.0);
  Allocation a = Allocation::uniform(3, 2);
  Eigen::MatrixXd lambda = Eigen::MatrixXd::Constant(3, 2, 4e6);
  FixedPointOptions opts{1e-15, 2};
  auto sol = solve_coupled_loads(sc.topology, a, lambda, opts);
  CHECK_FALSE(sol.converged);
  CHECK(sol.iterations == 2);
  CHECK(sol.load.maxCoeff() <= 1.0);
}

TEST_CASE("loads are monotone in offered traffic") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  FixedPointOptions tight{1e-13, 100000};
  for (int trial = 0; trial < 200; ++trial) {
    const int K = 2 + static_cast<int>(u01(rng) * 3);
    Topology t = Topology::ring(K);
    t.coupling = u01(rng);
    t.max_spectral_efficiency = 1 + 5 * u01(rng);
    Allocation a{Eigen::MatrixXd(K, 3)};
    for (int k = 0; k < K; ++k) {
      Eigen::Vector3d e(-std::log(1 - u01(rng)), -std::log(1 - u01(rng)), -std::log(1 - u01(rng)));
      a.share.row(k) = (e / e.sum()).transpose();
    }
    Eigen::MatrixXd lambda(K, 2);
    for (int i = 0; i < lambda.size(); ++i) lambda(i) = 40e6 * u01(rng);
    const auto base = solve_coupled_loads(t, a, lambda, tight);
    Eigen::MatrixXd more = lambda;
    more(static_cast<int>(u01(rng) * lambda.size())) += 10e6 * u01(rng);
    const auto bumped = solve_coupled_loads(t, a, more, tight);
    CHECK((bumped.load.array() >= base.load.array() - 1e-9).all());
  }
}

TEST_CASE("KPIs follow the congestion model") {
  LoadSolution ls;
  ls.load = Eigen::MatrixXd(1, 2);
  ls.load << 0.5, 0.0;
  ls.capacity = Eigen::MatrixXd(1, 2);
  ls.capacity << 20e6, 10e6;
  Eigen::MatrixXd lambda(1, 2);
  lambda << 10e6, 0.0;
  UserDistribution u{Eigen::MatrixXi(1, 2)};
  u.counts << 4, 0;
  NetState s = compute_kpis(ls, lambda, u, KpiOptions{});
  CHECK(s.delay(0, 0) == doctest::Approx(1e-3));
  CHECK(s.delay(0, 1) == doctest::Approx(0.5e-3));
  CHECK(s.throughput(0, 0) * 4 == doctest::Approx(10e6));
  CHECK(s.throughput(0, 1) == 0.0);
  CHECK(s.served(0, 0) == doctest::Approx(10e6));

  ls.load << 1.0, 0.0;
  ls.capacity << 5e6, 10e6;
  s = compute_kpis(ls, lambda, u, KpiOptions{});
  CHECK(s.served(0, 0) == doctest::Approx(5e6));
  CHECK(s.delay(0, 0) == doctest::Approx(0.5e-3 / 0.01));
}

TEST_CASE("environment rejects off-simplex allocations") {
  Environment env(fixtures::two_slice_scenario(3), 1);
  Allocation a = Allocation::uniform(3, 2);
  a.share(1, 1) += 0.01;
  CHECK_THROWS_AS(env.step(a), ConstraintViolation);
  Allocation wrong = Allocation::uniform(2, 2);
  CHECK_THROWS(env.step(wrong));
}

TEST_CASE("environment is deterministic and advances time") {
  Scenario sc = fixtures::two_slice_scenario(3);
  Environment a(sc, 5), b(sc, 5);
  const Allocation alloc = Allocation::uniform(3, 2);
  for (int t = 0; t < 100; ++t) {
    NetState sa = a.step(alloc), sb = b.step(alloc);
    REQUIRE(sa.throughput == sb.throughput);
    REQUIRE(sa.users == sb.users);
    CHECK(sa.step == t);
    CHECK((sa.served.array() <= offered_traffic(UserDistribution{sa.users}, sc.slices).array() + 1e-6).all());
    CHECK(sa.load.maxCoeff() <= 1.0);
    CHECK(sa.throughput.minCoeff() >= 0.0);
  }
  CHECK(a.time() == 100);
}

TEST_CASE("zero mask gives an all-zero throughput trace") {
  Scenario sc = fixtures::two_slice_scenario(3);
  sc.masks = {TrafficMask::constant(0.0), TrafficMask::constant(0.0)};
  Environment env(sc, 3);
  for (int t = 0; t < 50; ++t) {
    NetState s = env.step(Allocation::uniform(3, 2));
    CHECK(s.throughput.isZero(0));
    CHECK(s.users.isZero(0));
    CHECK(s.delay.isConstant(sc.kpi.delay_base_s));
  }
}

TEST_CASE("shifting resource to a starved slice increases its served traffic") {
  Scenario sc = fixtures::two_slice_scenario(1, 0.0, 1.0);
  sc.masks = {TrafficMask::constant(1.0), TrafficMask::constant(1.0)};
  double prev = -1;
  for (int i = 1; i <= 9; ++i) {
    Environment env(sc, 1);
    Eigen::VectorXd v(3);
    v << 0.0, i / 10.0, 1.0 - i / 10.0;
    NetState s = env.step(Allocation::broadcast(1, v));
    CHECK(s.served(0, 0) > prev);
    prev = s.served(0, 0);
  }
}

TEST_CASE("scenario validation names the field") {
  Scenario sc = fixtures::two_slice_scenario(3);
  sc.p_stay = 1.5;
  try {
    sc.validate();
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field() == "/scenario/p_stay");
  }
}
