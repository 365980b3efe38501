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

#include <string>

#include "slicerl/config.hpp"
#include "slicerl/errors.hpp"

using namespace slicerl;
using namespace slicerl::config;

namespace {

const std::string kDir = SLICERL_CONFIG_DIR;

nlohmann::json reference_doc() {
  return nlohmann::json::parse(R"({
    "scenario": {
      "topology": {"kind": "ring", "cells": 3},
      "bandwidth_hz": 20e6, "coupling": 0.2, "max_spectral_efficiency": 10,
      "slices": [
        {"name": "embb", "throughput_req_bps": 5e6, "delay_req_s": 1e-3, "user_demand_bps": 5e6,
         "mask": {"points": [[0, 0.2], [250, 1.0], [500, 0.2]], "period": 500}},
        {"name": "urllc", "throughput_req_bps": 3e6, "delay_req_s": 1e-3, "user_demand_bps": 3e6,
         "mask": {"points": [[0, 1.0], [250, 0.2], [500, 1.0]], "period": 500}}
      ]
    },
    "scheme": {"kind": "dist"}
  })");
}

std::string field_of(const nlohmann::json& doc) {
  try {
    config_from_json(doc);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "<accepted>";
}

}  // namespace

TEST_CASE("shipped configs load and validate") {
  for (const char* name : {"reference.json", "toy.json", "zero_traffic.json"}) {
    CAPTURE(name);
    CHECK_NOTHROW(load_config(kDir + "/" + name));
  }
  const ExperimentConfig ref = load_config(kDir + "/reference.json");
  CHECK(ref.scenario.cells() == 3);
  CHECK(ref.scenario.slice_count() == 2);
  CHECK(ref.scheme.kind == schemes::SchemeKind::dist_comm);
  CHECK(ref.seeds == std::vector<std::uint64_t>{1, 2, 3, 4, 5});
  CHECK(ref.scheme.reward.beta == 1.2);
  CHECK(ref.phases.total() == 15000);
}

TEST_CASE("omitted fields take documented defaults") {
  const ExperimentConfig c = config_from_json(reference_doc());
  CHECK(c.scheme.hp.gamma == 0.1);
  CHECK(c.scheme.hp.batch_size == 32);
  CHECK(c.scheme.hp.actor_lr == 5e-4);
  CHECK(c.scheme.hp.critic_lr == 1e-3);
  CHECK(c.scheme.hp.tau == 0.005);
  CHECK(c.scheme.hp.policy_delay == 2);
  CHECK(c.scheme.hp.replay_capacity == 100000);
  CHECK(c.phases.explore == 2500);
  CHECK(c.exploration.epsilon_start == 1.0);
  CHECK(c.seeds == std::vector<std::uint64_t>{1});
  CHECK(c.scenario.group_size_max == 32);
}

TEST_CASE("unknown keys are rejected with their path") {
  auto doc = reference_doc();
  doc["scenario"]["colour"] = "blue";
  CHECK(field_of(doc) == "/scenario/colour");
  doc = reference_doc();
  doc["agent"] = {{"gama", 0.5}};
  CHECK(field_of(doc) == "/agent/gama");
  doc = reference_doc();
  doc["scenario"]["slices"][1]["mask"]["shape"] = 1;
  CHECK(field_of(doc) == "/scenario/slices/1/mask/shape");
}

TEST_CASE("invalid values name the offending field") {
  auto doc = reference_doc();
  doc["scenario"]["coupling"] = -0.5;
  CHECK(field_of(doc) == "/scenario/coupling");
  doc = reference_doc();
  doc["scheme"]["kind"] = "cen";
  CHECK(field_of(doc) == "/scheme/kind");
  doc = reference_doc();
  doc["agent"] = {{"tau", 2.0}};
  CHECK(field_of(doc) == "/agent/tau");
  doc = reference_doc();
  doc["scenario"]["topology"]["cells"] = "three";
  CHECK(field_of(doc) == "/scenario/topology/cells");
  doc = reference_doc();
  doc["scenario"]["slices"][0]["throughput_req_bps"] = 0;
  CHECK(field_of(doc).rfind("/scenario/slices/0", 0) == 0);
  doc = reference_doc();
  doc["scheme"]["static_allocation"] = {0.5, 0.6, 0.1};
  CHECK(field_of(doc) == "/scheme/static_allocation");
  doc = reference_doc();
  doc["seeds"] = nlohmann::json::array();
  CHECK(field_of(doc) == "/seeds");
}

TEST_CASE("syntax errors report line and column") {
  try {
    parse_config("{\n  \"scenario\": {,\n}");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("line 2") != std::string::npos);
    CHECK(msg.find("column") != std::string::npos);
  }
  CHECK_THROWS_AS(load_config(kDir + "/does_not_exist.json"), IoError);
}

TEST_CASE("expanded config round-trips") {
  const ExperimentConfig a = load_config(kDir + "/reference.json");
  const nlohmann::json ja = to_json(a);
  const ExperimentConfig b = config_from_json(ja);
  CHECK(to_json(b) == ja);
  CHECK(scenario_hash(a) == scenario_hash(b));
}

TEST_CASE("scenario hash covers the scenario only") {
  ExperimentConfig a = config_from_json(reference_doc());
  const std::string h = scenario_hash(a);
  CHECK(h.size() == 16);
  CHECK(h.find_first_not_of("0123456789abcdef") == std::string::npos);
  ExperimentConfig b = a;
  b.scheme.kind = schemes::SchemeKind::cen_pen;
  b.seeds = {7, 8};
  b.phases.train = 5;
  CHECK(scenario_hash(b) == h);
  auto doc = reference_doc();
  doc["scenario"]["coupling"] = 0.25;
  CHECK(scenario_hash(config_from_json(doc)) != h);
  CHECK(scenario_hash(load_config(kDir + "/reference.json")) == "318db0415cd9f2d1");
}
