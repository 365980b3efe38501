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

// Shared scenario builders for the unit tests.

#ifndef SLICERL_TESTS_FIXTURES_HPP_
#define SLICERL_TESTS_FIXTURES_HPP_

#include <filesystem>
#include <random>
#include <string>

#include "slicerl/netsim.hpp"

namespace fixtures {

inline slicerl::netsim::Scenario two_slice_scenario(int cells, double coupling = 0.2,
                                                    double se_max = 10.0) {
  using namespace slicerl::netsim;
  Scenario sc;
  sc.topology = Topology::ring(cells);
  sc.topology.bandwidth_hz = 20e6;
  sc.topology.coupling = coupling;
  sc.topology.max_spectral_efficiency = se_max;
  sc.slices = {Slice{"embb", 5e6, 1e-3, 5e6}, Slice{"urllc", 3e6, 1e-3, 3e6}};
  sc.masks = {TrafficMask({{0, 0.2}, {250, 1.0}, {500, 0.2}}, 500),
              TrafficMask({{0, 1.0}, {250, 0.2}, {500, 1.0}}, 500)};
  return sc;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() /
           ("slicerl_test_" + name + "_" + std::to_string(std::random_device{}()));
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace fixtures

#endif  // SLICERL_TESTS_FIXTURES_HPP_
