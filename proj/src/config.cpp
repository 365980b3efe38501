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

#include "slicerl/config.hpp"

#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <set>
#include <sstream>

#include "slicerl/errors.hpp"

namespace slicerl::config {

namespace {

using nlohmann::json;

// Typed access to one JSON object; remembers its pointer path and rejects
// keys that were never asked for.
class Section {
 public:
  Section(const json& doc, std::string path) : doc_(doc), path_(std::move(path)) {
    if (!doc_.is_object()) throw ConfigError("expected an object", path_.empty() ? "/" : path_);
  }

  std::string at(std::string_view key) const { return path_ + "/" + std::string(key); }
  bool has(std::string_view key) const { return doc_.contains(std::string(key)); }

  const json* find(std::string_view key) {
    seen_.insert(std::string(key));
    auto it = doc_.find(std::string(key));
    return it == doc_.end() ? nullptr : &*it;
  }

  double number(std::string_view key, double fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_number()) throw ConfigError("expected a number", at(key));
    return v->get<double>();
  }

  long integer(std::string_view key, long fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_number_integer()) throw ConfigError("expected an integer", at(key));
    return v->get<long>();
  }

  std::uint64_t unsigned_integer(std::string_view key, std::uint64_t fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    return as_seed(*v, at(key));
  }

  bool boolean(std::string_view key, bool fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_boolean()) throw ConfigError("expected true or false", at(key));
    return v->get<bool>();
  }

  std::string string(std::string_view key, std::string fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_string()) throw ConfigError("expected a string", at(key));
    return v->get<std::string>();
  }

  std::vector<int> int_list(std::string_view key) {
    const json* v = find(key);
    if (!v) return {};
    if (!v->is_array()) throw ConfigError("expected an array of integers", at(key));
    std::vector<int> out;
    for (std::size_t i = 0; i < v->size(); ++i) {
      const json& e = (*v)[i];
      if (!e.is_number_integer() || e.get<long>() < 1)
        throw ConfigError("expected a positive integer", at(key) + "/" + std::to_string(i));
      out.push_back(e.get<int>());
    }
    return out;
  }

  std::vector<double> number_list(std::string_view key) {
    const json* v = find(key);
    if (!v) return {};
    if (!v->is_array()) throw ConfigError("expected an array of numbers", at(key));
    std::vector<double> out;
    for (std::size_t i = 0; i < v->size(); ++i) {
      if (!(*v)[i].is_number())
        throw ConfigError("expected a number", at(key) + "/" + std::to_string(i));
      out.push_back((*v)[i].get<double>());
    }
    return out;
  }

  Section child(std::string_view key) {
    const json* v = find(key);
    static const json empty = json::object();
    return Section(v ? *v : empty, at(key));
  }

  void finish() const {
    for (auto it = doc_.begin(); it != doc_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError("unknown key", at(it.key()));
  }

  static std::uint64_t as_seed(const json& v, const std::string& path) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<long long>() >= 0) return v.get<std::uint64_t>();
    throw ConfigError("expected a non-negative integer", path);
  }

 private:
  const json& doc_;
  std::string path_;
  std::set<std::string> seen_;
};

netsim::TrafficMask parse_mask(Section s) {
  const json* pts = s.find("points");
  if (!pts || !pts->is_array()) throw ConfigError("expected an array of [time, value] pairs", s.at("points"));
  std::vector<std::pair<double, double>> points;
  for (std::size_t i = 0; i < pts->size(); ++i) {
    const json& p = (*pts)[i];
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
      throw ConfigError("expected a [time, value] pair", s.at("points") + "/" + std::to_string(i));
    points.emplace_back(p[0].get<double>(), p[1].get<double>());
  }
  const double period = s.number("period", 0.0);
  s.finish();
  try {
    return netsim::TrafficMask(std::move(points), period);
  } catch (const ConfigError& e) {
    throw ConfigError(e.what(), s.at("points"));
  }
}

json mask_to_json(const netsim::TrafficMask& m) {
  json pts = json::array();
  for (const auto& [t, v] : m.points()) pts.push_back({t, v});
  return {{"points", pts}, {"period", m.period()}};
}

void parse_scenario(Section s, ExperimentConfig& cfg) {
  netsim::Scenario& sc = cfg.scenario;
  {
    Section t = s.child("topology");
    cfg.topology_kind = t.string("kind", "ring");
    const long cells = t.integer("cells", 3);
    if (cells < 1) throw ConfigError("must be positive", t.at("cells"));
    const long cols = t.integer("cols", 0);
    if (cfg.topology_kind == "ring") {
      if (t.has("cols")) throw ConfigError("only valid for grid topologies", t.at("cols"));
      sc.topology = netsim::Topology::ring(static_cast<int>(cells));
    } else if (cfg.topology_kind == "full") {
      if (t.has("cols")) throw ConfigError("only valid for grid topologies", t.at("cols"));
      sc.topology = netsim::Topology::full(static_cast<int>(cells));
    } else if (cfg.topology_kind == "grid") {
      if (cols < 1) throw ConfigError("grid topologies need a positive column count", t.at("cols"));
      sc.topology = netsim::Topology::grid(static_cast<int>(cells), static_cast<int>(cols));
      cfg.grid_cols = static_cast<int>(cols);
    } else {
      throw ConfigError("expected \"ring\", \"full\" or \"grid\"", t.at("kind"));
    }
    t.finish();
  }
  sc.topology.bandwidth_hz = s.number("bandwidth_hz", 20e6);
  sc.topology.coupling = s.number("coupling", 0.0);
  sc.topology.max_spectral_efficiency = s.number("max_spectral_efficiency", 1.0);

  const json* slices = s.find("slices");
  if (!slices || !slices->is_array() || slices->empty())
    throw ConfigError("expected a non-empty array of slices", s.at("slices"));
  sc.slices.clear();
  sc.masks.clear();
  for (std::size_t i = 0; i < slices->size(); ++i) {
    Section e((*slices)[i], s.at("slices") + "/" + std::to_string(i));
    netsim::Slice sl;
    sl.name = e.string("name", "slice" + std::to_string(i + 1));
    sl.throughput_req_bps = e.number("throughput_req_bps", 0.0);
    sl.delay_req_s = e.number("delay_req_s", 0.0);
    sl.user_demand_bps = e.number("user_demand_bps", sl.throughput_req_bps);
    if (!e.has("mask")) throw ConfigError("missing traffic mask", e.at("mask"));
    sc.masks.push_back(parse_mask(e.child("mask")));
    sc.slices.push_back(sl);
    e.finish();
  }
  sc.group_size_max = static_cast<int>(s.integer("group_size_max", 32));
  sc.p_stay = s.number("p_stay", 0.8);
  sc.kpi.delay_base_s = s.number("delay_base_s", 0.5e-3);
  sc.kpi.load_cap = s.number("load_cap", 0.99);
  {
    Section f = s.child("fixed_point");
    sc.fixed_point.tolerance = f.number("tolerance", 1e-6);
    sc.fixed_point.max_iter = static_cast<int>(f.integer("max_iter", 1000));
    f.finish();
  }
  sc.seed = s.unsigned_integer("seed", 1);
  sc.validate();

  cfg.normalizers = mdp::Normalizers::from_scenario(sc);
  {
    Section n = s.child("normalizers");
    if (n.has("throughput")) {
      cfg.normalizers.throughput = n.number_list("throughput");
      if (cfg.normalizers.throughput.size() != sc.slices.size())
        throw ConfigError("needs one entry per slice", n.at("throughput"));
      for (double v : cfg.normalizers.throughput)
        if (!(v > 0)) throw ConfigError("entries must be positive", n.at("throughput"));
    }
    cfg.normalizers.users = n.number("users", cfg.normalizers.users);
    if (!(cfg.normalizers.users > 0)) throw ConfigError("must be positive", n.at("users"));
    n.finish();
  }
  s.finish();
}

void parse_scheme(Section s, ExperimentConfig& cfg, int slice_count) {
  auto& sch = cfg.scheme;
  sch.kind = schemes::parse_scheme_kind(s.string("kind", "dist_comm"));
  sch.actor_hidden = s.int_list("actor_hidden");
  sch.critic_hidden = s.int_list("critic_hidden");
  const std::vector<double> stat = s.number_list("static_allocation");
  if (!stat.empty()) {
    if (static_cast<int>(stat.size()) != slice_count + 1)
      throw ConfigError("needs " + std::to_string(slice_count + 1) + " entries (headroom first)",
                        s.at("static_allocation"));
    sch.static_default = Eigen::Map<const Eigen::VectorXd>(stat.data(), static_cast<Eigen::Index>(stat.size()));
    if (!netsim::Allocation::broadcast(1, sch.static_default).on_simplex())
      throw ConfigError("must be non-negative and sum to one", s.at("static_allocation"));
  }
  sch.shared_init = s.boolean("shared_init", false);
  s.finish();
}

void parse_agent(Section s, ExperimentConfig& cfg) {
  auto& hp = cfg.scheme.hp;
  hp.gamma = s.number("gamma", hp.gamma);
  hp.batch_size = static_cast<int>(s.integer("batch_size", hp.batch_size));
  hp.actor_lr = s.number("actor_lr", hp.actor_lr);
  hp.critic_lr = s.number("critic_lr", hp.critic_lr);
  hp.tau = s.number("tau", hp.tau);
  hp.policy_delay = static_cast<int>(s.integer("policy_delay", hp.policy_delay));
  hp.target_noise = s.number("target_noise", hp.target_noise);
  hp.target_noise_clip = s.number("target_noise_clip", hp.target_noise_clip);
  hp.exploration_noise = s.number("exploration_noise", hp.exploration_noise);
  const long cap = s.integer("replay_capacity", static_cast<long>(hp.replay_capacity));
  if (cap < 1) throw ConfigError("must be positive", s.at("replay_capacity"));
  hp.replay_capacity = static_cast<std::size_t>(cap);
  hp.validate();
  try {
    cfg.scheme.activation = nn::parse_activation(s.string("activation", "relu"));
  } catch (const std::exception&) {
    throw ConfigError("expected \"relu\" or \"tanh\"", s.at("activation"));
  }
  cfg.exploration.epsilon_start = s.number("epsilon_start", 1.0);
  cfg.exploration.epsilon_end = s.number("epsilon_end", 0.05);
  for (auto [key, v] : {std::pair{"epsilon_start", cfg.exploration.epsilon_start},
                        std::pair{"epsilon_end", cfg.exploration.epsilon_end}})
    if (!(v >= 0 && v <= 1)) throw ConfigError("must lie in [0,1]", s.at(key));
  {
    Section r = s.child("reward");
    auto& rw = cfg.scheme.reward;
    try {
      rw.variant = mdp::parse_reward_variant(r.string("variant", "delay_aware"));
    } catch (const std::exception&) {
      throw ConfigError("expected \"plain\", \"delay_aware\" or \"penalized\"", r.at("variant"));
    }
    rw.beta = r.number("beta", 1.2);
    if (!(rw.beta >= 0)) throw ConfigError("must be non-negative", r.at("beta"));
    try {
      rw.penalty_form = mdp::parse_penalty_form(r.string("penalty_form", "absolute"));
    } catch (const std::exception&) {
      throw ConfigError("expected \"absolute\" or \"signed\"", r.at("penalty_form"));
    }
    r.finish();
  }
  s.finish();
}

void parse_phases(Section s, ExperimentConfig& cfg) {
  cfg.phases.explore = s.integer("explore", 2500);
  cfg.phases.train = s.integer("train", 10000);
  cfg.phases.eval = s.integer("eval", 2500);
  if (cfg.phases.explore < 0) throw ConfigError("must be non-negative", s.at("explore"));
  if (cfg.phases.train < 0) throw ConfigError("must be non-negative", s.at("train"));
  if (cfg.phases.eval < 0) throw ConfigError("must be non-negative", s.at("eval"));
  s.finish();
}

std::string line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

ExperimentConfig config_from_json(const json& doc) {
  ExperimentConfig cfg;
  Section root(doc, "");
  if (!root.has("scenario")) throw ConfigError("missing section", "/scenario");
  parse_scenario(root.child("scenario"), cfg);
  parse_scheme(root.child("scheme"), cfg, cfg.scenario.slice_count());
  parse_agent(root.child("agent"), cfg);
  cfg.scheme.normalizers = cfg.normalizers;
  parse_phases(root.child("phases"), cfg);
  if (const json* seeds = root.find("seeds")) {
    if (!seeds->is_array() || seeds->empty())
      throw ConfigError("expected a non-empty array of seeds", "/seeds");
    cfg.seeds.clear();
    for (std::size_t i = 0; i < seeds->size(); ++i)
      cfg.seeds.push_back(Section::as_seed((*seeds)[i], "/seeds/" + std::to_string(i)));
  }
  {
    Section o = root.child("output");
    cfg.output.dir = o.string("dir", "runs");
    if (cfg.output.dir.empty()) throw ConfigError("must not be empty", "/output/dir");
    cfg.output.checkpoints = o.boolean("checkpoints", true);
    o.finish();
  }
  root.finish();
  return cfg;
}

ExperimentConfig parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    // The reported byte is one past the offending character.
    const std::size_t at = e.byte > 0 ? e.byte - 1 : 0;
    std::string msg = e.what();
    // Keep only the description after nlohmann's "[id] parse error at ...: " prefix.
    if (auto p = msg.find(": "); p != std::string::npos) msg = msg.substr(p + 2);
    throw ConfigError("syntax error at " + line_column(text, at) + ": " + msg);
  }
  return config_from_json(doc);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  if (f.bad()) throw IoError("cannot read config file " + path.string());
  return parse_config(ss.str());
}

json scenario_to_json(const ExperimentConfig& cfg) {
  const netsim::Scenario& sc = cfg.scenario;
  json topo = {{"kind", cfg.topology_kind}, {"cells", sc.topology.cell_count}};
  if (cfg.topology_kind == "grid") topo["cols"] = cfg.grid_cols;
  json slices = json::array();
  for (std::size_t i = 0; i < sc.slices.size(); ++i) {
    const auto& s = sc.slices[i];
    slices.push_back({{"name", s.name},
                      {"throughput_req_bps", s.throughput_req_bps},
                      {"delay_req_s", s.delay_req_s},
                      {"user_demand_bps", s.user_demand_bps},
                      {"mask", mask_to_json(sc.masks[i])}});
  }
  return {{"topology", topo},
          {"bandwidth_hz", sc.topology.bandwidth_hz},
          {"coupling", sc.topology.coupling},
          {"max_spectral_efficiency", sc.topology.max_spectral_efficiency},
          {"slices", slices},
          {"group_size_max", sc.group_size_max},
          {"p_stay", sc.p_stay},
          {"delay_base_s", sc.kpi.delay_base_s},
          {"load_cap", sc.kpi.load_cap},
          {"fixed_point", {{"tolerance", sc.fixed_point.tolerance}, {"max_iter", sc.fixed_point.max_iter}}},
          {"normalizers", {{"throughput", cfg.normalizers.throughput}, {"users", cfg.normalizers.users}}},
          {"seed", sc.seed}};
}

json to_json(const ExperimentConfig& cfg) {
  const auto& sch = cfg.scheme;
  json scheme = {{"kind", schemes::to_string(sch.kind)},
                 {"actor_hidden", sch.actor_hidden},
                 {"critic_hidden", sch.critic_hidden},
                 {"shared_init", sch.shared_init}};
  if (sch.static_default.size() > 0)
    scheme["static_allocation"] = std::vector<double>(sch.static_default.data(),
                                                      sch.static_default.data() + sch.static_default.size());
  const auto& hp = sch.hp;
  json agent = {{"gamma", hp.gamma},
                {"batch_size", hp.batch_size},
                {"actor_lr", hp.actor_lr},
                {"critic_lr", hp.critic_lr},
                {"tau", hp.tau},
                {"policy_delay", hp.policy_delay},
                {"target_noise", hp.target_noise},
                {"target_noise_clip", hp.target_noise_clip},
                {"exploration_noise", hp.exploration_noise},
                {"replay_capacity", hp.replay_capacity},
                {"activation", nn::to_string(sch.activation)},
                {"epsilon_start", cfg.exploration.epsilon_start},
                {"epsilon_end", cfg.exploration.epsilon_end},
                {"reward",
                 {{"variant", mdp::to_string(sch.reward.variant)},
                  {"beta", sch.reward.beta},
                  {"penalty_form", mdp::to_string(sch.reward.penalty_form)}}}};
  return {{"scenario", scenario_to_json(cfg)},
          {"scheme", scheme},
          {"agent", agent},
          {"phases", {{"explore", cfg.phases.explore}, {"train", cfg.phases.train}, {"eval", cfg.phases.eval}}},
          {"seeds", cfg.seeds},
          {"output", {{"dir", cfg.output.dir}, {"checkpoints", cfg.output.checkpoints}}}};
}

std::string scenario_hash(const ExperimentConfig& cfg) {
  const std::string canonical = scenario_to_json(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace slicerl::config
