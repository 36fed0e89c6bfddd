#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <string_view>

#include "semvia/errors.hpp"

namespace semvia::cli {

using nlohmann::json;

namespace {

void expect_object(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
}

void reject_unknown(const json& j, const std::string& where,
                    std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, _] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError(where + ": unknown key '" + key + "'");
    }
  }
}

double number(const json& j, const std::string& where, const char* key) {
  if (!j.contains(key)) throw ConfigError(where + "." + key + " is required");
  const auto& v = j.at(key);
  if (!v.is_number()) throw ConfigError(where + "." + key + " must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(where + "." + key + " must be finite");
  return d;
}

double number_or(const json& j, const std::string& where, const char* key, double fallback) {
  return j.contains(key) ? number(j, where, key) : fallback;
}

std::uint64_t count_or(const json& j, const std::string& where, const char* key,
                       std::uint64_t fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number_unsigned()) {
    throw ConfigError(where + "." + key + " must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

std::vector<std::string> names(const json& j, const std::string& where, const char* key,
                               std::vector<std::string> fallback,
                               std::initializer_list<std::string_view> allowed) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_array() || v.empty()) throw ConfigError(where + "." + key + " must be a non-empty list");
  std::vector<std::string> out;
  for (const auto& e : v) {
    if (!e.is_string()) throw ConfigError(where + "." + key + " entries must be strings");
    const auto s = e.get<std::string>();
    if (std::find(allowed.begin(), allowed.end(), s) == allowed.end()) {
      throw ConfigError(where + "." + key + ": unknown entry '" + s + "'");
    }
    if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
  }
  return out;
}

template <class F>
auto domain(const std::string& where, F&& make) {
  try {
    return make();
  } catch (const DomainError& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

}  // namespace

std::vector<double> SweepSection::values() const {
  std::vector<double> out;
  if (!(step > 0.0) || from > to) return out;
  const auto n = static_cast<long>(std::floor((to - from) / step + 1e-9));
  for (long k = 0; k <= n; ++k) out.push_back(from + static_cast<double>(k) * step);
  return out;
}

nlohmann::json policy_to_json(const Policy& policy) {
  json j{{"policy", std::string(policy.name())}};
  if (policy.kind() == PolicyKind::rs) j["p_a"] = policy.as_rs().p_a;
  if (policy.kind() == PolicyKind::mrs) {
    j["q1"] = policy.as_mrs().q1;
    j["q2"] = policy.as_mrs().q2;
  }
  return j;
}

Policy policy_from_json(const nlohmann::json& j) {
  expect_object(j, "policy");
  if (!j.contains("policy") || !j.at("policy").is_string()) {
    throw ConfigError("policy.policy must name rs, mrs, change_aware or semantics_aware");
  }
  const auto kind = j.at("policy").get<std::string>();
  if (kind == "rs") {
    reject_unknown(j, "policy", {"policy", "p_a"});
    return domain("policy", [&] { return Policy::rs(number(j, "policy", "p_a")); });
  }
  if (kind == "mrs") {
    reject_unknown(j, "policy", {"policy", "q1", "q2"});
    return domain("policy", [&] {
      return Policy::mrs(number(j, "policy", "q1"), number(j, "policy", "q2"));
    });
  }
  if (kind == "change_aware") {
    reject_unknown(j, "policy", {"policy"});
    return Policy::change_aware();
  }
  if (kind == "semantics_aware") {
    reject_unknown(j, "policy", {"policy"});
    return Policy::semantics_aware();
  }
  throw ConfigError("policy.policy: unknown policy '" + kind + "'");
}

RunConfig parse_config(const json& j) {
  expect_object(j, "config");
  reject_unknown(j, "config",
                 {"source", "channel", "policy", "sim", "budget", "constraints", "optimize", "sweep"});
  RunConfig cfg;
  if (j.contains("source")) {
    const auto& s = j.at("source");
    expect_object(s, "source");
    reject_unknown(s, "source", {"p", "q"});
    cfg.source = domain("source",
                        [&] { return SourceParams(number(s, "source", "p"), number(s, "source", "q")); });
  }
  if (j.contains("channel")) {
    const auto& c = j.at("channel");
    expect_object(c, "channel");
    reject_unknown(c, "channel", {"p_s"});
    cfg.channel = domain("channel", [&] { return ChannelParams(number(c, "channel", "p_s")); });
  }
  if (j.contains("policy")) cfg.policy = policy_from_json(j.at("policy"));
  if (j.contains("sim")) {
    const auto& s = j.at("sim");
    expect_object(s, "sim");
    reject_unknown(s, "sim", {"horizon", "seed", "reps", "burn_in"});
    cfg.sim.horizon = count_or(s, "sim", "horizon", cfg.sim.horizon);
    cfg.sim.seed = count_or(s, "sim", "seed", cfg.sim.seed);
    cfg.sim.reps = count_or(s, "sim", "reps", cfg.sim.reps);
    cfg.sim.burn_in = count_or(s, "sim", "burn_in", cfg.sim.burn_in);
  }
  if (cfg.sim.reps < 1) throw ConfigError("sim.reps must be at least 1");
  domain("sim", [&] {
    sim::SimConfig probe;
    probe.horizon = cfg.sim.horizon;
    probe.burn_in = cfg.sim.burn_in;
    probe.validate();
    return 0;
  });
  if (j.contains("budget")) {
    const auto& b = j.at("budget");
    expect_object(b, "budget");
    reject_unknown(b, "budget", {"delta", "delta_max"});
    BudgetSection bs;
    bs.delta = number_or(b, "budget", "delta", 1.0);
    bs.delta_max = number(b, "budget", "delta_max");
    domain("budget", [&] { return bs.cost_budget(); });
    cfg.budget = bs;
  }
  if (j.contains("constraints")) {
    const auto& c = j.at("constraints");
    expect_object(c, "constraints");
    reject_unknown(c, "constraints", {"e_max"});
    cfg.e_max = number_or(c, "constraints", "e_max", 1.0);
    if (!(cfg.e_max > 0.0 && cfg.e_max <= 1.0)) {
      throw ConfigError("constraints.e_max must lie in (0, 1]");
    }
  }
  if (j.contains("optimize")) {
    const auto& o = j.at("optimize");
    expect_object(o, "optimize");
    reject_unknown(o, "optimize", {"objectives"});
    cfg.objectives = names(o, "optimize", "objectives", cfg.objectives, {"via", "aoiv", "aoii"});
  }
  if (j.contains("sweep")) {
    const auto& s = j.at("sweep");
    expect_object(s, "sweep");
    reject_unknown(s, "sweep", {"variable", "from", "to", "step", "metrics", "simulate"});
    SweepSection sw;
    if (!s.contains("variable") || !s.at("variable").is_string()) {
      throw ConfigError("sweep.variable must be one of p, q, p_s, eta, p_a, q1, q2");
    }
    sw.variable = s.at("variable").get<std::string>();
    static constexpr std::string_view vars[] = {"p", "q", "p_s", "eta", "p_a", "q1", "q2"};
    if (std::find(std::begin(vars), std::end(vars), sw.variable) == std::end(vars)) {
      throw ConfigError("sweep.variable: unknown variable '" + sw.variable + "'");
    }
    sw.from = number(s, "sweep", "from");
    sw.to = number(s, "sweep", "to");
    sw.step = number(s, "sweep", "step");
    sw.metrics = names(s, "sweep", "metrics", sw.metrics, {"via", "aoiv", "aoii"});
    if (s.contains("simulate")) {
      if (!s.at("simulate").is_boolean()) throw ConfigError("sweep.simulate must be true or false");
      sw.simulate = s.at("simulate").get<bool>();
    }
    if (sw.values().empty()) throw ConfigError("sweep: empty range");
    cfg.sweep = sw;
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return parse_config(j);
}

json to_json(const RunConfig& cfg) {
  json j = json::object();
  if (cfg.source) j["source"] = {{"p", cfg.source->p()}, {"q", cfg.source->q()}};
  if (cfg.channel) j["channel"] = {{"p_s", cfg.channel->ps()}};
  if (cfg.policy) j["policy"] = policy_to_json(*cfg.policy);
  j["sim"] = {{"horizon", cfg.sim.horizon},
              {"seed", cfg.sim.seed},
              {"reps", cfg.sim.reps},
              {"burn_in", cfg.sim.burn_in}};
  if (cfg.budget) j["budget"] = {{"delta", cfg.budget->delta}, {"delta_max", cfg.budget->delta_max}};
  j["constraints"] = {{"e_max", cfg.e_max}};
  j["optimize"] = {{"objectives", cfg.objectives}};
  if (cfg.sweep) {
    j["sweep"] = {{"variable", cfg.sweep->variable}, {"from", cfg.sweep->from},
                  {"to", cfg.sweep->to},             {"step", cfg.sweep->step},
                  {"metrics", cfg.sweep->metrics},   {"simulate", cfg.sweep->simulate}};
  }
  return j;
}

const SourceParams& require_source(const RunConfig& config) {
  if (!config.source) throw ConfigError("config needs a source section");
  return *config.source;
}

const ChannelParams& require_channel(const RunConfig& config) {
  if (!config.channel) throw ConfigError("config needs a channel section");
  return *config.channel;
}

const Policy& require_policy(const RunConfig& config) {
  if (!config.policy) throw ConfigError("config needs a policy section");
  return *config.policy;
}

const BudgetSection& require_budget(const RunConfig& config) {
  if (!config.budget) throw ConfigError("config needs a budget section");
  return *config.budget;
}

sim::SimConfig sim_config(const RunConfig& config, const Policy& policy) {
  sim::SimConfig s;
  s.source = require_source(config);
  s.channel = require_channel(config);
  s.policy = policy;
  s.horizon = config.sim.horizon;
  s.seed = config.sim.seed;
  s.burn_in = config.sim.burn_in;
  s.delta = config.budget ? config.budget->delta : 1.0;
  return s;
}

}  // namespace semvia::cli
