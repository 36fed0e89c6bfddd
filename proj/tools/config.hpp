#pragma once

// JSON run configuration shared by every subcommand.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "semvia/model.hpp"
#include "semvia/optimizer.hpp"
#include "semvia/policy.hpp"
#include "semvia/simulation.hpp"

namespace semvia::cli {

/// Malformed or out-of-domain configuration; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SimSection {
  std::uint64_t horizon = 1'000'000;
  std::uint64_t seed = 1;
  std::uint64_t reps = 1;
  std::uint64_t burn_in = 0;
  friend bool operator==(const SimSection&, const SimSection&) = default;
};

struct BudgetSection {
  double delta = 1.0;
  double delta_max = 1.0;
  opt::CostBudget cost_budget() const { return {delta, delta_max}; }
  friend bool operator==(const BudgetSection&, const BudgetSection&) = default;
};

struct SweepSection {
  std::string variable;  // p, q, p_s, eta, p_a, q1, q2
  double from = 0.0;
  double to = 0.0;
  double step = 0.0;
  std::vector<std::string> metrics{"via", "aoiv", "aoii"};
  bool simulate = false;
  std::vector<double> values() const;
  friend bool operator==(const SweepSection&, const SweepSection&) = default;
};

struct RunConfig {
  std::optional<SourceParams> source;
  std::optional<ChannelParams> channel;
  std::optional<Policy> policy;
  SimSection sim;
  std::optional<BudgetSection> budget;
  double e_max = 1.0;
  std::vector<std::string> objectives{"via", "aoiv", "aoii"};
  std::optional<SweepSection> sweep;
  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);
nlohmann::json to_json(const RunConfig& config);

nlohmann::json policy_to_json(const Policy& policy);
Policy policy_from_json(const nlohmann::json& j);

/// Throws ConfigError naming the missing section.
const SourceParams& require_source(const RunConfig& config);
const ChannelParams& require_channel(const RunConfig& config);
const Policy& require_policy(const RunConfig& config);
const BudgetSection& require_budget(const RunConfig& config);

sim::SimConfig sim_config(const RunConfig& config, const Policy& policy);

}  // namespace semvia::cli
