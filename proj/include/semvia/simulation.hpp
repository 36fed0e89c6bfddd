#pragma once

// Seeded Monte Carlo engine for the slot loop.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "semvia/analytic.hpp"
#include "semvia/model.hpp"
#include "semvia/policy.hpp"

namespace semvia::sim {

inline constexpr std::uint64_t kMinHorizon = 1000;
inline constexpr std::size_t kBatches = 100;

struct SimConfig {
  SourceParams source{0.5, 0.5};
  ChannelParams channel{1.0};
  Policy policy = Policy::rs(1.0);
  std::uint64_t horizon = 1'000'000;  ///< slots, counting the initial slot t = 1
  std::uint64_t seed = 1;
  std::uint64_t burn_in = 0;          ///< leading slots excluded from the averages
  double delta = 1.0;                 ///< cost per sample

  /// Throws DomainError unless horizon >= 1000, burn_in < horizon and delta > 0.
  void validate() const;
};

struct Estimate {
  double mean = 0.0;
  std::optional<double> stderr_;  ///< batch means for one run, across replications otherwise
};

struct MetricsSummary {
  Estimate via;
  Estimate aoiv;
  Estimate aoii;
  Estimate p_e;
  Estimate cost_rate;
  Estimate sample_rate;
  std::uint64_t slots = 0;  ///< averaged slots per replication
  std::uint64_t replications = 0;
  std::uint64_t invariant_violations = 0;
};

struct TraceSlot {
  std::uint64_t t = 0;
  State x = 0;
  State xhat = 0;
  bool sampled = false;
  bool delivered = false;
  std::uint64_t via = 0;
  std::uint64_t aoiv = 0;
  std::uint64_t aoii = 0;
};

using TraceSink = std::function<void(const TraceSlot&)>;

/// One replication from X(1) = X̂(1) = 0. The sink, if given, sees every slot including t = 1.
MetricsSummary run(const SimConfig& config, const TraceSink& sink = {});

/// Replication r uses seed rng::derive_seed(config.seed, r). Runs in parallel (see
/// worker_count) and aggregates in replication order.
MetricsSummary run_many(const SimConfig& config, std::uint64_t reps);

/// Worker threads: SEMVIA_THREADS if set to a positive integer, else hardware concurrency.
std::size_t worker_count();

/// Calls fn(i) for i in [0, n) on up to worker_count() threads. Exceptions are rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

struct MetricCheck {
  std::string metric;
  std::optional<double> analytic;  ///< empty: simulation-only
  double simulated = 0.0;
  std::optional<double> stderr_;
  double tolerance = 0.0;
  bool pass = true;
};

struct Comparison {
  std::vector<MetricCheck> checks;
  bool all_pass() const noexcept;
};

/// Per metric: |sim - analytic| <= max(z * stderr, 1e-12), or within 2% relative when no
/// standard error is available. Metrics without a closed form pass as simulation-only.
Comparison compare(const MetricsSummary& sim, const analytic::AnalyticReport& analytic, double z);

}  // namespace semvia::sim
