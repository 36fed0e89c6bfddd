#include "semvia/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <type_traits>
#include <variant>

#include "semvia/errors.hpp"
#include "semvia/metrics.hpp"
#include "semvia/rng.hpp"

namespace semvia::sim {

namespace {

struct BatchSums {
  std::uint64_t slots = 0;
  std::uint64_t via = 0;
  std::uint64_t aoiv = 0;
  std::uint64_t aoii = 0;
  std::uint64_t errors = 0;
  std::uint64_t samples = 0;
};

Estimate batch_estimate(const std::vector<BatchSums>& batches, std::uint64_t BatchSums::*field,
                        double scale) {
  std::uint64_t total = 0, slots = 0;
  for (const auto& b : batches) {
    total += b.*field;
    slots += b.slots;
  }
  Estimate e;
  e.mean = scale * static_cast<double>(total) / static_cast<double>(slots);
  const auto n = batches.size();
  if (n >= 2) {
    double ss = 0.0;
    for (const auto& b : batches) {
      const double m = scale * static_cast<double>(b.*field) / static_cast<double>(b.slots);
      ss += (m - e.mean) * (m - e.mean);
    }
    e.stderr_ = std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
  }
  return e;
}

/// Slot loop specialised on the sampling rule.
template <class Sample>
MetricsSummary simulate(const SimConfig& cfg, Sample&& sample, const TraceSink& sink) {
  const std::uint64_t counted = cfg.horizon - cfg.burn_in;
  const std::size_t nb = static_cast<std::size_t>(std::min<std::uint64_t>(kBatches, counted));
  std::vector<BatchSums> batches(nb);

  SystemState st;
  std::uint64_t violations = 0;
  std::uint64_t k = 0;  // index among counted slots
  auto account = [&](std::uint64_t t, bool sampled) {
    if (t <= cfg.burn_in) return;
    auto& b = batches[static_cast<std::size_t>(k * nb / counted)];
    ++k;
    ++b.slots;
    b.via += st.via;
    b.aoiv += st.aoiv;
    b.aoii += st.aoii;
    b.errors += st.x != st.xhat;
    b.samples += sampled;
  };

  if (sink) sink({1, st.x, st.xhat, false, false, st.via, st.aoiv, st.aoii});
  account(1, false);
  rng::CounterStream stream(cfg.seed);
  for (std::uint64_t t = 2; t <= cfg.horizon; ++t) {
    const double u_src = stream.next();
    const double u_smp = stream.next();
    const double u_ch = stream.next();
    const State x_prev = st.x;
    const State x_t = step_source(cfg.source, x_prev, u_src);
    const bool sampled = sample(x_t, x_prev, st.xhat, u_smp);
    const bool delivered = sampled && transmit(cfg.channel, u_ch);
    apply_slot(st, x_t, sampled, delivered);
    violations += !pathwise_invariants_hold(st);
    if (sink) sink({t, st.x, st.xhat, sampled, delivered, st.via, st.aoiv, st.aoii});
    account(t, sampled);
  }

  MetricsSummary out;
  out.via = batch_estimate(batches, &BatchSums::via, 1.0);
  out.aoiv = batch_estimate(batches, &BatchSums::aoiv, 1.0);
  out.aoii = batch_estimate(batches, &BatchSums::aoii, 1.0);
  out.p_e = batch_estimate(batches, &BatchSums::errors, 1.0);
  out.sample_rate = batch_estimate(batches, &BatchSums::samples, 1.0);
  out.cost_rate = batch_estimate(batches, &BatchSums::samples, cfg.delta);
  out.slots = counted;
  out.replications = 1;
  out.invariant_violations = violations;
  return out;
}

Estimate across(const std::vector<MetricsSummary>& runs, Estimate MetricsSummary::*field) {
  Estimate e;
  const auto n = runs.size();
  for (const auto& r : runs) e.mean += (r.*field).mean;
  e.mean /= static_cast<double>(n);
  if (n == 1) return runs.front().*field;
  double ss = 0.0;
  for (const auto& r : runs) ss += ((r.*field).mean - e.mean) * ((r.*field).mean - e.mean);
  e.stderr_ = std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
  return e;
}

}  // namespace

void SimConfig::validate() const {
  if (horizon < kMinHorizon) throw DomainError("horizon must be at least 1000 slots");
  if (burn_in >= horizon) throw DomainError("burn_in must be smaller than horizon");
  if (!(delta > 0.0) || !std::isfinite(delta)) throw DomainError("delta must be positive");
}

MetricsSummary run(const SimConfig& config, const TraceSink& sink) {
  config.validate();
  return std::visit(
      [&](const auto& rule) -> MetricsSummary {
        using R = std::decay_t<decltype(rule)>;
        if constexpr (std::is_same_v<R, RandomizedStationary>) {
          const double pa = rule.p_a;
          return simulate(config, [pa](State, State, State, double u) { return u < pa; }, sink);
        } else if constexpr (std::is_same_v<R, ModifiedRandomizedStationary>) {
          const double q1 = rule.q1, q2 = rule.q2;
          return simulate(
              config,
              [q1, q2](State x, State x_prev, State xhat_prev, double u) {
                if (x == xhat_prev) return false;
                return u < (x_prev == xhat_prev ? q1 : q2);
              },
              sink);
        } else if constexpr (std::is_same_v<R, ChangeAware>) {
          return simulate(config, [](State x, State x_prev, State, double) { return x != x_prev; },
                          sink);
        } else {
          return simulate(
              config, [](State x, State, State xhat_prev, double) { return x != xhat_prev; }, sink);
        }
      },
      config.policy.value());
}

std::size_t worker_count() {
  if (const char* env = std::getenv("SEMVIA_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min(worker_count(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

MetricsSummary run_many(const SimConfig& config, std::uint64_t reps) {
  if (reps < 1) throw DomainError("reps must be at least 1");
  config.validate();
  std::vector<MetricsSummary> runs(reps);
  parallel_for(reps, [&](std::size_t r) {
    SimConfig c = config;
    c.seed = rng::derive_seed(config.seed, r);
    runs[r] = run(c);
  });
  if (reps == 1) return runs.front();

  MetricsSummary out;
  out.via = across(runs, &MetricsSummary::via);
  out.aoiv = across(runs, &MetricsSummary::aoiv);
  out.aoii = across(runs, &MetricsSummary::aoii);
  out.p_e = across(runs, &MetricsSummary::p_e);
  out.cost_rate = across(runs, &MetricsSummary::cost_rate);
  out.sample_rate = across(runs, &MetricsSummary::sample_rate);
  out.slots = runs.front().slots;
  out.replications = reps;
  for (const auto& r : runs) out.invariant_violations += r.invariant_violations;
  return out;
}

bool Comparison::all_pass() const noexcept {
  return std::all_of(checks.begin(), checks.end(), [](const MetricCheck& c) { return c.pass; });
}

Comparison compare(const MetricsSummary& sim, const analytic::AnalyticReport& analytic, double z) {
  Comparison out;
  auto check = [&](const char* name, const Estimate& est, const std::optional<double>& expected) {
    MetricCheck c;
    c.metric = name;
    c.analytic = expected;
    c.simulated = est.mean;
    c.stderr_ = est.stderr_;
    if (expected) {
      c.tolerance = est.stderr_ ? std::max(z * *est.stderr_, 1e-12)
                                : std::max(0.02 * std::abs(*expected), 1e-12);
      c.pass = std::abs(est.mean - *expected) <= c.tolerance;
    }
    out.checks.push_back(std::move(c));
  };
  check("avg_via", sim.via, analytic.avg_via);
  check("avg_aoiv", sim.aoiv, analytic.avg_aoiv);
  check("avg_aoii", sim.aoii, analytic.avg_aoii);
  check("p_e", sim.p_e, analytic.p_e);
  check("cost_rate", sim.cost_rate, analytic.cost_rate);
  return out;
}

}  // namespace semvia::sim
