#include <gtest/gtest.h>

#include <cstdlib>

#include "semvia/analytic.hpp"
#include "semvia/errors.hpp"
#include "semvia/metrics.hpp"
#include "semvia/simulation.hpp"

using namespace semvia;
using namespace semvia::sim;

namespace {

SimConfig baseline(std::uint64_t horizon = 1'000'000) {
  SimConfig c;
  c.source = SourceParams(0.5, 0.5);
  c.channel = ChannelParams(0.8);
  c.policy = Policy::rs(0.5);
  c.horizon = horizon;
  c.seed = 2024;
  return c;
}

}  // namespace

TEST(SimConfig, Validation) {
  auto c = baseline(999);
  EXPECT_THROW(run(c), DomainError);
  c.horizon = 1000;
  c.burn_in = 1000;
  EXPECT_THROW(run(c), DomainError);
  c.burn_in = 10;
  EXPECT_NO_THROW(run(c));
  EXPECT_THROW(run_many(c, 0), DomainError);
}

TEST(Run, PerfectDelivery) {
  auto c = baseline(100'000);
  c.source = SourceParams(0.3, 0.9);
  c.channel = ChannelParams(1.0);
  c.policy = Policy::rs(1.0);
  c.delta = 2.5;
  const auto r = run(c);
  EXPECT_EQ(r.via.mean, 0.0);
  EXPECT_EQ(r.aoiv.mean, 0.0);
  EXPECT_EQ(r.aoii.mean, 0.0);
  EXPECT_EQ(r.p_e.mean, 0.0);
  // slot 1 is the initial state and carries no sample
  EXPECT_NEAR(r.cost_rate.mean, 2.5 * (1.0 - 1.0 / 100'000), 1e-12);
}

TEST(Run, BaselinePoint) {
  const auto r = run(baseline());
  EXPECT_NEAR(r.via.mean, 0.75, 0.01);
  EXPECT_NEAR(r.p_e.mean, 0.30, 0.005);
  EXPECT_NEAR(r.cost_rate.mean, 0.50, 0.005);
  EXPECT_EQ(r.slots, 1'000'000u);
  EXPECT_EQ(r.invariant_violations, 0u);
  ASSERT_TRUE(r.via.stderr_.has_value());
  EXPECT_GT(*r.via.stderr_, 0.0);
}

TEST(Run, SemanticsAwareSampleRate) {
  auto c = baseline();
  c.source = SourceParams(0.9, 0.8);
  c.channel = ChannelParams(0.9);
  c.policy = Policy::semantics_aware();
  const auto r = run(c);
  const double expected =
      analytic::sampling_cost_rate(Policy::semantics_aware(), c.source, c.channel, 1.0);
  EXPECT_NEAR(r.sample_rate.mean, expected, 0.005);
}

TEST(Run, Deterministic) {
  const auto a = run(baseline(50'000));
  const auto b = run(baseline(50'000));
  EXPECT_EQ(a.via.mean, b.via.mean);
  EXPECT_EQ(a.aoii.mean, b.aoii.mean);
  EXPECT_EQ(*a.p_e.stderr_, *b.p_e.stderr_);
}

TEST(Run, TraceMatchesSlotByStepping) {
  auto c = baseline(2000);
  c.policy = Policy::mrs(0.4, 0.9);
  std::vector<TraceSlot> rows;
  run(c, [&](const TraceSlot& s) { rows.push_back(s); });
  ASSERT_EQ(rows.size(), 2000u);
  SystemState st;
  EXPECT_EQ(rows[0].t, 1u);
  for (std::uint64_t t = 2; t <= 2000; ++t) {
    const auto out = advance(st, c.source, c.channel, c.policy, draws_for_slot(c.seed, t));
    const auto& row = rows[t - 1];
    ASSERT_EQ(row.t, t);
    ASSERT_EQ(row.x, st.x);
    ASSERT_EQ(row.xhat, st.xhat);
    ASSERT_EQ(row.sampled, out.sampled);
    ASSERT_EQ(row.delivered, out.delivered);
    ASSERT_EQ(row.via, st.via);
    ASSERT_EQ(row.aoiv, st.aoiv);
    ASSERT_EQ(row.aoii, st.aoii);
  }
}

TEST(Run, CommonRandomNumbersAcrossPolicies) {
  auto c = baseline(5000);
  std::vector<State> a, b;
  run(c, [&](const TraceSlot& s) { a.push_back(s.x); });
  c.policy = Policy::change_aware();
  run(c, [&](const TraceSlot& s) { b.push_back(s.x); });
  EXPECT_EQ(a, b);
}

TEST(Run, BurnInExcludesLeadingSlots) {
  auto c = baseline(10'000);
  c.burn_in = 4000;
  const auto r = run(c);
  EXPECT_EQ(r.slots, 6000u);
}

TEST(RunMany, SingleReplicationEqualsRun) {
  const auto c = baseline(20'000);
  const auto a = run(c);
  const auto b = run_many(c, 1);
  EXPECT_EQ(a.via.mean, b.via.mean);
  EXPECT_EQ(*a.via.stderr_, *b.via.stderr_);
}

TEST(RunMany, AgreesWithClosedForm) {
  const auto r = run_many(baseline(100'000), 16);
  EXPECT_EQ(r.replications, 16u);
  ASSERT_TRUE(r.via.stderr_);
  EXPECT_LE(std::abs(r.via.mean - 0.75), 4 * *r.via.stderr_);
}

TEST(RunMany, IndependentOfThreadCount) {
  const auto c = baseline(20'000);
  setenv("SEMVIA_THREADS", "1", 1);
  const auto serial = run_many(c, 6);
  setenv("SEMVIA_THREADS", "4", 1);
  const auto parallel = run_many(c, 6);
  unsetenv("SEMVIA_THREADS");
  EXPECT_EQ(serial.via.mean, parallel.via.mean);
  EXPECT_EQ(*serial.aoii.stderr_, *parallel.aoii.stderr_);
}

TEST(Compare, ThresholdArithmetic) {
  MetricsSummary s;
  s.via = {0.752, 0.003};
  s.p_e = {0.35, 0.002};
  analytic::AnalyticReport a;
  a.avg_via = 0.75;
  a.p_e = 0.3;
  const auto cmp = compare(s, a, 4.0);
  ASSERT_EQ(cmp.checks.size(), 5u);
  EXPECT_TRUE(cmp.checks[0].pass);
  EXPECT_FALSE(cmp.checks[3].pass);
  EXPECT_FALSE(cmp.checks[1].analytic.has_value());
  EXPECT_TRUE(cmp.checks[1].pass);
  EXPECT_FALSE(cmp.all_pass());
}

TEST(Compare, RelativeFallbackWithoutStderr) {
  MetricsSummary s;
  s.aoii = {1.015, std::nullopt};
  analytic::AnalyticReport a;
  a.avg_aoii = 1.0;
  EXPECT_TRUE(compare(s, a, 4.0).checks[2].pass);
  s.aoii.mean = 1.03;
  EXPECT_FALSE(compare(s, a, 4.0).checks[2].pass);
}

TEST(Invariants, LongRunsPerPolicy) {
  for (const auto& pol : {Policy::rs(0.3), Policy::mrs(0.2, 0.7), Policy::change_aware(),
                          Policy::semantics_aware()}) {
    auto c = baseline(100'000);
    c.source = SourceParams(0.7, 0.4);
    c.channel = ChannelParams(0.3);
    c.policy = pol;
    EXPECT_EQ(run(c).invariant_violations, 0u) << pol.label();
  }
}
