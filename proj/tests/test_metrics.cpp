#include <gtest/gtest.h>

#include "semvia/metrics.hpp"
#include "semvia/rng.hpp"

using namespace semvia;

TEST(UpdateReconstruction, Examples) {
  EXPECT_EQ(update_reconstruction(0, 1, true, true), 1);
  EXPECT_EQ(update_reconstruction(0, 1, true, false), 0);
  EXPECT_EQ(update_reconstruction(1, 1, false, false), 1);
}

TEST(UpdateVia, Examples) {
  EXPECT_EQ(update_via(3, 0, 1, true, true), 0u);
  EXPECT_EQ(update_via(3, 1, 1, false, false), 3u);
  EXPECT_EQ(update_via(3, 0, 1, true, false), 4u);
}

TEST(UpdateAoiv, Examples) {
  EXPECT_EQ(update_aoiv(1, 0, 1, 0), 0u);
  EXPECT_EQ(update_aoiv(1, 1, 1, 0), 1u);
  EXPECT_EQ(update_aoiv(0, 1, 0, 0), 1u);
}

TEST(UpdateAoii, Examples) {
  EXPECT_EQ(update_aoii(5, 1, 0), 6u);
  EXPECT_EQ(update_aoii(5, 1, 1), 0u);
  EXPECT_EQ(update_aoii(0, 0, 0), 0u);
}

TEST(ReferenceTrace, KnownRows) {
  const auto rows = reference_trace();
  ASSERT_EQ(rows.size(), 6u);
  EXPECT_EQ(rows[0].t, 1u);
  EXPECT_EQ(rows[0].via + rows[0].aoiv + rows[0].aoii, 0u);
  EXPECT_EQ(rows[3].via, 1u);
  EXPECT_EQ(rows[3].aoiv, 1u);
  EXPECT_EQ(rows[3].aoii, 2u);
  EXPECT_EQ(rows[4].via, 2u);
  EXPECT_EQ(rows[4].aoiv, 0u);
  EXPECT_EQ(rows[4].aoii, 0u);
}

TEST(ReferenceTrace, ReplayReproducesIt) {
  const auto replayed = replay(reference_script());
  const auto expected = reference_trace();
  ASSERT_EQ(replayed.size(), expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    EXPECT_EQ(replayed[i].t, expected[i].t);
    EXPECT_EQ(replayed[i].via, expected[i].via) << "t=" << expected[i].t;
    EXPECT_EQ(replayed[i].aoiv, expected[i].aoiv) << "t=" << expected[i].t;
    EXPECT_EQ(replayed[i].aoii, expected[i].aoii) << "t=" << expected[i].t;
  }
}

TEST(ApplySlot, OutcomeFlags) {
  SystemState s;
  auto out = apply_slot(s, 1, true, false);
  EXPECT_TRUE(out.sampled);
  EXPECT_FALSE(out.delivered);
  EXPECT_TRUE(out.source_changed);
  EXPECT_FALSE(out.synced);
  out = apply_slot(s, 1, true, true);
  EXPECT_TRUE(out.synced);
  EXPECT_EQ(s.xhat, 1);
}

TEST(Invariants, HoldOnRandomTrajectories) {
  const std::vector<Policy> policies{Policy::rs(0.4), Policy::mrs(0.3, 0.9), Policy::change_aware(),
                                     Policy::semantics_aware(), Policy::rs(0.0)};
  std::uint64_t checked = 0;
  for (std::uint64_t trial = 0; trial < 20; ++trial) {
    const double p = 0.05 + 0.9 * rng::uniform_at(trial, 0);
    const double q = 0.05 + 0.9 * rng::uniform_at(trial, 1);
    const double ps = 0.05 + 0.95 * rng::uniform_at(trial, 2);
    const SourceParams src(p, q);
    const ChannelParams ch(ps);
    for (const auto& pol : policies) {
      SystemState s;
      for (std::uint64_t t = 2; t < 1002; ++t) {
        advance(s, src, ch, pol, draws_for_slot(trial * 31 + 7, t));
        ASSERT_TRUE(pathwise_invariants_hold(s)) << pol.label() << " t=" << t;
        ++checked;
      }
    }
  }
  EXPECT_GE(checked, 100000u);
}

TEST(Advance, SameSeedSamePath) {
  const SourceParams src(0.3, 0.4);
  const ChannelParams ch(0.6);
  SystemState a, b;
  for (std::uint64_t t = 2; t < 5000; ++t) {
    advance(a, src, ch, Policy::rs(0.5), draws_for_slot(3, t));
    advance(b, src, ch, Policy::rs(0.5), draws_for_slot(3, t));
    ASSERT_EQ(a, b);
  }
}

TEST(Advance, CommonRandomNumbersAcrossPolicies) {
  const SourceParams src(0.3, 0.4);
  const ChannelParams ch(0.6);
  SystemState a, b;
  for (std::uint64_t t = 2; t < 5000; ++t) {
    advance(a, src, ch, Policy::change_aware(), draws_for_slot(8, t));
    advance(b, src, ch, Policy::semantics_aware(), draws_for_slot(8, t));
    ASSERT_EQ(a.x, b.x);
  }
}
