#include "semvia/metrics.hpp"

namespace semvia {

State update_reconstruction(State xhat_prev, State x_t, bool sampled, bool delivered) noexcept {
  return (sampled && delivered) ? x_t : xhat_prev;
}

std::uint64_t update_via(std::uint64_t via_prev, State x_t, State x_prev, bool sampled,
                         bool delivered) noexcept {
  if (sampled && delivered) return 0;
  return x_t == x_prev ? via_prev : via_prev + 1;
}

std::uint64_t update_aoiv(std::uint64_t aoiv_prev, State x_t, State x_prev,
                          State xhat_t) noexcept {
  if (x_t == xhat_t) return 0;
  return x_t == x_prev ? aoiv_prev : aoiv_prev + 1;
}

std::uint64_t update_aoii(std::uint64_t aoii_prev, State x_t, State xhat_t) noexcept {
  return x_t != xhat_t ? aoii_prev + 1 : 0;
}

SlotOutcome apply_slot(SystemState& s, State x_t, bool sampled, bool delivered) noexcept {
  const State x_prev = s.x;
  const State xhat_t = update_reconstruction(s.xhat, x_t, sampled, delivered);
  s.via = update_via(s.via, x_t, x_prev, sampled, delivered);
  s.aoiv = update_aoiv(s.aoiv, x_t, x_prev, xhat_t);
  s.aoii = update_aoii(s.aoii, x_t, xhat_t);
  s.x = x_t;
  s.xhat = xhat_t;
  return {sampled, sampled && delivered, x_t != x_prev, x_t == xhat_t};
}

SlotOutcome advance(SystemState& s, const SourceParams& source, const ChannelParams& channel,
                    const Policy& policy, const SlotDraws& draws) noexcept {
  const State x_t = step_source(source, s.x, draws.source);
  const bool sampled = decide_sample(policy, {x_t, s.x, s.xhat}, draws.sample);
  const bool success = transmit(channel, draws.channel);
  return apply_slot(s, x_t, sampled, sampled && success);
}

bool pathwise_invariants_hold(const SystemState& s) noexcept {
  return s.aoiv <= s.via && s.aoiv <= s.aoii && s.aoiv <= 1 && ((s.aoii == 0) == (s.x == s.xhat));
}

std::vector<TraceRow> reference_trace() {
  return {{1, 0, 0, 0}, {2, 0, 0, 0}, {3, 1, 1, 1}, {4, 1, 1, 2}, {5, 2, 0, 0}, {6, 0, 0, 0}};
}

std::vector<ScriptedSlot> reference_script() {
  return {
      {0, false, false},  // t=2: no change
      {1, true, false},   // t=3: change to 1, transmission fails
      {1, false, false},  // t=4: no change, still erroneous
      {0, true, false},   // t=5: change back to 0, transmission fails
      {0, true, true},    // t=6: no change, delivery succeeds
  };
}

std::vector<TraceRow> replay(const std::vector<ScriptedSlot>& script) {
  SystemState s;
  std::vector<TraceRow> rows{{1, s.via, s.aoiv, s.aoii}};
  std::uint64_t t = 1;
  for (const auto& slot : script) {
    apply_slot(s, slot.x, slot.sampled, slot.delivered);
    rows.push_back({++t, s.via, s.aoiv, s.aoii});
  }
  return rows;
}

}  // namespace semvia
