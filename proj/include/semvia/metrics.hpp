#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "semvia/model.hpp"
#include "semvia/policy.hpp"

namespace semvia {

/// Joint state of source, reconstruction and the three age metrics at one slot.
struct SystemState {
  State x = 0;
  State xhat = 0;
  std::uint64_t via = 0;
  std::uint64_t aoiv = 0;
  std::uint64_t aoii = 0;

  friend bool operator==(const SystemState&, const SystemState&) = default;
};

struct SlotOutcome {
  bool sampled = false;
  bool delivered = false;
  bool source_changed = false;
  bool synced = false;
};

State update_reconstruction(State xhat_prev, State x_t, bool sampled, bool delivered) noexcept;

/// VIA: reset by a successful delivery, otherwise counts source changes.
std::uint64_t update_via(std::uint64_t via_prev, State x_t, State x_prev, bool sampled,
                         bool delivered) noexcept;

/// AoIV: counts source changes while X != X̂; xhat_t is the already-updated reconstruction.
std::uint64_t update_aoiv(std::uint64_t aoiv_prev, State x_t, State x_prev, State xhat_t) noexcept;

/// AoII: consecutive erroneous slots.
std::uint64_t update_aoii(std::uint64_t aoii_prev, State x_t, State xhat_t) noexcept;

/// Applies the metric recursions for one slot given the new source state and the
/// sample/delivery flags. Returns the outcome; `state` holds slot t afterwards.
SlotOutcome apply_slot(SystemState& state, State x_t, bool sampled, bool delivered) noexcept;

/// Full slot: source transition, policy decision, channel, reconstruction, metrics.
SlotOutcome advance(SystemState& state, const SourceParams& source, const ChannelParams& channel,
                    const Policy& policy, const SlotDraws& draws) noexcept;

/// True iff the pathwise orderings hold: AoIV <= VIA, AoIV <= AoII, AoIV in {0,1},
/// and AoII == 0 exactly when X == X̂.
bool pathwise_invariants_hold(const SystemState& state) noexcept;

struct TraceRow {
  std::uint64_t t = 0;
  std::uint64_t via = 0;
  std::uint64_t aoiv = 0;
  std::uint64_t aoii = 0;

  friend bool operator==(const TraceRow&, const TraceRow&) = default;
};

/// Per-slot inputs of the worked example (slots 2..6; slot 1 is X = X̂ = 0).
struct ScriptedSlot {
  State x = 0;
  bool sampled = false;
  bool delivered = false;
};

/// The worked example trace for t = 1..6, as tabulated values.
std::vector<TraceRow> reference_trace();

/// Slot inputs that produce the worked example.
std::vector<ScriptedSlot> reference_script();

/// Runs the metric recursions over a script starting from the all-zero state at t = 1.
std::vector<TraceRow> replay(const std::vector<ScriptedSlot>& script);

}  // namespace semvia
