#pragma once

#include <array>
#include <cstdint>

#include "semvia/rng.hpp"

namespace semvia {

/// Binary source / reconstruction state, always 0 or 1.
using State = std::uint8_t;

/// Two-state Markov source: p = Pr[0 -> 1], q = Pr[1 -> 0], both strictly inside (0, 1).
class SourceParams {
 public:
  SourceParams(double p, double q);

  double p() const noexcept { return p_; }
  double q() const noexcept { return q_; }

  friend bool operator==(const SourceParams&, const SourceParams&) = default;

 private:
  double p_;
  double q_;
};

/// Packet-erasure channel with per-sample decoding probability p_s in (0, 1].
class ChannelParams {
 public:
  explicit ChannelParams(double ps);

  double ps() const noexcept { return ps_; }

  friend bool operator==(const ChannelParams&, const ChannelParams&) = default;

 private:
  double ps_;
};

/// The three uniforms consumed by one slot, always in this order.
struct SlotDraws {
  double source = 0.0;
  double sample = 0.0;
  double channel = 0.0;
};

/// Draws for slot t >= 2 of the stream with the given seed (slot 1 is the fixed initial state).
SlotDraws draws_for_slot(std::uint64_t seed, std::uint64_t slot) noexcept;

State step_source(const SourceParams& params, State x_prev, double u) noexcept;

bool transmit(const ChannelParams& channel, double u) noexcept;

/// Stationary marginals (Pr[X = 0], Pr[X = 1]) = (q, p) / (p + q).
std::array<double, 2> source_stationary(const SourceParams& params) noexcept;

/// One-step transition probability Pr[X(t) = to | X(t-1) = from].
double source_transition(const SourceParams& params, State from, State to) noexcept;

}  // namespace semvia
