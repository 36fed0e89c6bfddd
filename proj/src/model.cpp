#include "semvia/model.hpp"

#include <cmath>
#include <string>

#include "semvia/errors.hpp"

namespace semvia {

namespace {

bool open_unit(double v) { return std::isfinite(v) && v > 0.0 && v < 1.0; }

}  // namespace

SourceParams::SourceParams(double p, double q) : p_(p), q_(q) {
  if (!open_unit(p) || !open_unit(q)) {
    throw DomainError("source transition probabilities must lie in (0, 1); got p=" +
                      std::to_string(p) + ", q=" + std::to_string(q));
  }
}

ChannelParams::ChannelParams(double ps) : ps_(ps) {
  if (!std::isfinite(ps) || ps <= 0.0 || ps > 1.0) {
    throw DomainError("channel success probability must lie in (0, 1]; got p_s=" +
                      std::to_string(ps));
  }
}

SlotDraws draws_for_slot(std::uint64_t seed, std::uint64_t slot) noexcept {
  const std::uint64_t base = 3 * (slot - 2);
  return {rng::uniform_at(seed, base), rng::uniform_at(seed, base + 1),
          rng::uniform_at(seed, base + 2)};
}

State step_source(const SourceParams& params, State x_prev, double u) noexcept {
  if (x_prev == 0) return u < params.p() ? 1 : 0;
  return u < params.q() ? 0 : 1;
}

bool transmit(const ChannelParams& channel, double u) noexcept { return u < channel.ps(); }

std::array<double, 2> source_stationary(const SourceParams& params) noexcept {
  const double s = params.p() + params.q();
  return {params.q() / s, params.p() / s};
}

double source_transition(const SourceParams& params, State from, State to) noexcept {
  if (from == 0) return to == 1 ? params.p() : 1.0 - params.p();
  return to == 0 ? params.q() : 1.0 - params.q();
}

}  // namespace semvia
