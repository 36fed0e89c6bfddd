#include "semvia/policy.hpp"

#include <cmath>
#include <sstream>

#include "semvia/errors.hpp"

namespace semvia {

namespace {

void require_probability(double v, const char* what) {
  if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
    throw DomainError(std::string(what) + " must lie in [0, 1]; got " + std::to_string(v));
  }
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

}  // namespace

Policy Policy::rs(double p_a) {
  require_probability(p_a, "p_a");
  return Policy(RandomizedStationary{p_a});
}

Policy Policy::mrs(double q1, double q2) {
  require_probability(q1, "q1");
  require_probability(q2, "q2");
  return Policy(ModifiedRandomizedStationary{q1, q2});
}

std::string_view to_string(PolicyKind kind) noexcept {
  switch (kind) {
    case PolicyKind::rs: return "rs";
    case PolicyKind::mrs: return "mrs";
    case PolicyKind::change_aware: return "change_aware";
    case PolicyKind::semantics_aware: return "semantics_aware";
  }
  return "unknown";
}

std::string_view Policy::name() const noexcept { return to_string(kind()); }

std::string Policy::label() const {
  std::ostringstream os;
  os << name();
  std::visit(Overloaded{
                 [&](const RandomizedStationary& r) { os << "(p_a=" << r.p_a << ")"; },
                 [&](const ModifiedRandomizedStationary& m) {
                   os << "(q1=" << m.q1 << ",q2=" << m.q2 << ")";
                 },
                 [](const auto&) {},
             },
             value_);
  return os.str();
}

double sampling_probability(const Policy& policy, const DecisionContext& ctx) noexcept {
  return std::visit(
      Overloaded{
          [](const RandomizedStationary& r) { return r.p_a; },
          [&](const ModifiedRandomizedStationary& m) {
            if (ctx.x_t == ctx.xhat_prev) return 0.0;
            return ctx.x_prev == ctx.xhat_prev ? m.q1 : m.q2;
          },
          [&](const ChangeAware&) { return ctx.x_t != ctx.x_prev ? 1.0 : 0.0; },
          [&](const SemanticsAware&) { return ctx.x_t != ctx.xhat_prev ? 1.0 : 0.0; },
      },
      policy.value());
}

bool decide_sample(const Policy& policy, const DecisionContext& ctx, double u) noexcept {
  return u < sampling_probability(policy, ctx);
}

}  // namespace semvia
