#pragma once

#include <string>
#include <string_view>
#include <variant>

#include "semvia/model.hpp"

namespace semvia {

/// Randomized stationary: sample every slot with probability p_a.
struct RandomizedStationary {
  double p_a = 0.0;
  friend bool operator==(const RandomizedStationary&, const RandomizedStationary&) = default;
};

/// Modified randomized stationary. Never samples when X(t) == X̂(t-1). Otherwise samples
/// with q1 if the system was in sync at t-1, with q2 if it was already erroneous.
struct ModifiedRandomizedStationary {
  double q1 = 0.0;
  double q2 = 0.0;
  friend bool operator==(const ModifiedRandomizedStationary&,
                         const ModifiedRandomizedStationary&) = default;
};

/// Samples iff X(t) != X(t-1).
struct ChangeAware {
  friend bool operator==(const ChangeAware&, const ChangeAware&) = default;
};

/// Samples iff X(t) != X̂(t-1).
struct SemanticsAware {
  friend bool operator==(const SemanticsAware&, const SemanticsAware&) = default;
};

enum class PolicyKind { rs, mrs, change_aware, semantics_aware };

class Policy {
 public:
  using Variant =
      std::variant<RandomizedStationary, ModifiedRandomizedStationary, ChangeAware, SemanticsAware>;

  static Policy rs(double p_a);
  static Policy mrs(double q1, double q2);
  static Policy change_aware() { return Policy(ChangeAware{}); }
  static Policy semantics_aware() { return Policy(SemanticsAware{}); }

  PolicyKind kind() const noexcept { return static_cast<PolicyKind>(value_.index()); }
  const Variant& value() const noexcept { return value_; }

  /// Short identifier used in configs and CSV output: rs, mrs, change_aware, semantics_aware.
  std::string_view name() const noexcept;
  /// Name with parameters, e.g. "rs(p_a=0.5)".
  std::string label() const;

  const RandomizedStationary& as_rs() const { return std::get<RandomizedStationary>(value_); }
  const ModifiedRandomizedStationary& as_mrs() const {
    return std::get<ModifiedRandomizedStationary>(value_);
  }

  friend bool operator==(const Policy&, const Policy&) = default;

 private:
  explicit Policy(Variant v) : value_(std::move(v)) {}
  Variant value_;
};

std::string_view to_string(PolicyKind kind) noexcept;

/// What the sampler sees at slot t (ACK feedback makes X̂(t-1) known).
struct DecisionContext {
  State x_t = 0;
  State x_prev = 0;
  State xhat_prev = 0;
};

/// Probability that the policy samples in the given context.
double sampling_probability(const Policy& policy, const DecisionContext& ctx) noexcept;

/// Consumes exactly one uniform; deterministic policies ignore its value.
bool decide_sample(const Policy& policy, const DecisionContext& ctx, double u) noexcept;

}  // namespace semvia
