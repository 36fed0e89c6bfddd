#pragma once

// Cost-constrained policy optimization: randomized stationary (RSC), modified randomized
// stationary (MRSC, general and equal-probability) and the two fixed policies.

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "semvia/model.hpp"
#include "semvia/policy.hpp"

namespace semvia::opt {

enum class Objective { via, aoiv, aoii };
enum class Family { rsc, mrsc, mrsc_equal, change_aware, semantics_aware };

std::string_view to_string(Objective o) noexcept;
std::string_view to_string(Family f) noexcept;
Objective parse_objective(std::string_view s);

/// Per-sample cost delta and per-slot ceiling delta_max; eta = delta_max / delta in (0, 1].
class CostBudget {
 public:
  CostBudget(double delta, double delta_max);
  static CostBudget from_eta(double eta, double delta = 1.0) { return {delta, eta * delta}; }

  double delta() const noexcept { return delta_; }
  double delta_max() const noexcept { return delta_max_; }
  double eta() const noexcept { return delta_max_ / delta_; }

 private:
  double delta_;
  double delta_max_;
};

inline constexpr double kCostSlack = 1e-9;
inline constexpr double kTieTolerance = 1e-12;
inline constexpr double kDefaultGridStep = 0.005;

struct OptResult {
  Family family = Family::rsc;
  Objective objective = Objective::aoiv;
  bool feasible = false;
  std::optional<Policy> policy;  ///< optimal parameters; empty when RSC/MRSC is infeasible
  double objective_value = 0.0;
  double cost_rate = 0.0;        ///< delta units per slot
  std::optional<double> p_e;     ///< reconstruction error at the optimum
  bool cost_binding = false;
  bool error_binding = false;
  bool degenerate = false;       ///< MRSC search collapsed to q1 = q2 = 0
  std::string note;
};

/// min average VIA over RS subject to cost <= delta_max and P_E <= e_max.
OptResult solve_via_rsc(const SourceParams& s, const ChannelParams& c, const CostBudget& budget,
                        double e_max);

/// Smallest p_a meeting P_E <= e_max, or nullopt if the bound is undefined.
std::optional<double> via_rsc_lower_bound(const SourceParams& s, const ChannelParams& c,
                                          double e_max);

/// min average AoIV or AoII over RS subject to the cost constraint (p_a* = eta).
OptResult solve_rsc(Objective objective, const SourceParams& s, const ChannelParams& c,
                    const CostBudget& budget);

/// Closed-form optimum of the MRS problem restricted to q1 = q2.
double q_star_equal(const SourceParams& s, const ChannelParams& c, double eta);

/// MRSC restricted to q1 = q2, solved with q_star_equal.
OptResult solve_mrsc_equal(Objective objective, const SourceParams& s, const ChannelParams& c,
                           const CostBudget& budget);

/// MRSC by grid search over (q1, q2) at grid_step, then one refinement pass at grid_step / 10
/// around the incumbent. (0, 0) is excluded.
OptResult solve_mrsc(Objective objective, const SourceParams& s, const ChannelParams& c,
                     const CostBudget& budget, double grid_step = kDefaultGridStep);

/// Grid search along the diagonal q1 = q2 only (same step/refinement rule as solve_mrsc).
OptResult solve_mrsc_diagonal(Objective objective, const SourceParams& s, const ChannelParams& c,
                              const CostBudget& budget, double grid_step = kDefaultGridStep);

/// Change-aware and semantics-aware, each feasible iff its fixed cost fits the budget.
std::array<OptResult, 2> classify_fixed_policies(Objective objective, const SourceParams& s,
                                                 const ChannelParams& c, const CostBudget& budget);

/// Objective value of a policy (VIA requires RS or change-aware).
double objective_value(Objective objective, const Policy& policy, const SourceParams& s,
                       const ChannelParams& c);

}  // namespace semvia::opt
