#include "semvia/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "semvia/analytic.hpp"
#include "semvia/errors.hpp"

namespace semvia::opt {

namespace {

struct Candidate {
  double q1 = 0.0;
  double q2 = 0.0;
  double value = INFINITY;
  double cost = 0.0;
  bool found = false;
};

/// Prefers the lower objective; within kTieTolerance, the smaller q1 and then q2.
void offer(Candidate& best, double q1, double q2, double value, double cost) {
  if (!best.found || value < best.value - kTieTolerance ||
      (std::abs(value - best.value) <= kTieTolerance &&
       std::pair(q1, q2) < std::pair(best.q1, best.q2))) {
    best = {q1, q2, value, cost, true};
  }
}

std::vector<double> axis(double lo, double hi, double step) {
  std::vector<double> out;
  const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  for (long i = 0; i <= n; ++i) out.push_back(std::min(hi, lo + static_cast<double>(i) * step));
  if (hi - out.back() > 1e-12) out.push_back(hi);
  return out;
}

bool within_budget(double cost, const CostBudget& budget) {
  return cost <= budget.delta_max() + kCostSlack;
}

template <class Points>
Candidate search(Objective objective, const SourceParams& s, const ChannelParams& c,
                 const CostBudget& budget, const Points& points, Candidate best = {}) {
  for (const auto& [q1, q2] : points) {
    if (q1 == 0.0 && q2 == 0.0) continue;
    const auto pol = Policy::mrs(q1, q2);
    const double cost = analytic::sampling_cost_rate(pol, s, c, budget.delta());
    if (!within_budget(cost, budget)) continue;
    offer(best, q1, q2, objective_value(objective, pol, s, c), cost);
  }
  return best;
}

OptResult mrs_result(Family family, Objective objective, const SourceParams& s,
                     const ChannelParams& c, const CostBudget& budget, const Candidate& best) {
  OptResult r;
  r.family = family;
  r.objective = objective;
  if (!best.found) {
    r.degenerate = true;
    r.note = "only q1 = q2 = 0 fits the budget on this grid; metric undefined";
    return r;
  }
  const auto pol = Policy::mrs(best.q1, best.q2);
  r.feasible = true;
  r.policy = pol;
  r.objective_value = best.value;
  r.cost_rate = best.cost;
  r.p_e = analytic::reconstruction_error(pol, s, c);
  r.cost_binding = std::abs(best.cost - budget.delta_max()) <= 1e-6 * budget.delta();
  return r;
}

void require_grid_step(double grid_step) {
  if (!(grid_step > 0.0 && grid_step <= 0.1)) {
    throw DomainError("grid_step must lie in (0, 0.1]; got " + std::to_string(grid_step));
  }
}

void require_objective(Objective objective) {
  if (objective == Objective::via) {
    throw UnsupportedPolicy("the VIA problem is defined for the RSC family only");
  }
}

}  // namespace

std::string_view to_string(Objective o) noexcept {
  switch (o) {
    case Objective::via: return "via";
    case Objective::aoiv: return "aoiv";
    case Objective::aoii: return "aoii";
  }
  return "?";
}

std::string_view to_string(Family f) noexcept {
  switch (f) {
    case Family::rsc: return "rsc";
    case Family::mrsc: return "mrsc";
    case Family::mrsc_equal: return "mrsc_equal";
    case Family::change_aware: return "change_aware";
    case Family::semantics_aware: return "semantics_aware";
  }
  return "?";
}

Objective parse_objective(std::string_view s) {
  if (s == "via") return Objective::via;
  if (s == "aoiv") return Objective::aoiv;
  if (s == "aoii") return Objective::aoii;
  throw DomainError("unknown objective '" + std::string(s) + "' (expected via, aoiv or aoii)");
}

CostBudget::CostBudget(double delta, double delta_max) : delta_(delta), delta_max_(delta_max) {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw DomainError("delta must be positive");
  const double eta = delta_max / delta;
  if (!(eta > 0.0 && eta <= 1.0 + 1e-12)) {
    throw DomainError("eta = delta_max / delta must lie in (0, 1]; got " + std::to_string(eta));
  }
  delta_max_ = std::min(delta_max, delta);
}

double objective_value(Objective objective, const Policy& policy, const SourceParams& s,
                       const ChannelParams& c) {
  switch (objective) {
    case Objective::via: return analytic::via_average(policy, s, c);
    case Objective::aoiv: return analytic::aoiv_average(policy, s, c);
    case Objective::aoii: return analytic::aoii_average(policy, s, c);
  }
  return NAN;
}

std::optional<double> via_rsc_lower_bound(const SourceParams& s, const ChannelParams& c,
                                          double e_max) {
  const double p = s.p(), q = s.q(), ps = c.ps();
  const double num = 2.0 * p * q - e_max * (p + q) * (p + q);
  const double den = 2.0 * p * q * ps + e_max * (p + q) * (1.0 - p - q) * ps;
  if (num <= 0.0) return 0.0;
  if (!(den > 0.0)) return std::nullopt;
  return num / den;
}

OptResult solve_via_rsc(const SourceParams& s, const ChannelParams& c, const CostBudget& budget,
                        double e_max) {
  if (!(e_max > 0.0 && e_max <= 1.0)) throw DomainError("e_max must lie in (0, 1]");
  OptResult r;
  r.family = Family::rsc;
  r.objective = Objective::via;
  const auto lower = via_rsc_lower_bound(s, c, e_max);
  const double eta = budget.eta();
  if (!lower) {
    r.note = "error constraint cannot be met by any sampling probability";
    return r;
  }
  if (*lower > eta + kCostSlack) {
    r.note = "error constraint needs p_a >= " + std::to_string(*lower) + " > eta";
    return r;
  }
  const auto pol = Policy::rs(eta);
  r.feasible = true;
  r.policy = pol;
  r.objective_value = analytic::via_average(pol, s, c);
  r.cost_rate = analytic::sampling_cost_rate(pol, s, c, budget.delta());
  r.p_e = analytic::reconstruction_error(pol, s, c);
  r.cost_binding = true;
  r.error_binding = std::abs(*r.p_e - e_max) <= 1e-9;
  return r;
}

OptResult solve_rsc(Objective objective, const SourceParams& s, const ChannelParams& c,
                    const CostBudget& budget) {
  require_objective(objective);
  const auto pol = Policy::rs(budget.eta());
  OptResult r;
  r.family = Family::rsc;
  r.objective = objective;
  r.feasible = true;
  r.policy = pol;
  r.objective_value = objective_value(objective, pol, s, c);
  r.cost_rate = analytic::sampling_cost_rate(pol, s, c, budget.delta());
  r.p_e = analytic::reconstruction_error(pol, s, c);
  r.cost_binding = true;
  return r;
}

double q_star_equal(const SourceParams& s, const ChannelParams& c, double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) throw DomainError("eta must lie in (0, 1]");
  const double p = s.p(), q = s.q(), ps = c.ps();
  const double lift = eta * (p + q) * (1.0 - p - q) * ps;
  if (lift >= 2.0 * p * q) return 1.0;
  return std::min(1.0, eta * (p + q) * (p + q) / (2.0 * p * q - lift));
}

OptResult solve_mrsc_equal(Objective objective, const SourceParams& s, const ChannelParams& c,
                           const CostBudget& budget) {
  require_objective(objective);
  const double qa = q_star_equal(s, c, budget.eta());
  const auto pol = Policy::mrs(qa, qa);
  Candidate best{qa, qa, objective_value(objective, pol, s, c),
                 analytic::sampling_cost_rate(pol, s, c, budget.delta()), true};
  return mrs_result(Family::mrsc_equal, objective, s, c, budget, best);
}

OptResult solve_mrsc(Objective objective, const SourceParams& s, const ChannelParams& c,
                     const CostBudget& budget, double grid_step) {
  require_objective(objective);
  require_grid_step(grid_step);
  const auto grid = axis(0.0, 1.0, grid_step);
  const auto n = grid.size();
  // Coarse pass, remembering the best feasible point of every row and column.
  std::vector<Candidate> row_best(n), col_best(n);
  Candidate best;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double q1 = grid[i], q2 = grid[j];
      if (q1 == 0.0 && q2 == 0.0) continue;
      const auto pol = Policy::mrs(q1, q2);
      const double cost = analytic::sampling_cost_rate(pol, s, c, budget.delta());
      if (!within_budget(cost, budget)) continue;
      const double value = objective_value(objective, pol, s, c);
      offer(row_best[i], q1, q2, value, cost);
      offer(col_best[j], q1, q2, value, cost);
      offer(best, q1, q2, value, cost);
    }
  }
  if (best.found) {
    // Refine around the incumbent and every row/column leader.
    std::vector<std::pair<double, double>> centres;
    for (const auto* leaders : {&row_best, &col_best}) {
      for (const auto& cand : *leaders) {
        if (cand.found) centres.emplace_back(cand.q1, cand.q2);
      }
    }
    std::sort(centres.begin(), centres.end());
    centres.erase(std::unique(centres.begin(), centres.end()), centres.end());
    const double fine = grid_step / 10.0;
    for (const auto& [c1, c2] : centres) {
      const auto a1 = axis(std::max(0.0, c1 - grid_step), std::min(1.0, c1 + grid_step), fine);
      const auto a2 = axis(std::max(0.0, c2 - grid_step), std::min(1.0, c2 + grid_step), fine);
      std::vector<std::pair<double, double>> local;
      local.reserve(a1.size() * a2.size());
      for (double q1 : a1)
        for (double q2 : a2) local.emplace_back(q1, q2);
      best = search(objective, s, c, budget, local, best);
    }
  }
  return mrs_result(Family::mrsc, objective, s, c, budget, best);
}

OptResult solve_mrsc_diagonal(Objective objective, const SourceParams& s, const ChannelParams& c,
                              const CostBudget& budget, double grid_step) {
  require_objective(objective);
  require_grid_step(grid_step);
  std::vector<std::pair<double, double>> diag;
  for (double v : axis(0.0, 1.0, grid_step)) diag.emplace_back(v, v);
  auto best = search(objective, s, c, budget, diag);
  if (best.found) {
    diag.clear();
    for (double v : axis(std::max(0.0, best.q1 - grid_step), std::min(1.0, best.q1 + grid_step),
                         grid_step / 10.0)) {
      diag.emplace_back(v, v);
    }
    best = search(objective, s, c, budget, diag, best);
  }
  return mrs_result(Family::mrsc_equal, objective, s, c, budget, best);
}

std::array<OptResult, 2> classify_fixed_policies(Objective objective, const SourceParams& s,
                                                 const ChannelParams& c, const CostBudget& budget) {
  std::array<OptResult, 2> out;
  const std::array<std::pair<Family, Policy>, 2> fixed{{
      {Family::change_aware, Policy::change_aware()},
      {Family::semantics_aware, Policy::semantics_aware()},
  }};
  for (std::size_t i = 0; i < fixed.size(); ++i) {
    const auto& [family, pol] = fixed[i];
    auto& r = out[i];
    r.family = family;
    r.objective = objective;
    r.policy = pol;
    r.cost_rate = analytic::sampling_cost_rate(pol, s, c, budget.delta());
    r.p_e = analytic::reconstruction_error(pol, s, c);
    r.feasible = within_budget(r.cost_rate, budget);
    if (objective == Objective::via && family == Family::semantics_aware) {
      r.note = "no closed-form average VIA";
    } else {
      r.objective_value = objective_value(objective, pol, s, c);
    }
    if (!r.feasible) r.note = "fixed cost exceeds delta_max";
  }
  return out;
}

}  // namespace semvia::opt
