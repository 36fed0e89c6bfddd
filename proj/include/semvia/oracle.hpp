#pragma once

// Brute-force verification layer. Chains are assembled only from the slot dynamics
// (source law, policy sampling probabilities, channel, reconstruction rule and metric
// recursions) and solved numerically; nothing here evaluates a closed form.

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "semvia/model.hpp"
#include "semvia/policy.hpp"

namespace semvia::oracle {

/// Composite chain state. Components that a chain does not track are -1:
/// VIA chain (x, -1, via), sync chain (x, xhat, -1), AoIV chain (x, xhat, aoiv).
struct ChainState {
  int x = 0;
  int xhat = -1;
  std::int64_t level = -1;

  friend auto operator<=>(const ChainState&, const ChainState&) = default;
};

struct ExplicitChain {
  std::vector<ChainState> states;
  Eigen::SparseMatrix<double, Eigen::RowMajor> transitions;
  std::optional<std::int64_t> truncation;

  std::size_t size() const noexcept { return states.size(); }
  /// Index of a state, or nullopt when it is not part of the chain.
  std::optional<std::size_t> index_of(const ChainState& s) const;
  /// Largest |row sum - 1| over all rows.
  double max_row_defect() const;
};

/// Truncation level used by default for the VIA chain: ceil(log 1e-12 / log r), clamped
/// to [50, 5000], where r is the per-level geometric decay of the chain.
std::int64_t default_via_truncation(const Policy& policy, const SourceParams& s,
                                    const ChannelParams& c);

/// (X, VIA) chain truncated at level n; increments past n are folded into level n.
/// RS and change-aware only (their sampling ignores X̂).
ExplicitChain build_via_chain(const Policy& policy, const SourceParams& s, const ChannelParams& c,
                              std::int64_t n);

/// (X, X̂) chain. Throws NotIrreducible unless all four joint states communicate.
ExplicitChain build_joint_sync_chain(const Policy& policy, const SourceParams& s,
                                     const ChannelParams& c);

/// (X, X̂, AoIV) chain over the states reachable from (0, 0, 0).
ExplicitChain build_aoiv_chain(const Policy& policy, const SourceParams& s,
                               const ChannelParams& c);

/// Stationary vector v with v P = v and sum(v) = 1. Dense LU for small chains, ILU-
/// preconditioned BiCGSTAB for large ones, then power iteration if the residual is still
/// above tol. Throws NoConvergence if it stays there after max_iterations.
Eigen::VectorXd stationary_solve(const ExplicitChain& chain, double tol = 1e-13,
                                 std::size_t max_iterations = 2'000'000);

/// Infinity norm of v P - v.
double stationary_residual(const ExplicitChain& chain, const Eigen::VectorXd& v);

// Derived quantities ----------------------------------------------------------------------

struct ViaOracle {
  std::vector<double> pmf0;  ///< Pr[X = 0, VIA = i], i = 0..n
  std::vector<double> pmf1;  ///< Pr[X = 1, VIA = i]
  double mean = 0.0;
  double tail_mass = 0.0;    ///< stationary mass at the truncation level
  std::int64_t truncation = 0;
};

ViaOracle via_oracle(const Policy& policy, const SourceParams& s, const ChannelParams& c,
                     std::optional<std::int64_t> n = std::nullopt);

/// Stationary (X, X̂, AoIV) probabilities indexed 4*x + 2*xhat + aoiv. Throws if any
/// reachable state carries AoIV > 1.
std::array<double, 8> aoiv_oracle(const Policy& policy, const SourceParams& s,
                                  const ChannelParams& c);

/// Stationary (X, X̂) probabilities indexed 2*x + xhat.
std::array<double, 4> sync_oracle(const Policy& policy, const SourceParams& s,
                                  const ChannelParams& c);

/// Pr[AoII = i] for i = 0..i_max by first-step analysis on the (X, X̂) chain: a sync
/// state followed by exactly i erroneous slots.
std::vector<double> aoii_pmf_oracle(const Policy& policy, const SourceParams& s,
                                    const ChannelParams& c, std::uint64_t i_max);

/// E[AoII] = pi_sync P_se (I - Q)^{-2} 1 with Q the erroneous-to-erroneous block.
double aoii_mean_oracle(const Policy& policy, const SourceParams& s, const ChannelParams& c);

/// Expected number of samples per slot under the stationary (X, X̂) law.
double sampling_rate_oracle(const Policy& policy, const SourceParams& s, const ChannelParams& c);

}  // namespace semvia::oracle
