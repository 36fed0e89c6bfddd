#pragma once

// Closed-form stationary quantities for the four sampling policies.
//
// Notation used throughout: x = p_a * p_s is the per-slot delivery probability of the
// randomized stationary policy; for the modified policy y1 = q1 * p_s and y2 = q2 * p_s.

#include <array>
#include <cstdint>
#include <optional>

#include "semvia/model.hpp"
#include "semvia/policy.hpp"

namespace semvia::analytic {

// Auxiliary scalar functions --------------------------------------------------------------

/// Phi(z) = z + (1 - z) * x, with x the effective delivery probability.
double phi(double z, double x) noexcept;
/// Psi(z) = z + (1 - z) * p_s.
double psi(double z, double ps) noexcept;

/// Exponents of the VIA pmf; k(i) + w(i) = i + 1.
std::uint64_t k_index(std::uint64_t i) noexcept;
std::uint64_t w_index(std::uint64_t i) noexcept;

/// Normaliser of the modified policy's stationary distributions.
double mrs_f(const SourceParams& s, const ChannelParams& c, double q1, double q2) noexcept;
/// Numerator of Pr[AoII = 0] for the modified policy.
double mrs_g(const SourceParams& s, const ChannelParams& c, double q1, double q2) noexcept;
/// Numerator of Pr[AoII = i], i >= 1, for the modified policy.
double mrs_h(const SourceParams& s, const ChannelParams& c, double q1, double q2,
             std::uint64_t i) noexcept;
/// Numerator of the modified policy's average AoII.
double mrs_k(const SourceParams& s, const ChannelParams& c, double q1, double q2) noexcept;

// Distributions ---------------------------------------------------------------------------

struct ViaPmfEntry {
  double state0 = 0.0;  ///< Pr[X = 0, VIA = i]
  double state1 = 0.0;  ///< Pr[X = 1, VIA = i]
  double total = 0.0;   ///< Pr[VIA = i]
};

/// Stationary (X, VIA) probabilities at level i. RS and change-aware only.
ViaPmfEntry via_pmf(const Policy& policy, const SourceParams& s, const ChannelParams& c,
                    std::uint64_t i);

/// Geometric decay ratio of the VIA pmf per level (the convergence quantity of the
/// average). RS and change-aware only.
double via_decay_ratio(const Policy& policy, const SourceParams& s, const ChannelParams& c);

/// Stationary (X, X̂, AoIV) distribution, indexed by 4*x + 2*xhat + aoiv.
struct AoivDistribution {
  std::array<double, 8> pi{};
  double at(State x, State xhat, int aoiv) const { return pi[4 * x + 2 * xhat + aoiv]; }
  double sum() const noexcept;
};

AoivDistribution aoiv_stationary(const Policy& policy, const SourceParams& s,
                                 const ChannelParams& c);

/// Stationary (X, X̂) distribution, indexed by 2*x + xhat.
struct SyncDistribution {
  std::array<double, 4> pi{};
  double at(State x, State xhat) const { return pi[2 * x + xhat]; }
  double sum() const noexcept;
};

SyncDistribution sync_stationary(const Policy& policy, const SourceParams& s,
                                 const ChannelParams& c);

double aoii_pmf(const Policy& policy, const SourceParams& s, const ChannelParams& c,
                std::uint64_t i);

// Averages --------------------------------------------------------------------------------

double via_average(const Policy& policy, const SourceParams& s, const ChannelParams& c);
double aoiv_average(const Policy& policy, const SourceParams& s, const ChannelParams& c);
double aoii_average(const Policy& policy, const SourceParams& s, const ChannelParams& c);

/// Time-averaged reconstruction error Pr[X != X̂].
double reconstruction_error(const Policy& policy, const SourceParams& s, const ChannelParams& c);

/// Average VIA written as a function of the reconstruction error. RS and change-aware only.
double via_from_pe(const Policy& policy, const SourceParams& s, const ChannelParams& c,
                   double p_e);

/// Time-averaged sampling cost delta * Pr[sample].
double sampling_cost_rate(const Policy& policy, const SourceParams& s, const ChannelParams& c,
                          double delta);

/// Cost of the modified policy restricted to q1 = q2 = q_a.
double mrs_equal_cost_rate(const SourceParams& s, const ChannelParams& c, double q_a,
                           double delta);

/// RS sampling probability at which RS and change-aware have equal average VIA.
double rs_change_aware_via_threshold(const SourceParams& s, const ChannelParams& c) noexcept;

// Report ----------------------------------------------------------------------------------

/// Closed-form summary. A field is empty when no closed form exists for the policy
/// (average VIA for modified and semantics-aware) or when it diverges (RS with p_a*p_s = 0).
struct AnalyticReport {
  std::optional<double> avg_via;
  std::optional<double> avg_aoiv;
  std::optional<double> avg_aoii;
  std::optional<double> p_e;
  std::optional<double> cost_rate;
  bool via_divergent = false;
};

AnalyticReport evaluate(const Policy& policy, const SourceParams& s, const ChannelParams& c,
                        double delta = 1.0);

}  // namespace semvia::analytic
