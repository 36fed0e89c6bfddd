#include "semvia/analytic.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "semvia/errors.hpp"

namespace semvia::analytic {

namespace {

/// Delivery probability of RS; requires an RS policy.
double rs_delivery(const Policy& policy, const ChannelParams& c) {
  return policy.as_rs().p_a * c.ps();
}

/// p + q + (1 - p - q) * x, the common denominator of the RS-type forms.
double rs_denominator(const SourceParams& s, double x) {
  return s.p() + s.q() + (1.0 - s.p() - s.q()) * x;
}

struct MrsTerms {
  double q1, q2, y1, y2;
  double lead0;  // q2 + p (q1 - q2)
  double lead1;  // q2 + q (q1 - q2)
  double a;      // p + (1 - p) y2
  double b;      // q + (1 - q) y2
  double f;
};

MrsTerms mrs_terms(const SourceParams& s, const ChannelParams& c, double q1, double q2) {
  MrsTerms t{q1, q2, q1 * c.ps(), q2 * c.ps(), 0, 0, 0, 0, 0};
  t.lead0 = q2 + s.p() * (q1 - q2);
  t.lead1 = q2 + s.q() * (q1 - q2);
  t.a = s.p() + (1.0 - s.p()) * t.y2;
  t.b = s.q() + (1.0 - s.q()) * t.y2;
  t.f = mrs_f(s, c, q1, q2);
  if (!(t.f > 0.0)) {
    throw DomainError("modified policy with q1 = q2 = 0 never samples; chain is not irreducible");
  }
  return t;
}

MrsTerms mrs_terms(const Policy& policy, const SourceParams& s, const ChannelParams& c) {
  const auto& m = policy.as_mrs();
  return mrs_terms(s, c, m.q1, m.q2);
}

/// RS-shaped (X, X̂, AoIV) distribution for a per-slot delivery probability x. Shared by RS
/// (x = p_a p_s) and semantics-aware (x = p_s).
AoivDistribution rs_shaped_aoiv(const SourceParams& s, double x) {
  const double p = s.p(), q = s.q();
  const double denom = (p + q) * rs_denominator(s, x);
  AoivDistribution d;
  d.pi[0b000] = q * phi(q, x) / denom;
  d.pi[0b011] = p * q * (1.0 - x) / denom;
  d.pi[0b110] = p * phi(p, x) / denom;
  d.pi[0b101] = p * q * (1.0 - x) / denom;
  return d;
}

double rs_shaped_aoii_pmf(const SourceParams& s, double x, std::uint64_t i) {
  const double p = s.p(), q = s.q();
  const double denom = (p + q) * rs_denominator(s, x);
  if (i == 0) return (p * p + q * q + (p + q - p * p - q * q) * x) / denom;
  const double n = static_cast<double>(i);
  return p * q * std::pow(1.0 - x, n) *
         (std::pow(1.0 - q, n - 1) * phi(q, x) + std::pow(1.0 - p, n - 1) * phi(p, x)) / denom;
}

double rs_shaped_aoiv_average(const SourceParams& s, double x) {
  const double p = s.p(), q = s.q();
  return 2.0 * p * q * (1.0 - x) / ((p + q) * rs_denominator(s, x));
}

double rs_shaped_aoii_average(const SourceParams& s, double x) {
  const double p = s.p(), q = s.q();
  return p * q * (1.0 - x) * (p + q + (2.0 - p - q) * x) /
         ((p + q) * phi(p, x) * phi(q, x) * rs_denominator(s, x));
}

SyncDistribution collapse(const AoivDistribution& d) {
  SyncDistribution out;
  for (State x = 0; x < 2; ++x)
    for (State xh = 0; xh < 2; ++xh) out.pi[2 * x + xh] = d.at(x, xh, 0) + d.at(x, xh, 1);
  return out;
}

[[noreturn]] void unsupported(const Policy& policy, const char* what) {
  throw UnsupportedPolicy(std::string(what) + " has no closed form for policy " +
                          std::string(policy.name()));
}

void require_rs_delivery(double x) {
  if (!(x > 0.0)) throw DomainError("p_a * p_s = 0: the VIA series diverges");
}

}  // namespace

double phi(double z, double x) noexcept { return z + (1.0 - z) * x; }
double psi(double z, double ps) noexcept { return z + (1.0 - z) * ps; }

std::uint64_t k_index(std::uint64_t i) noexcept { return i % 2 == 0 ? i / 2 : (i + 1) / 2; }
std::uint64_t w_index(std::uint64_t i) noexcept { return i % 2 == 0 ? (i + 2) / 2 : (i + 1) / 2; }

double mrs_f(const SourceParams& s, const ChannelParams& c, double q1, double q2) noexcept {
  const double p = s.p(), q = s.q(), ps = c.ps();
  return (1.0 - p) * (1.0 - q) * ps * q2 * q2 + (p + q - 2.0 * p * q) * q2 +
         p * q * (2.0 - ps * q1) * q1;
}

double mrs_g(const SourceParams& s, const ChannelParams& c, double q1, double q2) noexcept {
  const double p = s.p(), q = s.q(), ps = c.ps();
  return q * (q2 + p * (q1 - q2)) * (q + (1.0 - q) * q2 * ps) +
         p * (q2 + q * (q1 - q2)) * (p + (1.0 - p) * q2 * ps);
}

double mrs_h(const SourceParams& s, const ChannelParams& c, double q1, double q2,
             std::uint64_t i) noexcept {
  const double p = s.p(), q = s.q(), ps = c.ps();
  const double m = static_cast<double>(i) - 1.0;
  return p * q * (1.0 - q1 * ps) * std::pow(1.0 - q2 * ps, m) *
         ((q2 + p * (q1 - q2)) * (q + (1.0 - q) * q2 * ps) * std::pow(1.0 - q, m) +
          (q2 + q * (q1 - q2)) * (p + (1.0 - p) * q2 * ps) * std::pow(1.0 - p, m));
}

double mrs_k(const SourceParams& s, const ChannelParams& c, double q1, double q2) noexcept {
  const double p = s.p(), q = s.q(), ps = c.ps();
  return p * q * (1.0 - q1 * ps) *
         (p * p * (q1 - q2) * (1.0 - q2 * ps) + p * q2 * (1.0 + q1 * ps - 2.0 * q2 * ps) +
          q * q * q1 + q * (1.0 - q) * q2 * (1.0 + q1 * ps) +
          (2.0 - 2.0 * q + q * q) * ps * q2 * q2);
}

double AoivDistribution::sum() const noexcept { return std::accumulate(pi.begin(), pi.end(), 0.0); }
double SyncDistribution::sum() const noexcept { return std::accumulate(pi.begin(), pi.end(), 0.0); }

ViaPmfEntry via_pmf(const Policy& policy, const SourceParams& s, const ChannelParams& c,
                    std::uint64_t i) {
  const double p = s.p(), q = s.q();
  const double n = static_cast<double>(i);
  ViaPmfEntry e;
  switch (policy.kind()) {
    case PolicyKind::rs: {
      const double x = rs_delivery(policy, c);
      require_rs_delivery(x);
      if (via_decay_ratio(policy, s, c) >= 1.0) {
        throw DivergentSeries("VIA pmf does not decay for these parameters");
      }
      const double k = static_cast<double>(k_index(i));
      const double w = static_cast<double>(w_index(i));
      const double a = phi(p, x), b = phi(q, x);
      const double common = x * std::pow(1.0 - x, n) / (p + q);
      e.state0 = common * std::pow(p, k) * std::pow(q, w) / (std::pow(a, w) * std::pow(b, k));
      e.state1 = common * std::pow(p, w) * std::pow(q, k) / (std::pow(a, k) * std::pow(b, w));
      break;
    }
    case PolicyKind::change_aware: {
      const double geo = c.ps() * std::pow(1.0 - c.ps(), n) / (p + q);
      e.state0 = q * geo;
      e.state1 = p * geo;
      break;
    }
    default:
      unsupported(policy, "VIA distribution");
  }
  e.total = e.state0 + e.state1;
  return e;
}

double via_decay_ratio(const Policy& policy, const SourceParams& s, const ChannelParams& c) {
  switch (policy.kind()) {
    case PolicyKind::rs: {
      const double x = rs_delivery(policy, c);
      return std::sqrt(s.p() * s.q()) * (1.0 - x) / std::sqrt(phi(s.p(), x) * phi(s.q(), x));
    }
    case PolicyKind::change_aware:
      return 1.0 - c.ps();
    default:
      unsupported(policy, "VIA decay ratio");
  }
}

AoivDistribution aoiv_stationary(const Policy& policy, const SourceParams& s,
                                 const ChannelParams& c) {
  const double p = s.p(), q = s.q(), ps = c.ps();
  switch (policy.kind()) {
    case PolicyKind::rs:
      return rs_shaped_aoiv(s, rs_delivery(policy, c));
    case PolicyKind::semantics_aware:
      return rs_shaped_aoiv(s, ps);
    case PolicyKind::mrs: {
      const auto t = mrs_terms(policy, s, c);
      const double denom = (p + q) * t.f;
      AoivDistribution d;
      d.pi[0b000] = q * t.lead0 * t.b / denom;
      d.pi[0b011] = p * q * (1.0 - t.y1) * t.lead1 / denom;
      d.pi[0b110] = p * t.lead1 * t.a / denom;
      d.pi[0b101] = p * q * (1.0 - t.y1) * t.lead0 / denom;
      return d;
    }
    case PolicyKind::change_aware: {
      const double denom = (p + q) * (2.0 - ps);
      AoivDistribution d;
      d.pi[0b000] = q / denom;
      d.pi[0b011] = q * (1.0 - ps) / denom;
      d.pi[0b110] = p / denom;
      d.pi[0b101] = p * (1.0 - ps) / denom;
      return d;
    }
  }
  unsupported(policy, "AoIV distribution");
}

SyncDistribution sync_stationary(const Policy& policy, const SourceParams& s,
                                 const ChannelParams& c) {
  // AoIV is 1 exactly in the erroneous states, so the joint (X, X̂) law is the AoIV law
  // with the age coordinate summed out.
  return collapse(aoiv_stationary(policy, s, c));
}

double aoii_pmf(const Policy& policy, const SourceParams& s, const ChannelParams& c,
                std::uint64_t i) {
  const double p = s.p(), q = s.q(), ps = c.ps();
  switch (policy.kind()) {
    case PolicyKind::rs:
      return rs_shaped_aoii_pmf(s, rs_delivery(policy, c), i);
    case PolicyKind::semantics_aware:
      return rs_shaped_aoii_pmf(s, ps, i);
    case PolicyKind::mrs: {
      const auto t = mrs_terms(policy, s, c);
      const double num = i == 0 ? mrs_g(s, c, t.q1, t.q2) : mrs_h(s, c, t.q1, t.q2, i);
      return num / ((p + q) * t.f);
    }
    case PolicyKind::change_aware: {
      if (i == 0) return 1.0 / (2.0 - ps);
      const double m = static_cast<double>(i) - 1.0;
      return p * q * (1.0 - ps) * (std::pow(1.0 - q, m) + std::pow(1.0 - p, m)) /
             ((p + q) * (2.0 - ps));
    }
  }
  unsupported(policy, "AoII distribution");
}

double via_average(const Policy& policy, const SourceParams& s, const ChannelParams& c) {
  const double p = s.p(), q = s.q();
  switch (policy.kind()) {
    case PolicyKind::rs: {
      const double x = rs_delivery(policy, c);
      require_rs_delivery(x);
      if (via_decay_ratio(policy, s, c) >= 1.0) {
        throw DivergentSeries("average VIA diverges for these parameters");
      }
      return 2.0 * p * q * (1.0 - x) / ((p + q) * x);
    }
    case PolicyKind::change_aware:
      return (1.0 - c.ps()) / c.ps();
    default:
      unsupported(policy, "average VIA");
  }
}

double aoiv_average(const Policy& policy, const SourceParams& s, const ChannelParams& c) {
  const double p = s.p(), q = s.q(), ps = c.ps();
  switch (policy.kind()) {
    case PolicyKind::rs:
      return rs_shaped_aoiv_average(s, rs_delivery(policy, c));
    case PolicyKind::semantics_aware:
      return rs_shaped_aoiv_average(s, ps);
    case PolicyKind::mrs: {
      const auto t = mrs_terms(policy, s, c);
      return p * q * (1.0 - t.y1) * ((p + q) * t.q1 + (2.0 - p - q) * t.q2) / ((p + q) * t.f);
    }
    case PolicyKind::change_aware:
      return (1.0 - ps) / (2.0 - ps);
  }
  unsupported(policy, "average AoIV");
}

double aoii_average(const Policy& policy, const SourceParams& s, const ChannelParams& c) {
  const double p = s.p(), q = s.q(), ps = c.ps();
  switch (policy.kind()) {
    case PolicyKind::rs:
      return rs_shaped_aoii_average(s, rs_delivery(policy, c));
    case PolicyKind::semantics_aware:
      return rs_shaped_aoii_average(s, ps);
    case PolicyKind::mrs: {
      const auto t = mrs_terms(policy, s, c);
      return mrs_k(s, c, t.q1, t.q2) / ((p + q) * t.b * t.a * t.f);
    }
    case PolicyKind::change_aware:
      return (p * p + q * q) * (1.0 - ps) / (p * q * (p + q) * (2.0 - ps));
  }
  unsupported(policy, "average AoII");
}

double reconstruction_error(const Policy& policy, const SourceParams& s, const ChannelParams& c) {
  const double p = s.p(), q = s.q(), ps = c.ps();
  switch (policy.kind()) {
    case PolicyKind::rs: {
      const double x = rs_delivery(policy, c);
      return 2.0 * p * q * (1.0 - x) / ((p + q) * rs_denominator(s, x));
    }
    case PolicyKind::change_aware:
      return (1.0 - ps) / (2.0 - ps);
    default: {
      const auto d = sync_stationary(policy, s, c);
      return d.at(0, 1) + d.at(1, 0);
    }
  }
}

double via_from_pe(const Policy& policy, const SourceParams& s, const ChannelParams& c,
                   double p_e) {
  if (!(p_e >= 0.0 && p_e <= 1.0)) throw DomainError("reconstruction error must lie in [0, 1]");
  switch (policy.kind()) {
    case PolicyKind::rs: {
      const double x = rs_delivery(policy, c);
      require_rs_delivery(x);
      return rs_denominator(s, x) * p_e / x;
    }
    case PolicyKind::change_aware:
      return (2.0 / c.ps() - 1.0) * p_e;
    default:
      unsupported(policy, "VIA as a function of the reconstruction error");
  }
}

double sampling_cost_rate(const Policy& policy, const SourceParams& s, const ChannelParams& c,
                          double delta) {
  const double p = s.p(), q = s.q();
  switch (policy.kind()) {
    case PolicyKind::rs:
      return delta * policy.as_rs().p_a;
    case PolicyKind::mrs: {
      const auto t = mrs_terms(policy, s, c);
      return 2.0 * p * q * delta * t.lead0 * t.lead1 / ((p + q) * t.f);
    }
    case PolicyKind::change_aware:
      return 2.0 * p * q * delta / (p + q);
    case PolicyKind::semantics_aware:
      return 2.0 * p * q * delta / ((p + q) * rs_denominator(s, c.ps()));
  }
  unsupported(policy, "sampling cost");
}

double mrs_equal_cost_rate(const SourceParams& s, const ChannelParams& c, double q_a,
                           double delta) {
  const double p = s.p(), q = s.q();
  return 2.0 * p * q * delta * q_a / ((p + q) * rs_denominator(s, q_a * c.ps()));
}

double rs_change_aware_via_threshold(const SourceParams& s, const ChannelParams& c) noexcept {
  const double p = s.p(), q = s.q();
  return 2.0 * p * q / (p + q + (2.0 * p * q - p - q) * c.ps());
}

AnalyticReport evaluate(const Policy& policy, const SourceParams& s, const ChannelParams& c,
                        double delta) {
  AnalyticReport r;
  const bool has_via =
      policy.kind() == PolicyKind::rs || policy.kind() == PolicyKind::change_aware;
  if (has_via) {
    try {
      r.avg_via = via_average(policy, s, c);
    } catch (const DomainError&) {
      r.via_divergent = true;
    } catch (const DivergentSeries&) {
      r.via_divergent = true;
    }
  }
  r.avg_aoiv = aoiv_average(policy, s, c);
  r.avg_aoii = aoii_average(policy, s, c);
  r.p_e = reconstruction_error(policy, s, c);
  r.cost_rate = sampling_cost_rate(policy, s, c, delta);
  return r;
}

}  // namespace semvia::analytic
