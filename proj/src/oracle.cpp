#include "semvia/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <string>

#include <Eigen/LU>
#include <Eigen/IterativeLinearSolvers>

#include "semvia/errors.hpp"
#include "semvia/metrics.hpp"

namespace semvia::oracle {

namespace {

constexpr std::size_t kDenseLimit = 256;

/// Enumerates every (probability, x_t, sampled, delivered) outcome of one slot that starts
/// from (x_prev, xhat_prev). Zero-probability outcomes are skipped.
template <class Emit>
void for_each_outcome(const Policy& policy, const SourceParams& s, const ChannelParams& c,
                      State x_prev, State xhat_prev, Emit&& emit) {
  for (State x_t = 0; x_t < 2; ++x_t) {
    const double move = source_transition(s, x_prev, x_t);
    const double sample = sampling_probability(policy, {x_t, x_prev, xhat_prev});
    const std::array<std::tuple<double, bool, bool>, 3> branches{{
        {move * sample * c.ps(), true, true},
        {move * sample * (1.0 - c.ps()), true, false},
        {move * (1.0 - sample), false, false},
    }};
    for (const auto& [prob, sampled, delivered] : branches) {
      if (prob > 0.0) emit(prob, x_t, sampled, delivered);
    }
  }
}

/// Breadth-first construction of the chain reachable from `init`.
template <class Next>
ExplicitChain explore(ChainState init, Next&& next) {
  std::map<ChainState, std::size_t> index;
  std::vector<ChainState> states;
  std::vector<Eigen::Triplet<double>> entries;
  std::deque<std::size_t> frontier;

  auto intern = [&](const ChainState& st) {
    auto [it, inserted] = index.try_emplace(st, states.size());
    if (inserted) {
      states.push_back(st);
      frontier.push_back(it->second);
    }
    return it->second;
  };

  intern(init);
  while (!frontier.empty()) {
    const std::size_t from = frontier.front();
    frontier.pop_front();
    const ChainState current = states[from];
    next(current, [&](double prob, const ChainState& to) {
      entries.emplace_back(static_cast<int>(from), static_cast<int>(intern(to)), prob);
    });
  }

  ExplicitChain chain;
  chain.states = std::move(states);
  const auto n = static_cast<Eigen::Index>(chain.states.size());
  chain.transitions.resize(n, n);
  chain.transitions.setFromTriplets(entries.begin(), entries.end());
  chain.transitions.makeCompressed();
  return chain;
}

/// True iff every state reaches every other one. Reachability from state 0 holds by
/// construction, so only the reverse direction is checked.
bool strongly_connected(const ExplicitChain& chain) {
  const auto n = chain.size();
  std::vector<std::vector<std::size_t>> reverse(n);
  for (int r = 0; r < chain.transitions.outerSize(); ++r) {
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(chain.transitions, r); it;
         ++it) {
      if (it.value() > 0.0) reverse[static_cast<std::size_t>(it.col())].push_back(r);
    }
  }
  std::vector<bool> seen(n, false);
  std::vector<std::size_t> stack{0};
  seen[0] = true;
  while (!stack.empty()) {
    const auto v = stack.back();
    stack.pop_back();
    for (auto u : reverse[v]) {
      if (!seen[u]) {
        seen[u] = true;
        stack.push_back(u);
      }
    }
  }
  return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
}

bool covers_all_joint_states(const ExplicitChain& chain) {
  std::array<bool, 4> hit{};
  for (const auto& st : chain.states) hit[static_cast<std::size_t>(2 * st.x + st.xhat)] = true;
  return std::all_of(hit.begin(), hit.end(), [](bool b) { return b; });
}

void require_irreducible(const ExplicitChain& chain, const Policy& policy) {
  if (!covers_all_joint_states(chain) || !strongly_connected(chain)) {
    throw NotIrreducible("joint (X, X̂) chain is not irreducible for policy " + policy.label());
  }
}

void require_xhat_blind(const Policy& policy) {
  if (policy.kind() != PolicyKind::rs && policy.kind() != PolicyKind::change_aware) {
    throw UnsupportedPolicy("the (X, VIA) chain requires a policy that ignores X̂; got " +
                            policy.label());
  }
}

/// Per-level decay of the VIA chain's stationary tail, used only to size the truncation.
double via_level_decay(const Policy& policy, const SourceParams& s, const ChannelParams& c) {
  if (policy.kind() == PolicyKind::change_aware) return 1.0 - c.ps();
  const double x = policy.as_rs().p_a * c.ps();
  const double a = s.p() + (1.0 - s.p()) * x;
  const double b = s.q() + (1.0 - s.q()) * x;
  return std::sqrt(s.p() * s.q() / (a * b)) * (1.0 - x);
}

struct SyncSplit {
  std::vector<std::size_t> sync;
  std::vector<std::size_t> error;
};

SyncSplit split(const ExplicitChain& chain) {
  SyncSplit out;
  for (std::size_t i = 0; i < chain.size(); ++i) {
    (chain.states[i].x == chain.states[i].xhat ? out.sync : out.error).push_back(i);
  }
  return out;
}

}  // namespace

std::optional<std::size_t> ExplicitChain::index_of(const ChainState& s) const {
  const auto it = std::find(states.begin(), states.end(), s);
  if (it == states.end()) return std::nullopt;
  return static_cast<std::size_t>(it - states.begin());
}

double ExplicitChain::max_row_defect() const {
  double worst = 0.0;
  for (int r = 0; r < transitions.outerSize(); ++r) {
    double sum = 0.0;
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(transitions, r); it; ++it) {
      sum += it.value();
    }
    worst = std::max(worst, std::abs(sum - 1.0));
  }
  return worst;
}

std::int64_t default_via_truncation(const Policy& policy, const SourceParams& s,
                                    const ChannelParams& c) {
  require_xhat_blind(policy);
  const double r = via_level_decay(policy, s, c);
  if (!(r < 1.0)) throw DivergentSeries("VIA chain has no stationary distribution");
  if (r <= 0.0) return 50;
  const double n = std::ceil(std::log(1e-12) / std::log(r));
  return static_cast<std::int64_t>(std::clamp(n, 50.0, 5000.0));
}

ExplicitChain build_via_chain(const Policy& policy, const SourceParams& s, const ChannelParams& c,
                              std::int64_t n) {
  require_xhat_blind(policy);
  if (n < 10) throw DomainError("VIA truncation level must be at least 10");
  const double r = via_level_decay(policy, s, c);
  if (!(r < 1.0) || std::pow(r, static_cast<double>(n)) > 1e-9) {
    throw TruncationTooSmall("VIA truncation level " + std::to_string(n) +
                             " leaves tail mass above 1e-9");
  }
  auto chain = explore({0, -1, 0}, [&](const ChainState& st, auto&& add) {
    for_each_outcome(policy, s, c, static_cast<State>(st.x), 0,
                     [&](double prob, State x_t, bool sampled, bool delivered) {
                       const auto via = static_cast<std::int64_t>(update_via(
                           static_cast<std::uint64_t>(st.level), x_t, static_cast<State>(st.x),
                           sampled, delivered));
                       add(prob, ChainState{x_t, -1, std::min(via, n)});
                     });
  });
  chain.truncation = n;
  return chain;
}

ExplicitChain build_joint_sync_chain(const Policy& policy, const SourceParams& s,
                                     const ChannelParams& c) {
  auto chain = explore({0, 0, -1}, [&](const ChainState& st, auto&& add) {
    const auto x_prev = static_cast<State>(st.x);
    const auto xhat_prev = static_cast<State>(st.xhat);
    for_each_outcome(policy, s, c, x_prev, xhat_prev,
                     [&](double prob, State x_t, bool sampled, bool delivered) {
                       add(prob, ChainState{x_t,
                                            update_reconstruction(xhat_prev, x_t, sampled, delivered),
                                            -1});
                     });
  });
  require_irreducible(chain, policy);
  return chain;
}

ExplicitChain build_aoiv_chain(const Policy& policy, const SourceParams& s,
                               const ChannelParams& c) {
  auto chain = explore({0, 0, 0}, [&](const ChainState& st, auto&& add) {
    const auto x_prev = static_cast<State>(st.x);
    const auto xhat_prev = static_cast<State>(st.xhat);
    for_each_outcome(
        policy, s, c, x_prev, xhat_prev, [&](double prob, State x_t, bool sampled, bool delivered) {
          const State xhat_t = update_reconstruction(xhat_prev, x_t, sampled, delivered);
          const auto aoiv = update_aoiv(static_cast<std::uint64_t>(st.level), x_t, x_prev, xhat_t);
          add(prob, ChainState{x_t, xhat_t, static_cast<std::int64_t>(aoiv)});
        });
  });
  require_irreducible(chain, policy);
  return chain;
}

double stationary_residual(const ExplicitChain& chain, const Eigen::VectorXd& v) {
  const Eigen::VectorXd moved = chain.transitions.transpose() * v;
  return (moved - v).cwiseAbs().maxCoeff();
}

Eigen::VectorXd stationary_solve(const ExplicitChain& chain, double tol,
                                 std::size_t max_iterations) {
  const auto n = static_cast<Eigen::Index>(chain.size());
  if (n == 0) throw DomainError("empty chain");
  Eigen::VectorXd v;
  if (chain.size() <= kDenseLimit) {
    // (P^T - I) v = 0 with the last balance equation replaced by sum(v) = 1.
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    rhs(n - 1) = 1.0;
    Eigen::MatrixXd a = Eigen::MatrixXd(chain.transitions).transpose();
    a.diagonal().array() -= 1.0;
    a.row(n - 1).setOnes();
    v = a.fullPivLu().solve(rhs);
  } else {
    // Balance equations for every state but the first, plus v(0) = 1; rescaled afterwards.
    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(static_cast<std::size_t>(chain.transitions.nonZeros() + n));
    for (int r = 0; r < chain.transitions.outerSize(); ++r) {
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(chain.transitions, r); it;
           ++it) {
        if (it.col() != 0) entries.emplace_back(static_cast<int>(it.col()), r, it.value());
      }
    }
    for (Eigen::Index i = 1; i < n; ++i) {
      entries.emplace_back(static_cast<int>(i), static_cast<int>(i), -1.0);
    }
    entries.emplace_back(0, 0, 1.0);
    Eigen::SparseMatrix<double> a(n, n);
    a.setFromTriplets(entries.begin(), entries.end());
    Eigen::BiCGSTAB<Eigen::SparseMatrix<double>, Eigen::IncompleteLUT<double>> solver;
    solver.setTolerance(1e-15);
    solver.compute(a);
    if (solver.info() == Eigen::Success) {
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
      rhs(0) = 1.0;
      v = solver.solve(rhs);
      v /= v.sum();
    }
    if (solver.info() != Eigen::Success || !v.allFinite()) {
      v = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
    }
  }
  if (stationary_residual(chain, v) < tol) return v;
  // Polish by power iteration when the direct solve is not accurate enough.
  const Eigen::SparseMatrix<double, Eigen::RowMajor> pt = chain.transitions.transpose();
  for (std::size_t it = 0; it < max_iterations; ++it) {
    Eigen::VectorXd next = pt * v;
    next /= next.sum();
    const double change = (next - v).cwiseAbs().maxCoeff();
    v.swap(next);
    if (change < tol && stationary_residual(chain, v) < tol) return v;
  }
  throw NoConvergence(tol, max_iterations);
}

ViaOracle via_oracle(const Policy& policy, const SourceParams& s, const ChannelParams& c,
                     std::optional<std::int64_t> n) {
  const std::int64_t levels = n.value_or(default_via_truncation(policy, s, c));
  const auto chain = build_via_chain(policy, s, c, levels);
  const auto v = stationary_solve(chain);

  ViaOracle out;
  out.truncation = levels;
  out.pmf0.assign(static_cast<std::size_t>(levels + 1), 0.0);
  out.pmf1.assign(static_cast<std::size_t>(levels + 1), 0.0);
  for (std::size_t i = 0; i < chain.size(); ++i) {
    const auto& st = chain.states[i];
    auto& target = st.x == 0 ? out.pmf0 : out.pmf1;
    target[static_cast<std::size_t>(st.level)] += v(static_cast<Eigen::Index>(i));
  }
  for (std::size_t i = 0; i < out.pmf0.size(); ++i) {
    out.mean += static_cast<double>(i) * (out.pmf0[i] + out.pmf1[i]);
  }
  out.tail_mass = out.pmf0.back() + out.pmf1.back();
  if (out.tail_mass > 1e-9) {
    throw TruncationTooSmall("VIA chain carries " + std::to_string(out.tail_mass) +
                             " mass at truncation level " + std::to_string(levels));
  }
  return out;
}

std::array<double, 8> aoiv_oracle(const Policy& policy, const SourceParams& s,
                                  const ChannelParams& c) {
  const auto chain = build_aoiv_chain(policy, s, c);
  const auto v = stationary_solve(chain);
  std::array<double, 8> out{};
  for (std::size_t i = 0; i < chain.size(); ++i) {
    const auto& st = chain.states[i];
    if (st.level > 1) {
      throw DomainError("AoIV chain reached level " + std::to_string(st.level) +
                        "; a binary source caps AoIV at 1");
    }
    out[static_cast<std::size_t>(4 * st.x + 2 * st.xhat + st.level)] +=
        v(static_cast<Eigen::Index>(i));
  }
  return out;
}

std::array<double, 4> sync_oracle(const Policy& policy, const SourceParams& s,
                                  const ChannelParams& c) {
  const auto chain = build_joint_sync_chain(policy, s, c);
  const auto v = stationary_solve(chain);
  std::array<double, 4> out{};
  for (std::size_t i = 0; i < chain.size(); ++i) {
    out[static_cast<std::size_t>(2 * chain.states[i].x + chain.states[i].xhat)] =
        v(static_cast<Eigen::Index>(i));
  }
  return out;
}

namespace {

struct FirstStep {
  Eigen::RowVectorXd entry;  // pi_sync * P_se over the erroneous states
  Eigen::MatrixXd stay;      // Q, erroneous -> erroneous
  double sync_mass = 0.0;
};

FirstStep first_step(const Policy& policy, const SourceParams& s, const ChannelParams& c) {
  const auto chain = build_joint_sync_chain(policy, s, c);
  const auto v = stationary_solve(chain);
  const auto parts = split(chain);
  const Eigen::MatrixXd dense(chain.transitions);

  FirstStep fs;
  const auto ne = static_cast<Eigen::Index>(parts.error.size());
  fs.entry = Eigen::RowVectorXd::Zero(ne);
  fs.stay = Eigen::MatrixXd::Zero(ne, ne);
  for (auto si : parts.sync) {
    const auto vs = v(static_cast<Eigen::Index>(si));
    fs.sync_mass += vs;
    for (Eigen::Index e = 0; e < ne; ++e) {
      fs.entry(e) += vs * dense(static_cast<Eigen::Index>(si),
                                static_cast<Eigen::Index>(parts.error[static_cast<std::size_t>(e)]));
    }
  }
  for (Eigen::Index a = 0; a < ne; ++a) {
    for (Eigen::Index b = 0; b < ne; ++b) {
      fs.stay(a, b) = dense(static_cast<Eigen::Index>(parts.error[static_cast<std::size_t>(a)]),
                            static_cast<Eigen::Index>(parts.error[static_cast<std::size_t>(b)]));
    }
  }
  return fs;
}

}  // namespace

std::vector<double> aoii_pmf_oracle(const Policy& policy, const SourceParams& s,
                                    const ChannelParams& c, std::uint64_t i_max) {
  if (i_max < 1) throw DomainError("i_max must be at least 1");
  const auto fs = first_step(policy, s, c);
  std::vector<double> pmf{fs.sync_mass};
  pmf.reserve(i_max + 1);
  Eigen::RowVectorXd run = fs.entry;
  for (std::uint64_t i = 1; i <= i_max; ++i) {
    pmf.push_back(run.sum());
    run = run * fs.stay;
  }
  return pmf;
}

double aoii_mean_oracle(const Policy& policy, const SourceParams& s, const ChannelParams& c) {
  const auto fs = first_step(policy, s, c);
  const auto ne = fs.stay.rows();
  const Eigen::MatrixXd escape = Eigen::MatrixXd::Identity(ne, ne) - fs.stay;
  const auto lu = escape.fullPivLu();
  const Eigen::VectorXd once = lu.solve(Eigen::VectorXd::Ones(ne));
  const Eigen::VectorXd twice = lu.solve(once);
  return fs.entry.dot(twice);
}

double sampling_rate_oracle(const Policy& policy, const SourceParams& s, const ChannelParams& c) {
  const auto pi = sync_oracle(policy, s, c);
  double rate = 0.0;
  for (State x = 0; x < 2; ++x) {
    for (State xh = 0; xh < 2; ++xh) {
      for (State x_t = 0; x_t < 2; ++x_t) {
        rate += pi[static_cast<std::size_t>(2 * x + xh)] * source_transition(s, x, x_t) *
                sampling_probability(policy, {x_t, x, xh});
      }
    }
  }
  return rate;
}

}  // namespace semvia::oracle
