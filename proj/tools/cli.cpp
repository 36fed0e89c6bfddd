#include "cli.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "config.hpp"
#include "semvia/analytic.hpp"
#include "semvia/errors.hpp"
#include "semvia/optimizer.hpp"
#include "semvia/oracle.hpp"
#include "semvia/rng.hpp"
#include "semvia/simulation.hpp"

namespace semvia::cli {

using nlohmann::json;

namespace {

constexpr double kOracleTolerance = 1e-8;
constexpr double kSimZ = 4.0;
constexpr std::uint64_t kDefaultGridHorizon = 200'000;
constexpr std::uint64_t kAoiiPmfLevels = 200;

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed, horizon, reps, slots;
  std::string out;
  double grid_step = opt::kDefaultGridStep;
  std::string trace_path;
  bool dump_config = false;
  std::string format = "csv";
  std::string preset;
  double perturb = 0.0;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string num(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

double rounded(double v) { return std::stod(num(v)); }

json json_num(const std::optional<double>& v) { return v ? json(rounded(*v)) : json(nullptr); }

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

const char* boolean(bool b) { return b ? "true" : "false"; }

/// Writes to --out when given, otherwise to the fallback stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : os_(&fallback) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw ConfigError("cannot open output file '" + path + "'");
      os_ = &file_;
    }
  }
  std::ostream& operator*() { return *os_; }

 private:
  std::ofstream file_;
  std::ostream* os_;
};

RunConfig load(const Options& o) {
  RunConfig cfg = o.config_path.empty() ? RunConfig{} : load_config(o.config_path);
  if (o.seed) cfg.sim.seed = *o.seed;
  if (o.horizon) cfg.sim.horizon = *o.horizon;
  if (o.reps) cfg.sim.reps = *o.reps;
  return parse_config(to_json(cfg));
}

void write_trace_row(std::ostream& os, const sim::TraceSlot& s) {
  os << s.t << ',' << int(s.x) << ',' << int(s.xhat) << ',' << int(s.sampled) << ','
     << int(s.delivered) << ',' << s.via << ',' << s.aoiv << ',' << s.aoii << '\n';
}

// analytic ---------------------------------------------------------------------------------

int cmd_analytic(const RunConfig& cfg, const Options& o, std::ostream& out, std::ostream& err) {
  const auto& s = require_source(cfg);
  const auto& c = require_channel(cfg);
  const auto& pol = require_policy(cfg);
  const double delta = cfg.budget ? cfg.budget->delta : 1.0;
  const auto r = analytic::evaluate(pol, s, c, delta);
  const std::array<std::pair<const char*, std::optional<double>>, 5> rows{{
      {"avg_via", r.avg_via},
      {"avg_aoiv", r.avg_aoiv},
      {"avg_aoii", r.avg_aoii},
      {"p_e", r.p_e},
      {"cost_rate", r.cost_rate},
  }};
  for (const auto& [name, value] : rows) {
    if (value) continue;
    err << "note: " << name << " omitted for " << pol.label()
        << (r.via_divergent ? ": the average diverges" : ": simulation-only, see `semvia simulate`")
        << '\n';
  }
  Sink sink(o.out, out);
  if (o.format == "json") {
    json j{{"policy", policy_to_json(pol)}};
    for (const auto& [name, value] : rows) {
      if (value) j[name] = rounded(*value);
    }
    *sink << j.dump(2) << '\n';
  } else {
    *sink << kAnalyticHeader << '\n';
    for (const auto& [name, value] : rows) {
      if (value) *sink << csv_field(pol.label()) << ',' << name << ',' << num(*value) << '\n';
    }
  }
  return kOk;
}

// simulate / trace ------------------------------------------------------------------------

int cmd_simulate(const RunConfig& cfg, const Options& o, std::ostream& out, std::ostream& err) {
  const auto& pol = require_policy(cfg);
  const auto sc = sim_config(cfg, pol);
  if (!o.trace_path.empty()) {
    std::ofstream trace(o.trace_path);
    if (!trace) throw ConfigError("cannot open trace file '" + o.trace_path + "'");
    trace << kTraceHeader << '\n';
    auto first = sc;
    first.seed = rng::derive_seed(sc.seed, 0);
    sim::run(first, [&](const sim::TraceSlot& slot) { write_trace_row(trace, slot); });
  }
  const auto m = sim::run_many(sc, cfg.sim.reps);
  if (m.invariant_violations) {
    err << "warning: " << m.invariant_violations << " slots violated the pathwise invariants\n";
  }
  const std::array<std::pair<const char*, const sim::Estimate*>, 6> rows{{
      {"avg_via", &m.via},
      {"avg_aoiv", &m.aoiv},
      {"avg_aoii", &m.aoii},
      {"p_e", &m.p_e},
      {"cost_rate", &m.cost_rate},
      {"sample_rate", &m.sample_rate},
  }};
  Sink sink(o.out, out);
  if (o.format == "json") {
    json j{{"policy", policy_to_json(pol)},
           {"slots", m.slots},
           {"replications", m.replications},
           {"invariant_violations", m.invariant_violations}};
    for (const auto& [name, e] : rows) {
      j[name] = {{"mean", rounded(e->mean)}, {"stderr", json_num(e->stderr_)}};
    }
    *sink << j.dump(2) << '\n';
  } else {
    *sink << kSimulateHeader << '\n';
    for (const auto& [name, e] : rows) {
      *sink << csv_field(pol.label()) << ',' << name << ',' << num(e->mean) << ','
            << num(e->stderr_) << ',' << m.slots << ',' << m.replications << '\n';
    }
  }
  return kOk;
}

int cmd_trace(const RunConfig& cfg, const Options& o, std::ostream& out, std::ostream&) {
  auto sc = sim_config(cfg, require_policy(cfg));
  sc.seed = rng::derive_seed(sc.seed, 0);
  std::uint64_t limit = sc.horizon;
  if (o.slots) {
    if (*o.slots < 1) throw ConfigError("--slots must be at least 1");
    limit = *o.slots;
    sc.horizon = std::max(sim::kMinHorizon, std::min(sc.horizon, limit));
    sc.burn_in = std::min(sc.burn_in, sc.horizon - 1);
  }
  Sink sink(o.out, out);
  *sink << kTraceHeader << '\n';
  sim::run(sc, [&](const sim::TraceSlot& slot) {
    if (slot.t <= limit) write_trace_row(*sink, slot);
  });
  return kOk;
}

// validate ---------------------------------------------------------------------------------

struct Check {
  std::string metric;
  std::string check;
  std::optional<double> closed_form;
  std::optional<double> observed;
  std::optional<double> diff;
  std::optional<double> tolerance;
  std::string status;
};

struct Job {
  SourceParams s;
  ChannelParams c;
  Policy pol;
};

std::vector<Policy> validation_policies() {
  std::vector<Policy> out{Policy::change_aware(), Policy::semantics_aware()};
  for (double pa : {0.3, 0.7, 1.0}) out.push_back(Policy::rs(pa));
  for (double q1 : {0.2, 0.6, 1.0})
    for (double q2 : {0.2, 0.6, 1.0}) out.push_back(Policy::mrs(q1, q2));
  return out;
}

std::vector<Check> validate_job(const Job& job, sim::SimConfig sc, std::uint64_t reps,
                                double perturb) {
  std::vector<Check> out;
  const auto& [s, c, pol] = job;
  const double scale = 1.0 + perturb;
  auto compared = [&](const char* metric, double cf, double observed) {
    const double d = std::abs(cf - observed);
    out.push_back({metric, "oracle", cf, observed, d, kOracleTolerance,
                   d <= kOracleTolerance ? "PASS" : "FAIL"});
  };
  auto max_diff = [&](const char* metric, double d) {
    out.push_back({metric, "oracle", {}, {}, d, kOracleTolerance,
                   d <= kOracleTolerance ? "PASS" : "FAIL"});
  };
  auto guarded = [&](const char* metric, const std::function<void()>& fn) {
    try {
      fn();
    } catch (const std::exception&) {
      out.push_back({metric, "oracle", {}, {}, {}, {}, "SKIP"});
    }
  };

  guarded("aoiv_distribution", [&] {
    const auto o = oracle::aoiv_oracle(pol, s, c);
    const auto cf = analytic::aoiv_stationary(pol, s, c);
    double d = 0.0;
    for (int i = 0; i < 8; ++i) d = std::max(d, std::abs(o[i] - scale * cf.pi[i]));
    max_diff("aoiv_distribution", d);
    compared("avg_aoiv", scale * analytic::aoiv_average(pol, s, c), o[1] + o[3] + o[5] + o[7]);
  });
  guarded("sync_distribution", [&] {
    const auto o = oracle::sync_oracle(pol, s, c);
    const auto cf = analytic::sync_stationary(pol, s, c);
    double d = 0.0;
    for (int i = 0; i < 4; ++i) d = std::max(d, std::abs(o[i] - scale * cf.pi[i]));
    max_diff("sync_distribution", d);
    compared("p_e", scale * analytic::reconstruction_error(pol, s, c), o[1] + o[2]);
  });
  guarded("aoii_pmf", [&] {
    const auto o = oracle::aoii_pmf_oracle(pol, s, c, kAoiiPmfLevels);
    double d = 0.0;
    for (std::uint64_t i = 0; i < o.size(); ++i) {
      d = std::max(d, std::abs(o[i] - scale * analytic::aoii_pmf(pol, s, c, i)));
    }
    max_diff("aoii_pmf", d);
  });
  guarded("avg_aoii", [&] {
    compared("avg_aoii", scale * analytic::aoii_average(pol, s, c),
             oracle::aoii_mean_oracle(pol, s, c));
  });
  guarded("cost_rate", [&] {
    compared("cost_rate", scale * analytic::sampling_cost_rate(pol, s, c, sc.delta),
             sc.delta * oracle::sampling_rate_oracle(pol, s, c));
  });
  if (pol.kind() == PolicyKind::rs || pol.kind() == PolicyKind::change_aware) {
    guarded("avg_via", [&] {
      const auto o = oracle::via_oracle(pol, s, c);
      double d = 0.0;
      for (std::size_t i = 0; i + 1 < o.pmf0.size(); ++i) {
        const auto e = analytic::via_pmf(pol, s, c, i);
        d = std::max({d, std::abs(o.pmf0[i] - scale * e.state0),
                      std::abs(o.pmf1[i] - scale * e.state1)});
      }
      max_diff("via_pmf", d);
      compared("avg_via", scale * analytic::via_average(pol, s, c), o.mean);
      out.push_back({"via_tail_mass", "diagnostic", {}, o.tail_mass, {}, 1e-9,
                     o.tail_mass <= 1e-9 ? "PASS" : "FAIL"});
      out.push_back({"via_truncation", "diagnostic", {}, double(o.truncation), {}, {}, "INFO"});
    });
  }

  sc.source = s;
  sc.channel = c;
  sc.policy = pol;
  const auto m = sim::run_many(sc, reps);
  auto report = analytic::evaluate(pol, s, c, sc.delta);
  for (auto* f : {&report.avg_via, &report.avg_aoiv, &report.avg_aoii, &report.p_e,
                  &report.cost_rate}) {
    if (*f) **f *= scale;
  }
  for (const auto& ch : sim::compare(m, report, kSimZ).checks) {
    if (!ch.analytic) {
      out.push_back({ch.metric, "simulation", {}, ch.simulated, {}, {}, "INFO"});
      continue;
    }
    out.push_back({ch.metric, "simulation", ch.analytic, ch.simulated,
                   std::abs(ch.simulated - *ch.analytic), ch.tolerance, ch.pass ? "PASS" : "FAIL"});
  }
  out.push_back({"invariant_violations", "simulation", {}, double(m.invariant_violations), {}, 0.0,
                 m.invariant_violations == 0 ? "PASS" : "FAIL"});
  return out;
}

int cmd_validate(const RunConfig& cfg, const Options& o, std::ostream& out, std::ostream& err) {
  std::vector<Job> jobs;
  std::uint64_t horizon = cfg.sim.horizon;
  if (cfg.source && cfg.channel) {
    const auto pols = cfg.policy ? std::vector<Policy>{*cfg.policy} : validation_policies();
    for (const auto& pol : pols) jobs.push_back({*cfg.source, *cfg.channel, pol});
  } else {
    if (cfg.source || cfg.channel) throw ConfigError("validate needs both source and channel");
    for (double p : {0.1, 0.3, 0.5, 0.7, 0.9})
      for (double q : {0.1, 0.3, 0.5, 0.7, 0.9})
        for (double ps : {0.1, 0.5, 0.9})
          for (const auto& pol : validation_policies())
            jobs.push_back({SourceParams(p, q), ChannelParams(ps), pol});
    if (!o.horizon && o.config_path.empty()) horizon = kDefaultGridHorizon;
  }
  sim::SimConfig base;
  base.horizon = horizon;
  base.seed = cfg.sim.seed;
  base.burn_in = cfg.sim.burn_in;
  base.delta = cfg.budget ? cfg.budget->delta : 1.0;
  base.validate();

  std::vector<std::vector<Check>> results(jobs.size());
  sim::parallel_for(jobs.size(), [&](std::size_t k) {
    results[k] = validate_job(jobs[k], base, cfg.sim.reps, o.perturb);
  });

  Sink sink(o.out, out);
  *sink << kValidateHeader << '\n';
  std::size_t checks = 0, failed = 0, skipped = 0;
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    const auto& j = jobs[k];
    for (const auto& ch : results[k]) {
      *sink << num(j.s.p()) << ',' << num(j.s.q()) << ',' << num(j.c.ps()) << ','
            << csv_field(j.pol.label()) << ',' << ch.metric << ',' << ch.check << ','
            << num(ch.closed_form) << ',' << num(ch.observed) << ',' << num(ch.diff) << ','
            << num(ch.tolerance) << ',' << ch.status << '\n';
      checks += ch.status == "PASS" || ch.status == "FAIL";
      failed += ch.status == "FAIL";
      skipped += ch.status == "SKIP";
    }
  }
  err << "validate: " << jobs.size() << " cases, " << checks << " checks, " << failed
      << " failed, " << skipped << " skipped (horizon " << horizon << ", z = " << kSimZ
      << ", oracle tolerance " << kOracleTolerance << ")\n";
  return failed ? kValidationFailed : kOk;
}

// optimize ---------------------------------------------------------------------------------

bool has_value(const opt::OptResult& r) {
  return r.policy &&
         !(r.objective == opt::Objective::via && r.family == opt::Family::semantics_aware);
}

std::vector<opt::OptResult> solve_all(opt::Objective objective, const SourceParams& s,
                                      const ChannelParams& c, const opt::CostBudget& budget,
                                      double e_max, double grid_step) {
  std::vector<opt::OptResult> out;
  if (objective == opt::Objective::via) {
    out.push_back(opt::solve_via_rsc(s, c, budget, e_max));
  } else {
    out.push_back(opt::solve_rsc(objective, s, c, budget));
    out.push_back(opt::solve_mrsc(objective, s, c, budget, grid_step));
    out.push_back(opt::solve_mrsc_equal(objective, s, c, budget));
  }
  for (auto& f : opt::classify_fixed_policies(objective, s, c, budget)) out.push_back(std::move(f));
  return out;
}

std::array<std::optional<double>, 3> params(const opt::OptResult& r) {
  if (!r.policy) return {};
  if (r.policy->kind() == PolicyKind::rs) return {r.policy->as_rs().p_a, {}, {}};
  if (r.policy->kind() == PolicyKind::mrs) {
    return {std::nullopt, r.policy->as_mrs().q1, r.policy->as_mrs().q2};
  }
  return {};
}

json result_json(const opt::OptResult& r) {
  const auto [pa, q1, q2] = params(r);
  return {{"family", std::string(opt::to_string(r.family))},
          {"objective", std::string(opt::to_string(r.objective))},
          {"feasible", r.feasible},
          {"p_a", json_num(pa)},
          {"q1", json_num(q1)},
          {"q2", json_num(q2)},
          {"objective_value", has_value(r) ? json(rounded(r.objective_value)) : json(nullptr)},
          {"cost_rate", r.policy ? json(rounded(r.cost_rate)) : json(nullptr)},
          {"p_e", json_num(r.p_e)},
          {"cost_binding", r.cost_binding},
          {"error_binding", r.error_binding},
          {"degenerate", r.degenerate},
          {"note", r.note}};
}

int cmd_reference_tables(const Options& o, std::ostream& out) {
  struct Cell {
    std::string block;
    double ps, q, p;
    opt::Objective objective;
    std::vector<opt::OptResult> results;
  };
  std::vector<Cell> cells;
  for (double ps : {0.1, 0.9})
    for (double q : {0.2, 0.8})
      for (double p : {0.1, 0.3, 0.5, 0.7, 0.9})
        for (auto obj : {opt::Objective::aoiv, opt::Objective::aoii})
          cells.push_back({"optimum", ps, q, p, obj, {}});
  for (auto obj : {opt::Objective::aoiv, opt::Objective::aoii})
    cells.push_back({"feasibility", 0.9, 0.8, 0.9, obj, {}});

  const auto budget = opt::CostBudget::from_eta(0.5);
  sim::parallel_for(cells.size(), [&](std::size_t k) {
    auto& cell = cells[k];
    const SourceParams s(cell.p, cell.q);
    const ChannelParams c(cell.ps);
    if (cell.block == "optimum") {
      cell.results = {opt::solve_mrsc(cell.objective, s, c, budget, o.grid_step),
                      opt::solve_mrsc_equal(cell.objective, s, c, budget)};
    } else {
      cell.results = solve_all(cell.objective, s, c, budget, 1.0, o.grid_step);
    }
  });

  Sink sink(o.out, out);
  *sink << kTablesHeader << '\n';
  for (const auto& cell : cells) {
    for (const auto& r : cell.results) {
      const auto [pa, q1, q2] = params(r);
      *sink << cell.block << ',' << num(cell.ps) << ',' << num(cell.q) << ',' << num(cell.p) << ','
            << opt::to_string(cell.objective) << ',' << opt::to_string(r.family) << ','
            << boolean(r.feasible) << ',' << num(pa) << ',' << num(q1) << ',' << num(q2) << ','
            << (has_value(r) ? num(r.objective_value) : "") << ','
            << (r.policy ? num(r.cost_rate) : "") << '\n';
    }
  }
  return kOk;
}

int cmd_optimize(const RunConfig& cfg, const Options& o, std::ostream& out, std::ostream&) {
  if (!(o.grid_step > 0.0 && o.grid_step <= 0.1)) {
    throw ConfigError("--grid-step must lie in (0, 0.1]");
  }
  if (!o.preset.empty()) {
    if (o.preset != "reference-tables") {
      throw ConfigError("unknown preset '" + o.preset + "' (available: reference-tables)");
    }
    return cmd_reference_tables(o, out);
  }
  const auto& s = require_source(cfg);
  const auto& c = require_channel(cfg);
  const auto budget = require_budget(cfg).cost_budget();
  std::vector<opt::OptResult> rows;
  for (const auto& name : cfg.objectives) {
    for (auto& r : solve_all(opt::parse_objective(name), s, c, budget, cfg.e_max, o.grid_step)) {
      rows.push_back(std::move(r));
    }
  }
  Sink sink(o.out, out);
  if (o.format == "json") {
    json j = json::array();
    for (const auto& r : rows) j.push_back(result_json(r));
    *sink << j.dump(2) << '\n';
    return kOk;
  }
  *sink << kOptimizeHeader << '\n';
  for (const auto& r : rows) {
    const auto [pa, q1, q2] = params(r);
    *sink << opt::to_string(r.family) << ',' << opt::to_string(r.objective) << ','
          << boolean(r.feasible) << ',' << num(pa) << ',' << num(q1) << ',' << num(q2) << ','
          << (has_value(r) ? num(r.objective_value) : "") << ','
          << (r.policy ? num(r.cost_rate) : "") << ',' << num(r.p_e) << ','
          << boolean(r.cost_binding) << ',' << boolean(r.error_binding) << ','
          << boolean(r.degenerate) << ',' << csv_field(r.note) << '\n';
  }
  return kOk;
}

// sweep ------------------------------------------------------------------------------------

struct SweepPoint {
  SourceParams s;
  ChannelParams c;
  std::optional<Policy> pol;
  BudgetSection budget;
};

SweepPoint sweep_point(const RunConfig& cfg, const std::string& var, double v) {
  SweepPoint pt{require_source(cfg), require_channel(cfg), cfg.policy, require_budget(cfg)};
  try {
    if (var == "p") pt.s = SourceParams(v, pt.s.q());
    if (var == "q") pt.s = SourceParams(pt.s.p(), v);
    if (var == "p_s") pt.c = ChannelParams(v);
    if (var == "eta") {
      pt.budget.delta_max = v * pt.budget.delta;
      pt.budget.cost_budget();
    }
    if (var == "p_a") {
      if (!pt.pol || pt.pol->kind() != PolicyKind::rs) {
        throw ConfigError("sweeping p_a needs an rs policy");
      }
      pt.pol = Policy::rs(v);
    }
    if (var == "q1" || var == "q2") {
      if (!pt.pol || pt.pol->kind() != PolicyKind::mrs) {
        throw ConfigError("sweeping " + var + " needs an mrs policy");
      }
      const auto m = pt.pol->as_mrs();
      pt.pol = var == "q1" ? Policy::mrs(v, m.q2) : Policy::mrs(m.q1, v);
    }
  } catch (const DomainError& e) {
    throw ConfigError("sweep " + var + " = " + num(v) + ": " + e.what());
  }
  return pt;
}

struct SweepRow {
  std::string policy;
  std::optional<double> analytic, simulated, stderr_, cost;
  bool feasible = false;
};

std::vector<SweepRow> sweep_rows(const RunConfig& cfg, const SweepPoint& pt,
                                 opt::Objective objective, double grid_step, bool simulate) {
  const auto budget = pt.budget.cost_budget();
  std::vector<std::pair<SweepRow, std::optional<Policy>>> rows;
  if (pt.pol && (pt.pol->kind() == PolicyKind::rs || pt.pol->kind() == PolicyKind::mrs)) {
    SweepRow row{std::string(pt.pol->name()), {}, {}, {}, {}, false};
    try {
      row.analytic = opt::objective_value(objective, *pt.pol, pt.s, pt.c);
    } catch (const std::exception&) {
    }
    row.cost = analytic::sampling_cost_rate(*pt.pol, pt.s, pt.c, budget.delta());
    row.feasible = *row.cost <= budget.delta_max() + opt::kCostSlack;
    rows.emplace_back(row, pt.pol);
  }
  for (const auto& r : solve_all(objective, pt.s, pt.c, budget, cfg.e_max, grid_step)) {
    SweepRow row{std::string(opt::to_string(r.family)), {}, {}, {}, {}, r.feasible};
    if (has_value(r)) row.analytic = r.objective_value;
    if (r.policy) row.cost = r.cost_rate;
    rows.emplace_back(row, r.policy);
  }
  std::vector<SweepRow> out;
  for (auto& [row, pol] : rows) {
    if (simulate && pol) {
      auto sc = sim_config(cfg, *pol);
      sc.source = pt.s;
      sc.channel = pt.c;
      sc.delta = pt.budget.delta;
      const auto m = sim::run_many(sc, cfg.sim.reps);
      const auto& e = objective == opt::Objective::via    ? m.via
                      : objective == opt::Objective::aoiv ? m.aoiv
                                                          : m.aoii;
      row.simulated = e.mean;
      row.stderr_ = e.stderr_;
    }
    out.push_back(std::move(row));
  }
  return out;
}

std::string metric_path(const std::string& path, const std::string& metric) {
  const auto slash = path.find_last_of('/');
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) {
    return path + "_" + metric;
  }
  return path.substr(0, dot) + "_" + metric + path.substr(dot);
}

int cmd_sweep(const RunConfig& cfg, const Options& o, std::ostream& out, std::ostream& err) {
  if (!cfg.sweep) throw ConfigError("config needs a sweep section");
  if (!(o.grid_step > 0.0 && o.grid_step <= 0.1)) {
    throw ConfigError("--grid-step must lie in (0, 0.1]");
  }
  const auto& sw = *cfg.sweep;
  const auto values = sw.values();
  std::vector<SweepPoint> points;
  for (double v : values) points.push_back(sweep_point(cfg, sw.variable, v));

  struct Task {
    std::size_t point;
    std::size_t metric;
  };
  std::vector<Task> tasks;
  for (std::size_t m = 0; m < sw.metrics.size(); ++m)
    for (std::size_t k = 0; k < points.size(); ++k) tasks.push_back({k, m});
  std::vector<std::vector<SweepRow>> results(tasks.size());
  sim::parallel_for(tasks.size(), [&](std::size_t i) {
    const auto& t = tasks[i];
    results[i] = sweep_rows(cfg, points[t.point], opt::parse_objective(sw.metrics[t.metric]),
                            o.grid_step, sw.simulate);
  });

  auto write = [&](std::ostream& os, std::size_t metric) {
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      if (tasks[i].metric != metric) continue;
      for (const auto& r : results[i]) {
        os << sw.variable << ',' << num(values[tasks[i].point]) << ',' << r.policy << ','
           << sw.metrics[metric] << ',' << num(r.analytic) << ',' << num(r.simulated) << ','
           << num(r.stderr_) << ',' << num(r.cost) << ',' << boolean(r.feasible) << '\n';
      }
    }
  };
  if (o.out.empty()) {
    out << kSweepHeader << '\n';
    for (std::size_t m = 0; m < sw.metrics.size(); ++m) write(out, m);
  } else {
    for (std::size_t m = 0; m < sw.metrics.size(); ++m) {
      const auto path = metric_path(o.out, sw.metrics[m]);
      Sink sink(path, out);
      *sink << kSweepHeader << '\n';
      write(*sink, m);
      err << "wrote " << path << '\n';
    }
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sampling-policy analysis for a two-state Markov source over an erasure channel",
               "semvia"};
  app.require_subcommand(1);
  Options o;
  std::uint64_t seed = 0, horizon = 0, reps = 0, slots = 0;
  std::vector<std::pair<CLI::Option*, std::pair<std::uint64_t*, std::optional<std::uint64_t>*>>>
      counts;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "JSON run configuration");
    counts.push_back({sub->add_option("--seed", seed, "override sim.seed"), {&seed, &o.seed}});
    counts.push_back(
        {sub->add_option("--horizon", horizon, "override sim.horizon"), {&horizon, &o.horizon}});
    counts.push_back({sub->add_option("--reps", reps, "override sim.reps"), {&reps, &o.reps}});
    sub->add_option("--out", o.out, "write output to FILE instead of stdout");
    sub->add_flag("--dump-config", o.dump_config, "print the effective configuration and exit");
    return sub;
  };
  auto format = [&](CLI::App* sub) {
    sub->add_option("--format", o.format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
  };

  auto* analytic_cmd = common(app.add_subcommand("analytic", "closed-form metrics"));
  format(analytic_cmd);
  auto* simulate_cmd = common(app.add_subcommand("simulate", "Monte Carlo estimates"));
  format(simulate_cmd);
  simulate_cmd->add_option("--trace", o.trace_path, "per-slot CSV of the first replication");
  auto* validate_cmd =
      common(app.add_subcommand("validate", "simulation vs closed form vs chain oracle"));
  validate_cmd->add_option("--perturb", o.perturb,
                           "test fixture: scale every closed-form value by (1 + X)");
  auto* optimize_cmd = common(app.add_subcommand("optimize", "constrained optimal sampling"));
  format(optimize_cmd);
  optimize_cmd->add_option("--grid-step", o.grid_step, "MRSC search grid step");
  optimize_cmd->add_option("--preset", o.preset, "built-in batch (reference-tables)");
  auto* sweep_cmd = common(app.add_subcommand("sweep", "metric curves over a swept variable"));
  sweep_cmd->add_option("--grid-step", o.grid_step, "MRSC search grid step");
  auto* trace_cmd = common(app.add_subcommand("trace", "per-slot trace CSV"));
  counts.push_back({trace_cmd->add_option("--slots", slots, "number of slots to print"),
                    {&slots, &o.slots}});

  std::vector<const char*> argv{"semvia"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kInvalidInput;
  }
  for (const auto& [opt_ptr, target] : counts) {
    if (opt_ptr->count()) *target.second = *target.first;
  }

  try {
    const RunConfig cfg = load(o);
    if (o.dump_config) {
      out << to_json(cfg).dump(2) << '\n';
      return kOk;
    }
    if (analytic_cmd->parsed()) return cmd_analytic(cfg, o, out, err);
    if (simulate_cmd->parsed()) return cmd_simulate(cfg, o, out, err);
    if (validate_cmd->parsed()) return cmd_validate(cfg, o, out, err);
    if (optimize_cmd->parsed()) return cmd_optimize(cfg, o, out, err);
    if (sweep_cmd->parsed()) return cmd_sweep(cfg, o, out, err);
    if (trace_cmd->parsed()) return cmd_trace(cfg, o, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidInput;
  }
  return kInvalidInput;
}

}  // namespace semvia::cli
