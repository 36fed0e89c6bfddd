#include <pybind11/functional.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "cli.hpp"
#include "semvia/analytic.hpp"
#include "semvia/errors.hpp"
#include "semvia/optimizer.hpp"
#include "semvia/oracle.hpp"
#include "semvia/simulation.hpp"

namespace py = pybind11;
using namespace semvia;

namespace {

py::dict report_dict(const analytic::AnalyticReport& r) {
  py::dict d;
  d["avg_via"] = r.avg_via;
  d["avg_aoiv"] = r.avg_aoiv;
  d["avg_aoii"] = r.avg_aoii;
  d["p_e"] = r.p_e;
  d["cost_rate"] = r.cost_rate;
  d["via_divergent"] = r.via_divergent;
  return d;
}

py::tuple estimate(const sim::Estimate& e) { return py::make_tuple(e.mean, e.stderr_); }

py::dict summary_dict(const sim::MetricsSummary& m) {
  py::dict d;
  d["avg_via"] = estimate(m.via);
  d["avg_aoiv"] = estimate(m.aoiv);
  d["avg_aoii"] = estimate(m.aoii);
  d["p_e"] = estimate(m.p_e);
  d["cost_rate"] = estimate(m.cost_rate);
  d["sample_rate"] = estimate(m.sample_rate);
  d["slots"] = m.slots;
  d["replications"] = m.replications;
  d["invariant_violations"] = m.invariant_violations;
  return d;
}

py::dict result_dict(const opt::OptResult& r) {
  py::dict d;
  d["family"] = std::string(opt::to_string(r.family));
  d["objective"] = std::string(opt::to_string(r.objective));
  d["feasible"] = r.feasible;
  d["policy"] = r.policy;
  d["objective_value"] = r.feasible ? py::cast(r.objective_value) : py::none();
  d["cost_rate"] = r.cost_rate;
  d["p_e"] = r.p_e;
  d["cost_binding"] = r.cost_binding;
  d["error_binding"] = r.error_binding;
  d["degenerate"] = r.degenerate;
  d["note"] = r.note;
  return d;
}

sim::SimConfig make_config(const SourceParams& s, const ChannelParams& c, const Policy& pol,
                           std::uint64_t horizon, std::uint64_t seed, std::uint64_t burn_in,
                           double delta) {
  sim::SimConfig cfg;
  cfg.source = s;
  cfg.channel = c;
  cfg.policy = pol;
  cfg.horizon = horizon;
  cfg.seed = seed;
  cfg.burn_in = burn_in;
  cfg.delta = delta;
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_semvia, m) {
  m.doc() = "Two-state Markov source over an erasure channel: closed forms, oracle, optimizer, "
            "Monte Carlo";

  py::register_exception<NotIrreducible>(m, "NotIrreducible", PyExc_RuntimeError);
  py::register_exception<TruncationTooSmall>(m, "TruncationTooSmall", PyExc_RuntimeError);
  py::register_exception<NoConvergence>(m, "NoConvergence", PyExc_RuntimeError);
  py::register_exception<DivergentSeries>(m, "DivergentSeries", PyExc_ArithmeticError);

  py::class_<SourceParams>(m, "SourceParams")
      .def(py::init<double, double>(), py::arg("p"), py::arg("q"))
      .def_property_readonly("p", &SourceParams::p)
      .def_property_readonly("q", &SourceParams::q)
      .def("__repr__", [](const SourceParams& s) {
        std::ostringstream os;
        os << "SourceParams(p=" << s.p() << ", q=" << s.q() << ")";
        return os.str();
      });

  py::class_<ChannelParams>(m, "ChannelParams")
      .def(py::init<double>(), py::arg("p_s"))
      .def_property_readonly("p_s", &ChannelParams::ps)
      .def("__repr__", [](const ChannelParams& c) {
        std::ostringstream os;
        os << "ChannelParams(p_s=" << c.ps() << ")";
        return os.str();
      });

  py::class_<Policy>(m, "Policy")
      .def_static("rs", &Policy::rs, py::arg("p_a"))
      .def_static("mrs", &Policy::mrs, py::arg("q1"), py::arg("q2"))
      .def_static("change_aware", &Policy::change_aware)
      .def_static("semantics_aware", &Policy::semantics_aware)
      .def_property_readonly("name", [](const Policy& p) { return std::string(p.name()); })
      .def("__repr__", &Policy::label)
      .def(py::self == py::self);

  m.def("evaluate",
        [](const Policy& pol, const SourceParams& s, const ChannelParams& c, double delta) {
          return report_dict(analytic::evaluate(pol, s, c, delta));
        },
        py::arg("policy"), py::arg("source"), py::arg("channel"), py::arg("delta") = 1.0);
  m.def("via_average", &analytic::via_average);
  m.def("aoiv_average", &analytic::aoiv_average);
  m.def("aoii_average", &analytic::aoii_average);
  m.def("aoii_pmf", &analytic::aoii_pmf);
  m.def("reconstruction_error", &analytic::reconstruction_error);
  m.def("sampling_cost_rate", &analytic::sampling_cost_rate);

  m.def("oracle_aoii_mean", &oracle::aoii_mean_oracle);
  m.def("oracle_via_mean", [](const Policy& pol, const SourceParams& s, const ChannelParams& c) {
    return oracle::via_oracle(pol, s, c).mean;
  });
  m.def("oracle_sync", &oracle::sync_oracle);

  m.def("simulate",
        [](const Policy& pol, const SourceParams& s, const ChannelParams& c, std::uint64_t horizon,
           std::uint64_t seed, std::uint64_t reps, std::uint64_t burn_in, double delta) {
          const auto cfg = make_config(s, c, pol, horizon, seed, burn_in, delta);
          sim::MetricsSummary out;
          {
            py::gil_scoped_release release;
            out = sim::run_many(cfg, reps);
          }
          return summary_dict(out);
        },
        py::arg("policy"), py::arg("source"), py::arg("channel"), py::arg("horizon") = 1'000'000,
        py::arg("seed") = 1, py::arg("reps") = 1, py::arg("burn_in") = 0, py::arg("delta") = 1.0);
  m.def("trace",
        [](const Policy& pol, const SourceParams& s, const ChannelParams& c, std::uint64_t horizon,
           std::uint64_t seed) {
          std::vector<std::tuple<std::uint64_t, int, int, bool, bool, std::uint64_t,
                                 std::uint64_t, std::uint64_t>>
              rows;
          sim::run(make_config(s, c, pol, horizon, seed, 0, 1.0), [&](const sim::TraceSlot& t) {
            rows.emplace_back(t.t, t.x, t.xhat, t.sampled, t.delivered, t.via, t.aoiv, t.aoii);
          });
          return rows;
        },
        py::arg("policy"), py::arg("source"), py::arg("channel"), py::arg("horizon") = 1000,
        py::arg("seed") = 1);

  m.def("q_star_equal", &opt::q_star_equal, py::arg("source"), py::arg("channel"), py::arg("eta"));
  m.def("solve_rsc",
        [](const std::string& objective, const SourceParams& s, const ChannelParams& c,
           double eta, double e_max) {
          const auto budget = opt::CostBudget::from_eta(eta);
          const auto obj = opt::parse_objective(objective);
          return result_dict(obj == opt::Objective::via ? opt::solve_via_rsc(s, c, budget, e_max)
                                                        : opt::solve_rsc(obj, s, c, budget));
        },
        py::arg("objective"), py::arg("source"), py::arg("channel"), py::arg("eta"),
        py::arg("e_max") = 1.0);
  m.def("solve_mrsc",
        [](const std::string& objective, const SourceParams& s, const ChannelParams& c,
           double eta, double grid_step) {
          return result_dict(opt::solve_mrsc(opt::parse_objective(objective), s, c,
                                             opt::CostBudget::from_eta(eta), grid_step));
        },
        py::arg("objective"), py::arg("source"), py::arg("channel"), py::arg("eta"),
        py::arg("grid_step") = opt::kDefaultGridStep);

  m.def("run_cli",
        [](const std::vector<std::string>& args) {
          std::ostringstream out, err;
          int code;
          {
            py::gil_scoped_release release;
            code = cli::run(args, out, err);
          }
          return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs a semvia subcommand in-process; returns (exit_code, stdout, stderr).");
}
