#include "satarq/cli.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"
#include "satarq/error.hpp"
#include "satarq/metrics.hpp"
#include "satarq/model.hpp"
#include "satarq/optimize.hpp"
#include "satarq/scenario_io.hpp"
#include "satarq/sim.hpp"

namespace satarq {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct Options {
  std::string scenario;
  std::string out = ".";
  std::string objective;
  std::string grid;
  std::optional<double> weight;
  std::optional<std::int64_t> slots;
  std::optional<std::uint64_t> seed;
  std::optional<int> replications;
  double tolerance_mean = 0.01;
  double tolerance_tv = 0.005;
};

// Input problem reported with exit code 2.
struct InputFailure {
  std::string path;
  std::string kind;
  std::vector<Violation> violations;
};

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json num(double v) {
  if (std::isfinite(v)) return v;
  return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
}

json metrics_json(const SourceMetrics& m) {
  return {{"mean_aoi", num(m.mean_aoi)},
          {"mean_paoi", num(m.mean_paoi)},
          {"duty_cycle", num(m.duty_cycle)},
          {"avg_power", num(m.avg_power)},
          {"ee", num(m.ee)},
          {"mean_tx_time", num(m.mean_tx_time)},
          {"mean_success_interval", num(m.mean_success_interval)}};
}

class Writer {
 public:
  explicit Writer(fs::path dir) : dir_(std::move(dir)) {}

  void text(const std::string& name, const std::string& body) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    std::ofstream f(dir_ / name, std::ios::binary);
    if (!f) throw InvalidConfig("cannot write " + (dir_ / name).string());
    f << body;
    outputs_.push_back(name);
  }
  void json_file(const std::string& name, const json& j) { text(name, j.dump(2) + "\n"); }
  const std::vector<std::string>& outputs() const { return outputs_; }

 private:
  fs::path dir_;
  std::vector<std::string> outputs_;
};

void write_pmf_csv(Writer& w, const std::string& name, const Pmf& aoi, const Pmf& paoi) {
  std::string body = "n,aoi_pmf,paoi_pmf\n";
  const std::int64_t last = std::max(aoi.horizon(), paoi.horizon());
  for (std::int64_t n = Pmf::kFirstIndex; n <= last; ++n) {
    body += std::to_string(n) + "," + format_number(aoi.at(n)) + "," + format_number(paoi.at(n)) + "\n";
  }
  w.text(name, body);
}

Scenario load_with_overrides(const Options& o) {
  Scenario s = load_scenario(o.scenario);
  if (o.slots) s.sim.slots = *o.slots;
  if (o.seed) s.sim.seed = *o.seed;
  if (o.replications) s.sim.replications = *o.replications;
  validate(s);
  return s;
}

void require_renewing(const Scenario& s, const DerivedParams& d, const std::string& path) {
  std::vector<Violation> errs;
  for (std::size_t i = 0; i < s.sources.size(); ++i) {
    if (s.sources[i].q > 0.0 && d.sources[i].success_prob == 0.0) {
      errs.push_back({"sources[" + std::to_string(i) + "].channel", "success probability is 0, so the AoI never renews"});
    }
  }
  if (!errs.empty()) throw InputFailure{path, "Degenerate", std::move(errs)};
}

json analysis_json(const Scenario& s, const DerivedParams& d, const std::vector<SourceReport>& reports) {
  json j;
  j["overall_ugp"] = d.overall_ugp;
  j["sources"] = json::array();
  std::vector<SourceMetrics> included;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& sd = d.sources[i];
    json e{{"index", i},
           {"q", s.sources[i].q},
           {"L", s.sources[i].max_tx},
           {"select_prob", sd.select_prob},
           {"gamma", sd.success_prob},
           {"hold_prob", sd.hold_prob},
           {"power", sd.power}};
    if (std::holds_alternative<RayleighChannel>(s.sources[i].channel)) {
      const auto cert = power_monotonicity_certificate(s.sources[i].max_tx, d.overall_ugp, sd.success_prob);
      e["power_increasing_certificate"] = cert.certified() ? json(to_string(*cert.condition)) : json(nullptr);
    }
    if (reports[i].available) {
      e["status"] = "ok";
      e["metrics"] = metrics_json(reports[i].metrics);
      e["aoi_tail_mass"] = reports[i].aoi.tail_mass;
      e["paoi_tail_mass"] = reports[i].paoi.tail_mass;
      included.push_back(reports[i].metrics);
    } else {
      e["status"] = "excluded";
      e["note"] = reports[i].note;
    }
    j["sources"].push_back(e);
  }
  const auto sys = system_metrics(included, 0.5, {});
  j["system"] = {{"sources_included", included.size()},
                 {"source_avg_aoi", sys.source_avg_aoi},
                 {"total_power", sys.total_power},
                 {"overall_ee", num(sys.overall_ee)},
                 {"harmonic_timeliness", sys.harmonic_timeliness}};
  return j;
}

json simulation_json(const Scenario& s, const SimPlan& plan, const SimCounters& c,
                     const std::vector<SourceReport>& reports) {
  json j;
  j["plan"] = {{"slots", plan.slots},
               {"warmup", plan.warmup},
               {"histogram_cap", plan.histogram_cap},
               {"replications", s.sim.replications},
               {"seed", s.sim.seed}};
  j["slots_counted"] = c.slots_counted;
  j["sources"] = json::array();
  for (std::size_t i = 0; i < c.sources.size(); ++i) {
    const auto& sc = c.sources[i];
    json e{{"index", i},
           {"counters",
            {{"busy_slots", sc.busy_slots},
             {"deliveries", sc.deliveries},
             {"drops", sc.drops},
             {"preemptions", sc.preemptions},
             {"energy", sc.energy()},
             {"aoi_overflow", sc.aoi_histogram.back()},
             {"paoi_overflow", sc.paoi_histogram.back()},
             {"attempts_histogram", sc.attempts_histogram}}}};
    if (reports[i].available) {
      e["status"] = "ok";
      e["metrics"] = metrics_json(reports[i].metrics);
    } else {
      e["status"] = "unavailable";
      e["note"] = reports[i].note;
    }
    j["sources"].push_back(e);
  }
  return j;
}

json validation_json(const ValidationReport& r, const Tolerances& tol) {
  json j;
  j["pass"] = r.pass;
  j["tolerances"] = {{"mean", tol.mean}, {"tv", tol.tv}};
  j["sources"] = json::array();
  for (std::size_t i = 0; i < r.sources.size(); ++i) {
    const auto& v = r.sources[i];
    json e{{"index", i}, {"compared", v.compared}};
    if (!v.note.empty()) e["note"] = v.note;
    e["checks"] = json::array();
    for (const auto& c : v.checks) {
      json cj{{"name", c.name}, {"error", num(c.error)}, {"tolerance", c.tolerance}, {"pass", c.pass}};
      if (c.name.rfind("tv_", 0) != 0) {
        cj["analytic"] = num(c.analytic);
        cj["empirical"] = num(c.empirical);
      }
      e["checks"].push_back(cj);
    }
    j["sources"].push_back(e);
  }
  return j;
}

int cmd_analyze(const Options& o, Writer& w, std::ostream& out) {
  const Scenario s = load_with_overrides(o);
  const DerivedParams d = derive(s);
  require_renewing(s, d, o.scenario);
  const auto reports = analytic_metrics(s, d);
  w.json_file("analysis.json", analysis_json(s, d, reports));
  for (std::size_t i = 0; i < reports.size(); ++i) {
    if (!reports[i].available) {
      out << "source " << i + 1 << ": " << reports[i].note << "\n";
      continue;
    }
    write_pmf_csv(w, "pmf_source_" + std::to_string(i + 1) + ".csv", reports[i].aoi, reports[i].paoi);
    out << "source " << i + 1 << ": mean AoI " << format_number(reports[i].metrics.mean_aoi) << ", mean PAoI "
        << format_number(reports[i].metrics.mean_paoi) << ", avg power " << format_number(reports[i].metrics.avg_power)
        << "\n";
  }
  return 0;
}

struct SimRun {
  SimPlan plan;
  SimCounters counters;
  std::vector<SourceReport> reports;
};

SimRun simulate(const Scenario& s, const DerivedParams& d, Writer& w) {
  SimRun r;
  r.plan = plan_simulation(s, d);
  r.counters = run_simulation(s, d);
  r.reports = empirical_metrics(r.counters);
  w.json_file("simulation.json", simulation_json(s, r.plan, r.counters, r.reports));
  for (std::size_t i = 0; i < r.reports.size(); ++i) {
    if (r.reports[i].available) {
      write_pmf_csv(w, "empirical_pmf_source_" + std::to_string(i + 1) + ".csv", r.reports[i].aoi, r.reports[i].paoi);
    }
  }
  return r;
}

int cmd_simulate(const Options& o, Writer& w, std::ostream& out) {
  const Scenario s = load_with_overrides(o);
  const DerivedParams d = derive(s);
  const auto r = simulate(s, d, w);
  for (std::size_t i = 0; i < r.reports.size(); ++i) {
    out << "source " << i + 1 << ": ";
    if (r.reports[i].available) {
      out << "mean AoI " << format_number(r.reports[i].metrics.mean_aoi) << ", deliveries "
          << r.counters.sources[i].deliveries << "\n";
    } else {
      out << r.reports[i].note << "\n";
    }
  }
  return 0;
}

int cmd_validate(const Options& o, Writer& w, std::ostream& out) {
  const Scenario s = load_with_overrides(o);
  const DerivedParams d = derive(s);
  require_renewing(s, d, o.scenario);
  const auto analytic = analytic_metrics(s, d);
  w.json_file("analysis.json", analysis_json(s, d, analytic));
  const auto r = simulate(s, d, w);
  const Tolerances tol{o.tolerance_mean, o.tolerance_tv};
  const auto report = compare(analytic, r.reports, tol);
  w.json_file("validation.json", validation_json(report, tol));
  for (std::size_t i = 0; i < report.sources.size(); ++i) {
    const auto& v = report.sources[i];
    if (!v.compared) {
      out << "source " << i + 1 << ": not compared (" << v.note << ")\n";
      continue;
    }
    for (const auto& c : v.checks) {
      out << "source " << i + 1 << " " << c.name << ": " << (c.pass ? "PASS" : "FAIL") << " error "
          << format_number(c.error) << " tolerance " << format_number(c.tolerance) << "\n";
    }
  }
  out << (report.pass ? "validation passed" : "validation FAILED") << "\n";
  return report.pass ? 0 : 1;
}

std::string describe(const Assignment& a) {
  std::string s;
  for (std::size_t i = 0; i < a.q.size(); ++i) {
    s += (i ? "; " : "") + std::string("source ") + std::to_string(i + 1) + ": L=" + std::to_string(a.max_tx[i]) +
         " q=" + format_number(a.q[i]) + " P=" + format_number(a.power[i]);
  }
  return s;
}

int cmd_optimize(const Options& o, Writer& w, std::ostream& out, bool verbose) {
  const Scenario s = load_with_overrides(o);
  if (o.grid.empty()) throw InputFailure{"", "InvalidInput", {{"--grid", "a grid file is required"}}};
  GridSpec grid;
  try {
    grid = load_grid(o.grid, s.sources.size());
  } catch (const InvalidScenario& e) {
    throw InputFailure{o.grid, "InvalidGrid", e.violations()};
  }
  ObjectiveKind kind = s.objective ? s.objective->kind : ObjectiveKind::kWeightedSum;
  if (o.objective == "ws") kind = ObjectiveKind::kWeightedSum;
  if (o.objective == "ee") kind = ObjectiveKind::kEnergyEfficiency;
  const double weight = o.weight ? *o.weight : (s.objective ? s.objective->weight_aoi : 0.5);

  const SweepTable table = sweep(s, grid, weight);
  const OptResult result = kind == ObjectiveKind::kWeightedSum ? optimize_ws(table) : optimize_ee(table);
  std::ostringstream csv;
  write_sweep_csv(csv, table);
  w.text("sweep.csv", csv.str());
  json j = opt_result_json(result, table);
  j["table"] = "sweep.csv";
  w.json_file("optimize.json", j);

  const char* label = kind == ObjectiveKind::kWeightedSum ? "WS" : "overall EE";
  out << table.rows.size() << " grid points\n";
  out << "optimum " << label << " " << format_number(result.value) << " at "
      << describe(table.rows[result.row].assignment) << "\n";
  if (verbose) {
    for (const auto& b : result.baselines) {
      out << "baseline " << b.name << " " << label << " " << format_number(b.value) << " at "
          << describe(table.rows[b.row].assignment) << "\n";
    }
  }
  for (const auto& wn : result.warnings) out << "warning: source " << wn.source + 1 << " " << wn.reason << "\n";
  return 0;
}

void print_errors(std::ostream& err, const std::string& path, const std::string& kind,
                  const std::vector<Violation>& violations) {
  json j;
  j["errors"] = json::array();
  for (const auto& v : violations) {
    j["errors"].push_back({{"path", path}, {"field", v.field}, {"reason", v.reason}, {"kind", kind}});
  }
  err << j.dump(2) << "\n";
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Age of information and energy analysis for source-aware truncated ARQ", "satarq"};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", kToolVersion);
  Options o;

  auto common = [&](CLI::App* sub, bool with_sim, bool with_opt) {
    sub->add_option("--scenario", o.scenario, "scenario JSON file")->required();
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--slots", o.slots, "override sim.slots")->check(CLI::PositiveNumber);
    sub->add_option("--seed", o.seed, "override sim.seed");
    sub->add_option("--replications", o.replications, "override sim.replications")->check(CLI::PositiveNumber);
    if (with_sim) {
      sub->add_option("--tolerance-mean", o.tolerance_mean, "relative tolerance for scalar metrics")
          ->check(CLI::PositiveNumber);
      sub->add_option("--tolerance-tv", o.tolerance_tv, "tolerance for total-variation distance")
          ->check(CLI::PositiveNumber);
    }
    if (with_opt) {
      sub->add_option("--objective", o.objective, "ws or ee")->check(CLI::IsMember({"ws", "ee"}));
      sub->add_option("--weight", o.weight, "AoI weight of the weighted sum")->check(CLI::Range(0.0, 1.0));
      sub->add_option("--grid", o.grid, "GridSpec JSON file");
    }
  };
  auto* analyze = app.add_subcommand("analyze", "closed-form metrics and PMFs");
  auto* simulate_cmd = app.add_subcommand("simulate", "slot-level Monte Carlo");
  auto* validate = app.add_subcommand("validate", "simulate and compare against the closed forms");
  auto* sweep_cmd = app.add_subcommand("sweep", "evaluate every grid point");
  auto* optimize_cmd = app.add_subcommand("optimize", "grid optimum with baselines");
  common(analyze, false, false);
  common(simulate_cmd, false, false);
  common(validate, true, false);
  common(sweep_cmd, false, true);
  common(optimize_cmd, false, true);

  std::vector<std::string> rev(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
  std::reverse(rev.begin(), rev.end());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  const std::string started = utc_now();
  Writer w(o.out);
  std::string command;
  int code = 0;
  try {
    if (*analyze) {
      command = "analyze";
      code = cmd_analyze(o, w, out);
    } else if (*simulate_cmd) {
      command = "simulate";
      code = cmd_simulate(o, w, out);
    } else if (*validate) {
      command = "validate";
      code = cmd_validate(o, w, out);
    } else if (*sweep_cmd) {
      command = "sweep";
      code = cmd_optimize(o, w, out, false);
    } else {
      command = "optimize";
      code = cmd_optimize(o, w, out, true);
    }
  } catch (const InputFailure& f) {
    print_errors(err, f.path.empty() ? o.scenario : f.path, f.kind, f.violations);
    return 2;
  } catch (const InvalidScenario& e) {
    print_errors(err, o.scenario, "InvalidScenario", e.violations());
    return 2;
  } catch (const Degenerate& e) {
    print_errors(err, o.scenario, "Degenerate", {{"sources", e.what()}});
    return 2;
  } catch (const EmptyGrid& e) {
    print_errors(err, o.grid, "EmptyGrid", {{"grid", e.what()}});
    return 2;
  } catch (const Error& e) {
    print_errors(err, o.scenario, "Error", {{"", e.what()}});
    return 2;
  }

  const Scenario s = load_with_overrides(o);
  json manifest{{"tool", "satarq"},
                {"version", kToolVersion},
                {"command", command},
                {"scenario", o.scenario},
                {"scenario_fingerprint", hex64(scenario_fingerprint(s))},
                {"seed", s.sim.seed},
                {"started_at", started},
                {"finished_at", utc_now()},
                {"exit_code", code}};
  if (!o.grid.empty()) manifest["grid"] = o.grid;
  auto outputs = w.outputs();
  outputs.push_back("manifest.json");
  manifest["outputs"] = outputs;
  w.json_file("manifest.json", manifest);
  return code;
}

}  // namespace satarq
