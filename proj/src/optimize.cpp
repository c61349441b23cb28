#include "satarq/optimize.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include "satarq/error.hpp"

namespace satarq {

namespace {

using nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::size_t kMaxRows = 20'000'000;

const char* family_key(Family f) {
  switch (f) {
    case Family::kMaxTx:
      return "L";
    case Family::kQ:
      return "q";
    case Family::kPower:
      return "P";
  }
  return "?";
}

double gamma_at(const ChannelSpec& channel, double power) {
  if (const auto* d = std::get_if<DirectChannel>(&channel)) return d->gamma;
  // exp(-k / P) -> 0 as P -> 0.
  if (!(power > 0.0)) return 0.0;
  return resolve_gamma(RayleighChannel{power, std::get<RayleighChannel>(channel).rate});
}

double assigned(const Assignment& a, Family f, std::size_t i) {
  switch (f) {
    case Family::kMaxTx:
      return a.max_tx[i];
    case Family::kQ:
      return a.q[i];
    case Family::kPower:
      return a.power[i];
  }
  return kNaN;
}

SweepRow evaluate(const Scenario& tmpl, const std::vector<Dimension>& dims, const std::vector<std::size_t>& index,
                  const std::vector<std::vector<double>>& values) {
  const std::size_t n = tmpl.sources.size();
  SweepRow row;
  row.index = index;
  auto& a = row.assignment;
  for (const auto& s : tmpl.sources) {
    a.max_tx.push_back(s.max_tx);
    a.q.push_back(s.q);
    a.power.push_back(transmit_power(s.channel));
  }
  for (std::size_t d = 0; d < dims.size(); ++d) {
    const double v = values[d][index[d]];
    switch (dims[d].family) {
      case Family::kMaxTx:
        a.max_tx[dims[d].source] = static_cast<int>(std::lround(v));
        break;
      case Family::kQ:
        a.q[dims[d].source] = v;
        break;
      case Family::kPower:
        a.power[dims[d].source] = v;
        break;
    }
  }

  const double p = overall_ugp(a.q);
  const auto sel = selection_probabilities(a.q);
  double delivery = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double g = gamma_at(tmpl.sources[i].channel, a.power[i]);
    row.gamma.push_back(g);
    const SourceParams src{a.max_tx[i], p, sel[i], g};
    SourceMetrics m;
    if (sel[i] > 0.0 && g > 0.0) {
      m = source_metrics(src, a.power[i]);
    } else {
      row.timeliness_degenerate = true;
      m.mean_aoi = m.mean_paoi = m.mean_success_interval = kInf;
      m.duty_cycle = sel[i] > 0.0 ? duty_cycle(src) : 0.0;
      m.avg_power = a.power[i] * m.duty_cycle;
      m.ee = a.power[i] > 0.0 ? g / a.power[i] : 0.0;
      m.mean_tx_time = src.hold_prob() < 1.0 ? tx_time_stats(src.max_tx, p, g).mean : kNaN;
    }
    delivery += g * m.duty_cycle;
    row.total_power += m.avg_power;
    row.sources.push_back(m);
  }
  if (row.timeliness_degenerate) {
    row.source_avg_aoi = kInf;
    row.ws = kInf;
    row.overall_ee = row.total_power > 0.0 ? delivery / row.total_power : kNaN;
  } else {
    const auto sys = system_metrics(row.sources, 0.5, {});
    row.source_avg_aoi = sys.source_avg_aoi;
    row.overall_ee = sys.overall_ee;
  }
  return row;
}

template <class Pred>
std::optional<std::size_t> best_row(const SweepTable& t, ObjectiveKind kind, Pred keep) {
  std::optional<std::size_t> best;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    if (!keep(t.rows[r])) continue;
    const double v = kind == ObjectiveKind::kWeightedSum ? t.rows[r].ws : t.rows[r].overall_ee;
    if (!std::isfinite(v)) continue;
    if (!best) {
      best = r;
      continue;
    }
    const double b = kind == ObjectiveKind::kWeightedSum ? t.rows[*best].ws : t.rows[*best].overall_ee;
    if (kind == ObjectiveKind::kWeightedSum ? v < b : v > b) best = r;
  }
  return best;
}

bool swept(const SweepTable& t, Family f) {
  return std::any_of(t.dims.begin(), t.dims.end(), [&](const Dimension& d) { return d.family == f; });
}

OptResult optimize(const SweepTable& t, ObjectiveKind kind) {
  if (t.rows.empty()) throw EmptyGrid("sweep table has no rows");
  OptResult out;
  out.kind = kind;
  const auto best = best_row(t, kind, [](const SweepRow&) { return true; });
  if (!best) throw Degenerate("no grid point has a finite objective value");
  out.row = *best;
  out.value = kind == ObjectiveKind::kWeightedSum ? t.rows[*best].ws : t.rows[*best].overall_ee;

  auto add = [&](const std::string& name, auto pred) {
    if (const auto r = best_row(t, kind, pred)) {
      out.baselines.push_back({name, *r, kind == ObjectiveKind::kWeightedSum ? t.rows[*r].ws : t.rows[*r].overall_ee});
    }
  };

  if (t.num_sources > 1) {
    add("source_agnostic", [&](const SweepRow& row) {
      for (Family f : {Family::kMaxTx, Family::kQ, Family::kPower}) {
        if (!swept(t, f)) continue;
        for (std::size_t i = 1; i < t.num_sources; ++i) {
          if (assigned(row.assignment, f, i) != assigned(row.assignment, f, 0)) return false;
        }
      }
      return true;
    });
  }
  if (swept(t, Family::kMaxTx)) {
    add("narq", [](const SweepRow& row) {
      return std::all_of(row.assignment.max_tx.begin(), row.assignment.max_tx.end(), [](int l) { return l == 1; });
    });
    add("near_carq", [&](const SweepRow& row) {
      for (std::size_t d = 0; d < t.dims.size(); ++d) {
        if (t.dims[d].family == Family::kMaxTx && row.index[d] + 1 != t.dims[d].range.values().size()) return false;
      }
      return true;
    });
  }
  for (Family f : {Family::kQ, Family::kPower}) {
    if (!swept(t, f)) continue;
    const std::string prefix = std::string(family_key(f)) + "_";
    auto at = [&](auto pick) {
      return [&, pick](const SweepRow& row) {
        for (std::size_t d = 0; d < t.dims.size(); ++d) {
          if (t.dims[d].family == f && row.index[d] != pick(t.dims[d].range)) return false;
        }
        return true;
      };
    };
    add(prefix + "min", at([](const SweepRange&) { return std::size_t{0}; }));
    add(prefix + "median", at([](const SweepRange& r) { return r.median_index(); }));
    add(prefix + "max", at([](const SweepRange& r) { return r.values().size() - 1; }));
  }
  return out;
}

json number_json(double v) {
  if (std::isfinite(v)) return v;
  return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
}

json assignment_json(const Assignment& a) {
  json j;
  j["L"] = a.max_tx;
  j["q"] = json::array();
  j["P"] = json::array();
  for (double v : a.q) j["q"].push_back(number_json(v));
  for (double v : a.power) j["P"].push_back(number_json(v));
  return j;
}

}  // namespace

std::vector<double> SweepRange::values() const {
  if (!(step > 0.0) || !std::isfinite(step) || !std::isfinite(min) || !std::isfinite(max)) {
    throw InvalidConfig("sweep range needs finite bounds and step > 0");
  }
  if (min > max) throw EmptyGrid("sweep range has min > max");
  const auto count = static_cast<std::size_t>(std::floor((max - min) / step + 1e-9)) + 1;
  std::vector<double> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) out.push_back(std::min(max, min + static_cast<double>(k) * step));
  return out;
}

std::size_t SweepRange::median_index() const {
  const auto v = values();
  const double mid = 0.5 * (min + max);
  std::size_t best = 0;
  for (std::size_t k = 1; k < v.size(); ++k) {
    if (std::abs(v[k] - mid) < std::abs(v[best] - mid)) best = k;
  }
  return best;
}

GridSpec grid_from_json(const json& j, std::size_t num_sources) {
  std::vector<Violation> errs;
  GridSpec g;
  if (!j.is_object()) throw InvalidScenario(std::vector<Violation>{{"grid", "must be an object"}});
  for (const auto& [key, value] : j.items()) {
    if (key != "L" && key != "q" && key != "P") errs.push_back({"grid." + key, "unknown key"});
  }
  auto read = [&](const char* key, std::vector<std::optional<SweepRange>>& into, double lo, double hi, bool integral) {
    if (!j.contains(key)) return;
    const auto& arr = j[key];
    const std::string base = std::string("grid.") + key;
    if (!arr.is_array() || arr.size() != num_sources) {
      errs.push_back({base, "must be an array with one entry per source (" + std::to_string(num_sources) + ")"});
      return;
    }
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string f = base + "[" + std::to_string(i) + "]";
      const auto& e = arr[i];
      if (e.is_null()) {
        into.push_back(std::nullopt);
        continue;
      }
      into.push_back(std::nullopt);
      if (!e.is_object()) {
        errs.push_back({f, "must be null or {min, max, step}"});
        continue;
      }
      bool ok = true;
      for (const auto& [k, v] : e.items()) {
        if (k != "min" && k != "max" && k != "step") {
          errs.push_back({f + "." + k, "unknown key"});
          ok = false;
        }
      }
      SweepRange r;
      for (auto [name, slot] : {std::pair{"min", &r.min}, {"max", &r.max}, {"step", &r.step}}) {
        if (!e.contains(name) || !e[name].is_number()) {
          errs.push_back({f + "." + name, "is required and must be a number"});
          ok = false;
          continue;
        }
        *slot = e[name].get<double>();
        if (integral && *slot != std::floor(*slot)) {
          errs.push_back({f + "." + name, "must be an integer"});
          ok = false;
        }
      }
      if (!ok) continue;
      if (!(r.step > 0.0)) {
        errs.push_back({f + ".step", "must be > 0"});
        ok = false;
      }
      if (!(r.min <= r.max)) {
        errs.push_back({f, "is empty: min > max"});
        ok = false;
      }
      if (!(r.min >= lo && r.max <= hi)) {
        errs.push_back({f, "must lie within [" + format_number(lo) + ", " + format_number(hi) + "]"});
        ok = false;
      }
      if (ok) into.back() = r;
    }
  };
  read("L", g.max_tx, 1.0, 1e6, true);
  read("q", g.q, 0.0, 1.0, false);
  read("P", g.power, 0.0, kInf, false);
  if (!errs.empty()) throw InvalidScenario(std::move(errs));
  return g;
}

GridSpec load_grid(const std::string& path, std::size_t num_sources) {
  std::ifstream in(path);
  if (!in) throw InvalidScenario(std::vector<Violation>{{"grid", "cannot read file " + path}});
  std::stringstream ss;
  ss << in.rdbuf();
  json j;
  try {
    j = json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw InvalidScenario(std::vector<Violation>{{"grid", std::string("malformed JSON: ") + e.what()}});
  }
  return grid_from_json(j, num_sources);
}

std::vector<Dimension> dimensions(const GridSpec& grid, std::size_t num_sources) {
  std::vector<Dimension> out;
  auto collect = [&](Family f, const std::vector<std::optional<SweepRange>>& ranges) {
    if (!ranges.empty() && ranges.size() != num_sources) {
      throw InvalidConfig(std::string("grid ") + family_key(f) + " needs one entry per source");
    }
    for (std::size_t i = 0; i < ranges.size(); ++i) {
      if (ranges[i]) out.push_back({f, i, *ranges[i]});
    }
  };
  collect(Family::kMaxTx, grid.max_tx);
  collect(Family::kQ, grid.q);
  collect(Family::kPower, grid.power);
  return out;
}

SweepTable sweep(const Scenario& tmpl, const GridSpec& grid, double weight_aoi) {
  if (!(weight_aoi >= 0.0 && weight_aoi <= 1.0)) throw InvalidConfig("weight_aoi must be in [0, 1]");
  if (tmpl.sources.empty()) throw InvalidConfig("template scenario has no sources");
  SweepTable t;
  t.num_sources = tmpl.sources.size();
  t.weight_aoi = weight_aoi;
  t.dims = dimensions(grid, t.num_sources);

  std::vector<std::vector<double>> values;
  std::size_t total = 1;
  for (const auto& d : t.dims) {
    values.push_back(d.range.values());
    if (values.back().empty()) throw EmptyGrid("empty sweep range");
    total *= values.back().size();
    if (total > kMaxRows) throw InvalidConfig("grid has more than " + std::to_string(kMaxRows) + " points");
  }

  std::vector<std::vector<std::size_t>> indices(total);
  std::vector<std::size_t> idx(t.dims.size(), 0);
  for (std::size_t r = 0; r < total; ++r) {
    indices[r] = idx;
    for (std::size_t d = t.dims.size(); d-- > 0;) {
      if (++idx[d] < values[d].size()) break;
      idx[d] = 0;
    }
  }

  t.rows.resize(total);
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> failures(total);
  auto worker = [&] {
    for (std::size_t r = next++; r < total; r = next++) {
      try {
        t.rows[r] = evaluate(tmpl, t.dims, indices[r], values);
      } catch (...) {
        failures[r] = std::current_exception();
      }
    }
  };
  const auto threads = std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, std::max<std::size_t>(1, total / 64));
  std::vector<std::thread> pool;
  for (std::size_t k = 1; k < threads; ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  bool any = false;
  for (const auto& row : t.rows) {
    if (row.timeliness_degenerate) continue;
    if (!any) {
      t.norm = {row.source_avg_aoi, row.source_avg_aoi, row.total_power, row.total_power};
      any = true;
    }
    t.norm.aoi_min = std::min(t.norm.aoi_min, row.source_avg_aoi);
    t.norm.aoi_max = std::max(t.norm.aoi_max, row.source_avg_aoi);
    t.norm.power_min = std::min(t.norm.power_min, row.total_power);
    t.norm.power_max = std::max(t.norm.power_max, row.total_power);
  }
  for (auto& row : t.rows) {
    if (row.timeliness_degenerate) continue;
    row.ws = weight_aoi * normalize(row.source_avg_aoi, t.norm.aoi_min, t.norm.aoi_max) +
             (1.0 - weight_aoi) * normalize(row.total_power, t.norm.power_min, t.norm.power_max);
  }
  return t;
}

OptResult optimize_ws(const SweepTable& table) { return optimize(table, ObjectiveKind::kWeightedSum); }

OptResult optimize_ee(const SweepTable& table) {
  OptResult out = optimize(table, ObjectiveKind::kEnergyEfficiency);
  const auto& row = table.rows[out.row];
  double best_ee = 0.0;
  for (const auto& m : row.sources) best_ee = std::max(best_ee, m.ee);
  for (const auto& d : table.dims) {
    const std::size_t i = d.source;
    const double v = assigned(row.assignment, d.family, i);
    if (d.family != Family::kMaxTx && v == 0.0) {
      out.warnings.push_back({i, family_key(d.family), v,
                              std::string("optimal ") + family_key(d.family) +
                                  " is 0: the source is silenced and its AoI is infinite"});
      continue;
    }
    const bool at_min = row.index[&d - table.dims.data()] == 0;
    if (table.num_sources > 1 && at_min && row.sources[i].ee < best_ee) {
      out.warnings.push_back({i, family_key(d.family), v,
                              std::string("optimal ") + family_key(d.family) +
                                  " sits at the grid minimum while the source's EE is dominated; "
                                  "the optimum starves it and its timeliness degrades"});
    }
  }
  return out;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_sweep_csv(std::ostream& out, const SweepTable& t) {
  std::vector<std::string> head;
  for (const auto& d : t.dims) head.push_back(std::string(family_key(d.family)) + "_" + std::to_string(d.source + 1));
  for (std::size_t i = 1; i <= t.num_sources; ++i) {
    for (const char* name : {"mean_aoi", "mean_paoi", "duty_cycle", "avg_power", "ee"}) {
      head.push_back(std::string(name) + "_" + std::to_string(i));
    }
  }
  for (const char* name : {"source_avg_aoi", "total_power", "ws", "overall_ee", "flags"}) head.emplace_back(name);
  for (std::size_t k = 0; k < head.size(); ++k) out << (k ? "," : "") << head[k];
  out << "\n";

  for (const auto& row : t.rows) {
    std::string line;
    auto cell = [&](const std::string& s) {
      if (!line.empty()) line += ",";
      line += s;
    };
    for (const auto& d : t.dims) {
      const double v = assigned(row.assignment, d.family, d.source);
      cell(d.family == Family::kMaxTx ? std::to_string(static_cast<int>(v)) : format_number(v));
    }
    for (const auto& m : row.sources) {
      for (double v : {m.mean_aoi, m.mean_paoi, m.duty_cycle, m.avg_power, m.ee}) cell(format_number(v));
    }
    for (double v : {row.source_avg_aoi, row.total_power, row.ws, row.overall_ee}) cell(format_number(v));
    line += ",";
    if (row.timeliness_degenerate) line += "degenerate_timeliness";
    out << line << "\n";
  }
}

json opt_result_json(const OptResult& r, const SweepTable& t) {
  json j;
  j["objective"] = r.kind == ObjectiveKind::kWeightedSum ? "ws" : "ee";
  if (r.kind == ObjectiveKind::kWeightedSum) j["weight_aoi"] = t.weight_aoi;
  j["rows"] = t.rows.size();
  j["optimum"] = {{"row", r.row}, {"value", number_json(r.value)}, {"assignment", assignment_json(t.rows[r.row].assignment)}};
  j["baselines"] = json::object();
  for (const auto& b : r.baselines) {
    j["baselines"][b.name] = {{"row", b.row}, {"value", number_json(b.value)},
                              {"assignment", assignment_json(t.rows[b.row].assignment)}};
  }
  j["normalization"] = {{"aoi_min", t.norm.aoi_min}, {"aoi_max", t.norm.aoi_max},
                        {"power_min", t.norm.power_min}, {"power_max", t.norm.power_max}};
  j["warnings"] = json::array();
  for (const auto& w : r.warnings) {
    j["warnings"].push_back({{"source", w.source}, {"parameter", w.parameter}, {"value", w.value}, {"reason", w.reason}});
  }
  return j;
}

}  // namespace satarq
