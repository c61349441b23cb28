#include "satarq/scenario_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "satarq/error.hpp"

namespace satarq {

namespace {

using nlohmann::json;

class Reader {
 public:
  std::vector<Violation> errs;

  bool object(const json& j, const std::string& field, const std::set<std::string>& allowed) {
    if (!j.is_object()) {
      errs.push_back({field.empty() ? "$" : field, "must be an object"});
      return false;
    }
    for (const auto& [key, value] : j.items()) {
      if (!allowed.count(key)) errs.push_back({join(field, key), "unknown key"});
    }
    return true;
  }

  std::optional<double> number(const json& obj, const std::string& field, const char* key, bool required) {
    if (!obj.contains(key)) {
      if (required) errs.push_back({join(field, key), "is required"});
      return std::nullopt;
    }
    const auto& v = obj.at(key);
    if (!v.is_number()) {
      errs.push_back({join(field, key), "must be a number"});
      return std::nullopt;
    }
    return v.get<double>();
  }

  std::optional<std::int64_t> integer(const json& obj, const std::string& field, const char* key, bool required) {
    if (!obj.contains(key)) {
      if (required) errs.push_back({join(field, key), "is required"});
      return std::nullopt;
    }
    const auto& v = obj.at(key);
    if (!v.is_number_integer()) {
      errs.push_back({join(field, key), "must be an integer"});
      return std::nullopt;
    }
    return v.get<std::int64_t>();
  }

  static std::string join(const std::string& field, const std::string& key) {
    return field.empty() ? key : field + "." + key;
  }
};

ChannelSpec read_channel(Reader& rd, const json& j, const std::string& field) {
  if (!rd.object(j, field, {"direct", "rayleigh"})) return DirectChannel{};
  if (j.size() != 1) {
    rd.errs.push_back({field, "must hold exactly one of \"direct\" or \"rayleigh\""});
    return DirectChannel{};
  }
  if (j.contains("direct")) {
    const std::string f = field + ".direct";
    DirectChannel d;
    if (rd.object(j["direct"], f, {"gamma", "P"})) {
      if (auto g = rd.number(j["direct"], f, "gamma", true)) d.gamma = *g;
      if (auto p = rd.number(j["direct"], f, "P", false)) d.power = *p;
    }
    return d;
  }
  const std::string f = field + ".rayleigh";
  RayleighChannel r;
  if (rd.object(j["rayleigh"], f, {"P", "R"})) {
    if (auto p = rd.number(j["rayleigh"], f, "P", true)) r.power = *p;
    if (auto rate = rd.number(j["rayleigh"], f, "R", true)) r.rate = *rate;
  }
  return r;
}

}  // namespace

Scenario scenario_from_json(const json& j) {
  Reader rd;
  Scenario s;
  if (!rd.object(j, "", {"sources", "sim", "objective"})) throw InvalidScenario(std::move(rd.errs));

  if (!j.contains("sources")) {
    rd.errs.push_back({"sources", "is required"});
  } else if (!j["sources"].is_array()) {
    rd.errs.push_back({"sources", "must be an array"});
  } else {
    const auto& arr = j["sources"];
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string f = "sources[" + std::to_string(i) + "]";
      SourceSpec src;
      if (rd.object(arr[i], f, {"q", "L", "channel"})) {
        if (auto q = rd.number(arr[i], f, "q", true)) src.q = *q;
        if (auto l = rd.integer(arr[i], f, "L", true)) src.max_tx = static_cast<int>(std::clamp<std::int64_t>(*l, -1, 1 << 30));
        if (!arr[i].contains("channel")) {
          rd.errs.push_back({f + ".channel", "is required"});
        } else {
          src.channel = read_channel(rd, arr[i]["channel"], f + ".channel");
        }
      }
      s.sources.push_back(src);
    }
  }

  if (j.contains("sim")) {
    const auto& sim = j["sim"];
    if (rd.object(sim, "sim", {"slots", "warmup", "seed", "replications", "histogram_cap"})) {
      if (auto v = rd.integer(sim, "sim", "slots", false)) s.sim.slots = *v;
      if (auto v = rd.integer(sim, "sim", "warmup", false)) s.sim.warmup = *v;
      if (sim.contains("seed")) {
        if (sim["seed"].is_number_unsigned()) {
          s.sim.seed = sim["seed"].get<std::uint64_t>();
        } else {
          rd.errs.push_back({"sim.seed", "must be a non-negative integer"});
        }
      }
      if (auto v = rd.integer(sim, "sim", "replications", false)) {
        s.sim.replications = static_cast<int>(std::clamp<std::int64_t>(*v, -1, 1 << 20));
      }
      if (auto v = rd.integer(sim, "sim", "histogram_cap", false)) s.sim.histogram_cap = *v;
    }
  }

  if (j.contains("objective")) {
    const auto& obj = j["objective"];
    if (rd.object(obj, "objective", {"kind", "weight_aoi"})) {
      ObjectiveSpec spec;
      if (obj.contains("kind")) {
        const auto& k = obj["kind"];
        if (k == "ws") {
          spec.kind = ObjectiveKind::kWeightedSum;
        } else if (k == "ee") {
          spec.kind = ObjectiveKind::kEnergyEfficiency;
        } else {
          rd.errs.push_back({"objective.kind", "must be \"ws\" or \"ee\""});
        }
      }
      if (auto w = rd.number(obj, "objective", "weight_aoi", false)) spec.weight_aoi = *w;
      s.objective = spec;
    }
  }

  if (!rd.errs.empty()) throw InvalidScenario(std::move(rd.errs));
  validate(s);
  return s;
}

Scenario parse_scenario_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidScenario(std::vector<Violation>{{"$", std::string("malformed JSON: ") + e.what()}});
  }
  return scenario_from_json(j);
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidScenario(std::vector<Violation>{{"$", "cannot read file " + path}});
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario_text(ss.str());
}

json scenario_to_json(const Scenario& scenario) {
  json j;
  j["sources"] = json::array();
  for (const auto& s : scenario.sources) {
    json src{{"q", s.q}, {"L", s.max_tx}};
    if (const auto* d = std::get_if<DirectChannel>(&s.channel)) {
      src["channel"] = {{"direct", {{"gamma", d->gamma}, {"P", d->power}}}};
    } else {
      const auto& r = std::get<RayleighChannel>(s.channel);
      src["channel"] = {{"rayleigh", {{"P", r.power}, {"R", r.rate}}}};
    }
    j["sources"].push_back(src);
  }
  json sim{{"slots", scenario.sim.slots}, {"seed", scenario.sim.seed}, {"replications", scenario.sim.replications}};
  if (scenario.sim.warmup) sim["warmup"] = *scenario.sim.warmup;
  if (scenario.sim.histogram_cap) sim["histogram_cap"] = *scenario.sim.histogram_cap;
  j["sim"] = sim;
  if (scenario.objective) {
    j["objective"] = {{"kind", scenario.objective->kind == ObjectiveKind::kWeightedSum ? "ws" : "ee"},
                      {"weight_aoi", scenario.objective->weight_aoi}};
  }
  return j;
}

std::string canonical_json(const Scenario& scenario) { return scenario_to_json(scenario).dump(); }

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t scenario_fingerprint(const Scenario& scenario) { return fnv1a64(canonical_json(scenario)); }

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace satarq
