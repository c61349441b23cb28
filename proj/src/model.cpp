#include "satarq/model.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "satarq/error.hpp"

namespace satarq {

namespace {

std::string fmt_value(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string source_field(std::size_t i, const char* name) {
  return "sources[" + std::to_string(i) + "]." + name;
}

}  // namespace

InvalidScenario::InvalidScenario(std::vector<Violation> violations)
    : Error([&] {
        std::string msg = "invalid scenario:";
        for (const auto& v : violations) msg += " " + v.field + ": " + v.reason + ";";
        return msg;
      }()),
      violations_(std::move(violations)) {}

double overall_ugp(std::span<const double> q) {
  double none = 1.0;
  for (double qi : q) none *= 1.0 - qi;
  return 1.0 - none;
}

std::vector<double> selection_probabilities(std::span<const double> q) {
  const std::size_t n = q.size();
  std::vector<double> out(n, 0.0);
  std::vector<double> dist;
  dist.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    // dist[h] = Pr{exactly h of the other sources generate}
    dist.assign(1, 1.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      dist.push_back(0.0);
      for (std::size_t h = dist.size() - 1; h > 0; --h) {
        dist[h] = dist[h] * (1.0 - q[j]) + dist[h - 1] * q[j];
      }
      dist[0] *= 1.0 - q[j];
    }
    double share = 0.0;
    for (std::size_t h = 0; h < dist.size(); ++h) share += dist[h] / static_cast<double>(h + 1);
    out[i] = q[i] * share;
  }
  return out;
}

double resolve_gamma(const ChannelSpec& channel) {
  if (const auto* d = std::get_if<DirectChannel>(&channel)) return d->gamma;
  const auto& r = std::get<RayleighChannel>(channel);
  return std::exp(-std::expm1(r.rate) / r.power);
}

double transmit_power(const ChannelSpec& channel) {
  if (const auto* d = std::get_if<DirectChannel>(&channel)) return d->power;
  return std::get<RayleighChannel>(channel).power;
}

void validate(const Scenario& scenario) {
  std::vector<Violation> errs;
  if (scenario.sources.empty()) {
    errs.push_back({"sources", "at least one source is required"});
  }
  bool any_generating = false;
  for (std::size_t i = 0; i < scenario.sources.size(); ++i) {
    const auto& s = scenario.sources[i];
    if (!(s.q >= 0.0 && s.q <= 1.0)) {
      errs.push_back({source_field(i, "q"), "must be in [0, 1], got " + fmt_value(s.q)});
    }
    if (s.q > 0.0) any_generating = true;
    if (s.max_tx < 1) {
      errs.push_back({source_field(i, "L"), "must be an integer >= 1, got " + std::to_string(s.max_tx)});
    }
    if (const auto* d = std::get_if<DirectChannel>(&s.channel)) {
      if (!(d->gamma >= 0.0 && d->gamma <= 1.0)) {
        errs.push_back({source_field(i, "channel.direct.gamma"),
                        "must be in [0, 1], got " + fmt_value(d->gamma)});
      }
      if (!(d->power > 0.0) || !std::isfinite(d->power)) {
        errs.push_back({source_field(i, "channel.direct.P"), "must be finite and > 0, got " + fmt_value(d->power)});
      }
    } else {
      const auto& r = std::get<RayleighChannel>(s.channel);
      if (!(r.power > 0.0) || !std::isfinite(r.power)) {
        errs.push_back({source_field(i, "channel.rayleigh.P"), "must be finite and > 0, got " + fmt_value(r.power)});
      }
      if (!(r.rate > 0.0) || !std::isfinite(r.rate)) {
        errs.push_back({source_field(i, "channel.rayleigh.R"), "must be finite and > 0, got " + fmt_value(r.rate)});
      }
    }
  }
  if (!scenario.sources.empty() && !any_generating) {
    errs.push_back({"sources", "at least one source must have q > 0"});
  }

  const auto& sim = scenario.sim;
  if (sim.slots < 1) errs.push_back({"sim.slots", "must be >= 1"});
  if (sim.warmup && (*sim.warmup < 0 || *sim.warmup >= sim.slots)) {
    errs.push_back({"sim.warmup", "must satisfy 0 <= warmup < slots"});
  }
  if (sim.replications < 1) errs.push_back({"sim.replications", "must be >= 1"});
  if (sim.histogram_cap && *sim.histogram_cap < 3) {
    errs.push_back({"sim.histogram_cap", "must be >= 3"});
  }
  if (scenario.objective) {
    double w = scenario.objective->weight_aoi;
    if (!(w >= 0.0 && w <= 1.0)) {
      errs.push_back({"objective.weight_aoi", "must be in [0, 1], got " + fmt_value(w)});
    }
  }
  if (!errs.empty()) throw InvalidScenario(std::move(errs));
}

DerivedParams derive(const Scenario& scenario) {
  validate(scenario);
  std::vector<double> q;
  q.reserve(scenario.sources.size());
  for (const auto& s : scenario.sources) q.push_back(s.q);

  DerivedParams d;
  d.overall_ugp = overall_ugp(q);
  const auto sel = selection_probabilities(q);
  d.sources.reserve(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    const auto& spec = scenario.sources[i];
    SourceDerived sd;
    sd.select_prob = sel[i];
    sd.success_prob = resolve_gamma(spec.channel);
    sd.hold_prob = (1.0 - sd.success_prob) * (1.0 - d.overall_ugp);
    sd.power = transmit_power(spec.channel);
    if (const auto* r = std::get_if<RayleighChannel>(&spec.channel)) {
      sd.outage_constant = std::expm1(r->rate);
    }
    d.sources.push_back(sd);
  }
  return d;
}

PowerCertificate power_monotonicity_certificate(int max_tx, double overall_ugp, double gamma) {
  using std::numbers::e;
  if (max_tx <= 3) return {MonotonicityCondition::kShortMtt};
  if (overall_ugp >= 1.0 / (e * e + 1.0)) return {MonotonicityCondition::kUgpThreshold};
  // Either lambda <= 1/2 or k/P <= 1 suffices, hence the min.
  double threshold = std::min(1.0 - 1.0 / (2.0 * (1.0 - overall_ugp)), 1.0 / e);
  if (gamma >= threshold) return {MonotonicityCondition::kGammaThreshold};
  return {};
}

std::string to_string(MonotonicityCondition c) {
  switch (c) {
    case MonotonicityCondition::kShortMtt:
      return "L<=3";
    case MonotonicityCondition::kUgpThreshold:
      return "p-threshold";
    case MonotonicityCondition::kGammaThreshold:
      return "gamma-threshold";
  }
  return "unknown";
}

}  // namespace satarq
