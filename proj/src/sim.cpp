#include "satarq/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

#include "satarq/error.hpp"
#include "satarq/scenario_io.hpp"

namespace satarq {

namespace {

constexpr std::int64_t kMinWarmup = 10'000;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void check_config(const SimConfig& sim) {
  if (sim.slots < 1) throw InvalidConfig("sim.slots must be >= 1");
  if (sim.replications < 1) throw InvalidConfig("sim.replications must be >= 1");
  if (sim.warmup && (*sim.warmup < 0 || *sim.warmup >= sim.slots)) {
    throw InvalidConfig("sim.warmup must satisfy 0 <= warmup < slots");
  }
  if (sim.histogram_cap && *sim.histogram_cap < 3) throw InvalidConfig("sim.histogram_cap must be >= 3");
}

SourceParams params_of(const Scenario& scenario, const DerivedParams& derived, std::size_t i) {
  return {scenario.sources[i].max_tx, derived.overall_ugp, derived.sources[i].select_prob,
          derived.sources[i].success_prob};
}

Pmf histogram_pmf(const std::vector<std::uint64_t>& hist, std::uint64_t total) {
  Pmf out;
  const double denom = static_cast<double>(total);
  for (std::size_t n = Pmf::kFirstIndex; n + 1 < hist.size(); ++n) out.probs.push_back(hist[n] / denom);
  out.tail_mass = hist.back() / denom;
  return out;
}

void add_into(std::vector<std::uint64_t>& into, const std::vector<std::uint64_t>& from) {
  for (std::size_t k = 0; k < into.size(); ++k) into[k] += from[k];
}

}  // namespace

std::uint64_t replication_seed(std::uint64_t seed, int rep_index) {
  return splitmix64(splitmix64(seed) ^ static_cast<std::uint64_t>(rep_index));
}

SlotSimulator::SlotSimulator(const Scenario& scenario, const DerivedParams& derived, std::uint64_t stream_seed)
    : rng_(stream_seed) {
  const std::size_t n = scenario.sources.size();
  for (std::size_t i = 0; i < n; ++i) {
    q_.push_back(scenario.sources[i].q);
    gamma_.push_back(derived.sources[i].success_prob);
    max_tx_.push_back(scenario.sources[i].max_tx);
  }
  // AoI starts at its minimum, 2.
  last_delivered_gen_.assign(n, -2);
  generated_.resize(n);
}

SlotOutcome SlotSimulator::step() {
  SlotOutcome out;
  const std::int64_t t = slot_;

  if (owner_ >= 0) {
    out.busy_owner = owner_;
    out.attempts = attempt_;
    if (unit_draw(rng_) < gamma_[owner_]) {
      out.delivered = true;
      out.peak_aoi = t - last_delivered_gen_[owner_];
      last_delivered_gen_[owner_] = owner_gen_;
      owner_ = -1;
    } else if (attempt_ == max_tx_[owner_]) {
      out.dropped = true;
      owner_ = -1;
    }
  }

  // End of slot: fresh updates, one picked uniformly.
  int k = 0;
  for (std::size_t i = 0; i < q_.size(); ++i) {
    if (unit_draw(rng_) < q_[i]) generated_[k++] = static_cast<int>(i);
  }
  if (k > 0) {
    int pick = generated_[0];
    if (k > 1) pick = generated_[std::min(k - 1, static_cast<int>(unit_draw(rng_) * k))];
    if (owner_ >= 0) out.preempted = true;
    owner_ = pick;
    owner_gen_ = t;
    attempt_ = 1;
  } else if (owner_ >= 0) {
    ++attempt_;
  }
  ++slot_;
  return out;
}

SimPlan plan_simulation(const Scenario& scenario, const DerivedParams& derived) {
  check_config(scenario.sim);
  double worst_mean = 0.0;
  int longest = 1;
  for (std::size_t i = 0; i < scenario.sources.size(); ++i) {
    longest = std::max(longest, scenario.sources[i].max_tx);
    const auto src = params_of(scenario, derived, i);
    if (src.select_prob > 0.0 && src.gamma > 0.0) worst_mean = std::max(worst_mean, aoi_mean(src));
  }
  if (worst_mean == 0.0) worst_mean = 10.0;

  SimPlan plan;
  plan.slots = scenario.sim.slots;
  if (scenario.sim.warmup) {
    plan.warmup = *scenario.sim.warmup;
  } else {
    const auto wanted = std::max<std::int64_t>(kMinWarmup, static_cast<std::int64_t>(std::ceil(20.0 * worst_mean)));
    plan.warmup = std::min(wanted, plan.slots / 2);
  }
  if (scenario.sim.histogram_cap) {
    plan.histogram_cap = *scenario.sim.histogram_cap;
  } else {
    plan.histogram_cap = std::max<std::int64_t>(static_cast<std::int64_t>(std::ceil(10.0 * worst_mean)), longest + 2);
  }
  return plan;
}

SimCounters run_replication(const Scenario& scenario, const DerivedParams& derived, int rep_index) {
  const SimPlan plan = plan_simulation(scenario, derived);
  const std::size_t n = scenario.sources.size();
  const auto cap = static_cast<std::size_t>(plan.histogram_cap);

  SimCounters c;
  c.fingerprint = scenario_fingerprint(scenario);
  c.slots_counted = static_cast<std::uint64_t>(plan.slots - plan.warmup);
  c.sources.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& s = c.sources[i];
    s.aoi_histogram.assign(cap + 1, 0);
    s.paoi_histogram.assign(cap + 1, 0);
    s.attempts_histogram.assign(static_cast<std::size_t>(scenario.sources[i].max_tx) + 1, 0);
    s.power = derived.sources[i].power;
  }

  SlotSimulator sim(scenario, derived, replication_seed(scenario.sim.seed, rep_index));
  for (std::int64_t t = 0; t < plan.slots; ++t) {
    const bool counting = t >= plan.warmup;
    if (counting) {
      for (std::size_t i = 0; i < n; ++i) {
        const auto a = static_cast<std::uint64_t>(sim.aoi(i));
        ++c.sources[i].aoi_histogram[std::min<std::size_t>(a, cap)];
        c.sources[i].aoi_sum += a;
      }
    }
    const SlotOutcome o = sim.step();
    if (!counting || o.busy_owner < 0) continue;
    auto& s = c.sources[static_cast<std::size_t>(o.busy_owner)];
    ++s.busy_slots;
    if (o.delivered) {
      const auto peak = static_cast<std::uint64_t>(o.peak_aoi);
      ++s.deliveries;
      ++s.paoi_histogram[std::min<std::size_t>(peak, cap)];
      s.paoi_sum += peak;
      ++s.attempts_histogram[static_cast<std::size_t>(o.attempts)];
    }
    if (o.dropped) ++s.drops;
    if (o.preempted) ++s.preemptions;
  }
  return c;
}

SimCounters run_simulation(const Scenario& scenario, const DerivedParams& derived) {
  const int reps = scenario.sim.replications;
  check_config(scenario.sim);
  std::vector<SimCounters> results(static_cast<std::size_t>(reps));
  std::vector<std::exception_ptr> failures(static_cast<std::size_t>(reps));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int r = next++; r < reps; r = next++) {
      try {
        results[static_cast<std::size_t>(r)] = run_replication(scenario, derived, r);
      } catch (...) {
        failures[static_cast<std::size_t>(r)] = std::current_exception();
      }
    }
  };
  const int threads = std::clamp(static_cast<int>(std::thread::hardware_concurrency()), 1, reps);
  std::vector<std::thread> pool;
  for (int k = 1; k < threads; ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
  return merge(results);
}

SimCounters merge(const std::vector<SimCounters>& counters) {
  if (counters.empty()) throw Error("merge needs at least one set of counters");
  SimCounters out = counters.front();
  for (std::size_t k = 1; k < counters.size(); ++k) {
    const auto& c = counters[k];
    if (c.fingerprint != out.fingerprint) throw Mismatch("counters come from different scenarios");
    if (c.sources.size() != out.sources.size()) throw Mismatch("counters have different source counts");
    out.slots_counted += c.slots_counted;
    for (std::size_t i = 0; i < c.sources.size(); ++i) {
      auto& into = out.sources[i];
      const auto& from = c.sources[i];
      if (into.aoi_histogram.size() != from.aoi_histogram.size() ||
          into.attempts_histogram.size() != from.attempts_histogram.size() || into.power != from.power) {
        throw Mismatch("counters have different histogram layouts");
      }
      add_into(into.aoi_histogram, from.aoi_histogram);
      add_into(into.paoi_histogram, from.paoi_histogram);
      add_into(into.attempts_histogram, from.attempts_histogram);
      into.aoi_sum += from.aoi_sum;
      into.paoi_sum += from.paoi_sum;
      into.busy_slots += from.busy_slots;
      into.deliveries += from.deliveries;
      into.drops += from.drops;
      into.preemptions += from.preemptions;
    }
  }
  return out;
}

std::vector<SourceReport> empirical_metrics(const SimCounters& counters) {
  if (counters.slots_counted == 0) throw Error("no slots were tallied");
  const double slots = static_cast<double>(counters.slots_counted);
  std::vector<SourceReport> out;
  for (const auto& s : counters.sources) {
    SourceReport r;
    if (s.deliveries == 0) {
      r.note = "no deliveries";
      out.push_back(std::move(r));
      continue;
    }
    const double delivered = static_cast<double>(s.deliveries);
    r.available = true;
    r.aoi = histogram_pmf(s.aoi_histogram, counters.slots_counted);
    r.paoi = histogram_pmf(s.paoi_histogram, s.deliveries);
    auto& m = r.metrics;
    m.mean_aoi = static_cast<double>(s.aoi_sum) / slots;
    m.mean_paoi = static_cast<double>(s.paoi_sum) / delivered;
    m.duty_cycle = static_cast<double>(s.busy_slots) / slots;
    m.avg_power = s.energy() / slots;
    m.ee = delivered / s.energy();
    double used = 0.0;
    for (std::size_t a = 1; a < s.attempts_histogram.size(); ++a) {
      used += static_cast<double>(a) * static_cast<double>(s.attempts_histogram[a]);
    }
    m.mean_tx_time = used / delivered;
    m.mean_success_interval = slots / delivered;
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<SourceReport> analytic_metrics(const Scenario& scenario, const DerivedParams& derived, double eps) {
  std::vector<SourceReport> out;
  for (std::size_t i = 0; i < scenario.sources.size(); ++i) {
    SourceReport r;
    if (scenario.sources[i].q == 0.0) {
      r.note = "excluded: q = 0, AoI is infinite";
      out.push_back(std::move(r));
      continue;
    }
    const auto src = params_of(scenario, derived, i);
    r.available = true;
    r.metrics = source_metrics(src, derived.sources[i].power);
    r.aoi = aoi_pmf(src, eps);
    r.paoi = paoi_pmf(src, eps);
    out.push_back(std::move(r));
  }
  return out;
}

ValidationReport compare(const std::vector<SourceReport>& analytic, const std::vector<SourceReport>& empirical,
                         const Tolerances& tol) {
  if (analytic.size() != empirical.size()) throw Mismatch("reports cover different source counts");
  ValidationReport report;
  bool all = true, any = false;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const auto& a = analytic[i];
    const auto& e = empirical[i];
    SourceValidation v;
    if (!a.available || !e.available) {
      v.note = !a.available ? a.note : e.note;
      report.sources.push_back(std::move(v));
      continue;
    }
    v.compared = true;
    any = true;
    auto scalar = [&](const char* name, double av, double ev) {
      const double err = av != 0.0 ? std::abs(ev - av) / std::abs(av) : std::abs(ev - av);
      v.checks.push_back({name, av, ev, err, tol.mean, err <= tol.mean});
    };
    scalar("mean_aoi", a.metrics.mean_aoi, e.metrics.mean_aoi);
    scalar("mean_paoi", a.metrics.mean_paoi, e.metrics.mean_paoi);
    scalar("duty_cycle", a.metrics.duty_cycle, e.metrics.duty_cycle);
    scalar("avg_power", a.metrics.avg_power, e.metrics.avg_power);
    scalar("ee", a.metrics.ee, e.metrics.ee);
    scalar("mean_tx_time", a.metrics.mean_tx_time, e.metrics.mean_tx_time);
    scalar("mean_success_interval", a.metrics.mean_success_interval, e.metrics.mean_success_interval);
    const double tv_aoi = tv_distance(a.aoi, e.aoi);
    const double tv_paoi = tv_distance(a.paoi, e.paoi);
    v.checks.push_back({"tv_aoi", 0.0, 0.0, tv_aoi, tol.tv, tv_aoi <= tol.tv});
    v.checks.push_back({"tv_paoi", 0.0, 0.0, tv_paoi, tol.tv, tv_paoi <= tol.tv});
    for (const auto& c : v.checks) all = all && c.pass;
    report.sources.push_back(std::move(v));
  }
  report.pass = all && any;
  return report;
}

}  // namespace satarq
