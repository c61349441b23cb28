#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "satarq/metrics.hpp"
#include "satarq/model.hpp"

namespace satarq {

struct SourceCounters {
  // Index n counts slots with AoI n; the last entry is the overflow bucket
  // for AoI >= histogram cap.
  std::vector<std::uint64_t> aoi_histogram;
  std::vector<std::uint64_t> paoi_histogram;
  // attempts_histogram[a] counts deliveries that needed a attempts.
  std::vector<std::uint64_t> attempts_histogram;
  std::uint64_t aoi_sum = 0;
  std::uint64_t paoi_sum = 0;
  std::uint64_t busy_slots = 0;
  std::uint64_t deliveries = 0;
  std::uint64_t drops = 0;
  std::uint64_t preemptions = 0;
  double power = 0.0;

  double energy() const { return power * static_cast<double>(busy_slots); }
};

struct SimCounters {
  std::uint64_t fingerprint = 0;
  std::uint64_t slots_counted = 0;
  std::vector<SourceCounters> sources;
};

/// 64-bit stream seed for one replication.
std::uint64_t replication_seed(std::uint64_t seed, int rep_index);

/// Uniform double in [0, 1) from the top 53 bits of one engine output.
inline double unit_draw(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// What happened on the channel during one slot.
struct SlotOutcome {
  int busy_owner = -1;  // source whose update was in service, or -1
  bool delivered = false;
  bool dropped = false;
  bool preempted = false;
  int attempts = 0;           // attempt index of the in-service update
  std::int64_t peak_aoi = 0;  // pre-reset AoI of the owner on delivery
};

/// Slot-level protocol state. Before step(), aoi(i) and tx_age(i) give the
/// age-process state of source i for the current slot.
class SlotSimulator {
 public:
  SlotSimulator(const Scenario& scenario, const DerivedParams& derived, std::uint64_t stream_seed);

  SlotOutcome step();

  std::int64_t slot() const { return slot_; }
  std::int64_t aoi(std::size_t i) const { return slot_ - last_delivered_gen_[i]; }
  int tx_age(std::size_t i) const { return owner_ == static_cast<int>(i) ? attempt_ : 0; }
  std::size_t num_sources() const { return q_.size(); }

 private:
  std::vector<double> q_;
  std::vector<double> gamma_;
  std::vector<int> max_tx_;
  std::vector<std::int64_t> last_delivered_gen_;
  std::vector<int> generated_;
  std::mt19937_64 rng_;
  std::int64_t slot_ = 0;
  int owner_ = -1;
  std::int64_t owner_gen_ = 0;
  int attempt_ = 0;
};

/// Resolved warmup and histogram cap for a scenario.
struct SimPlan {
  std::int64_t slots = 0;
  std::int64_t warmup = 0;
  std::int64_t histogram_cap = 0;
};

SimPlan plan_simulation(const Scenario& scenario, const DerivedParams& derived);

SimCounters run_replication(const Scenario& scenario, const DerivedParams& derived, int rep_index);

/// Runs all configured replications (concurrently) and merges them in
/// replication order.
SimCounters run_simulation(const Scenario& scenario, const DerivedParams& derived);

SimCounters merge(const std::vector<SimCounters>& counters);

/// Per-source metrics with PMFs, from either side of a comparison.
struct SourceReport {
  bool available = false;  // false for sources excluded or without deliveries
  std::string note;
  SourceMetrics metrics;
  Pmf aoi;
  Pmf paoi;
};

/// Histogram-normalized metrics. Sources with no deliveries are reported as
/// unavailable with a note.
std::vector<SourceReport> empirical_metrics(const SimCounters& counters);

/// Analytic metrics. Sources with q = 0 are reported as excluded; a source
/// with gamma = 0 and q > 0 throws Degenerate.
std::vector<SourceReport> analytic_metrics(const Scenario& scenario, const DerivedParams& derived,
                                           double eps = kDefaultSeriesEps);

struct Tolerances {
  double mean = 0.01;
  double tv = 0.005;
};

struct MetricCheck {
  std::string name;
  double analytic = 0.0;
  double empirical = 0.0;
  double error = 0.0;  // relative error for scalars, distance for PMFs
  double tolerance = 0.0;
  bool pass = false;
};

struct SourceValidation {
  bool compared = false;
  std::string note;
  std::vector<MetricCheck> checks;
};

struct ValidationReport {
  std::vector<SourceValidation> sources;
  bool pass = false;
};

ValidationReport compare(const std::vector<SourceReport>& analytic, const std::vector<SourceReport>& empirical,
                         const Tolerances& tol);

}  // namespace satarq
