#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "satarq/mdap.hpp"

namespace satarq {

/// Probability mass function on n = 2, 3, ... with an explicit horizon.
/// Mass beyond the horizon is `tail_mass`; when `tail_ratio` is known the
/// tail is treated as geometric with that ratio.
struct Pmf {
  static constexpr std::int64_t kFirstIndex = 2;

  std::vector<double> probs;  // probs[k] = Pr{n = k + 2}
  double tail_mass = 0.0;
  std::optional<double> tail_ratio;

  std::int64_t horizon() const { return kFirstIndex + static_cast<std::int64_t>(probs.size()) - 1; }
  double at(std::int64_t n) const;
  double total() const;
  /// Includes the tail: geometric closed form when the ratio is known,
  /// otherwise the tail mass is placed at horizon + 1 (a lower bound).
  double mean() const;
};

/// Total-variation distance. Values past the shorter horizon are pooled
/// together with both tails into one bucket.
double tv_distance(const Pmf& a, const Pmf& b);

Pmf aoi_pmf(const SourceParams& src, double eps = kDefaultSeriesEps);
/// Second route: phi_n = g_n + sum_{k < min(L, n-1)} hold^k y_{n-k}.
Pmf aoi_pmf_from_stationary(const StationarySeries& series);
double aoi_mean(const SourceParams& src);

/// psi_n = (phi_n - g_n) / duty_cycle.
Pmf paoi_pmf(const SourceParams& src, double eps = kDefaultSeriesEps);
/// Second route: coefficients of the PAoI transform, up to `horizon`.
Pmf paoi_pmf_from_transform(const SourceParams& src, std::int64_t horizon);
double paoi_mean(const SourceParams& src);

/// Unbounded retransmissions.
struct CarqMetrics {
  double aoi_mean;
  double paoi_mean;
  Pmf aoi;
  Pmf paoi;
};
CarqMetrics carq_metrics(double overall_ugp, double select_prob, double gamma, double eps = kDefaultSeriesEps);

/// Single attempt per update; AoI and PAoI share this distribution.
struct NarqMetrics {
  double mean;
  Pmf pmf;
};
NarqMetrics narq_metrics(double select_prob, double gamma, double eps = kDefaultSeriesEps);

double duty_cycle(const SourceParams& src);
double avg_power(const SourceParams& src, double power);

/// Attempts used by a delivered update, n = 1..L.
struct TxTimeStats {
  std::vector<double> pmf;  // pmf[k] = Pr{T = k + 1}
  double mean;
};
TxTimeStats tx_time_stats(int max_tx, double overall_ugp, double gamma);

double success_interval_mean(const SourceParams& src);
double ee_source(double gamma, double power);

struct SourceMetrics {
  double mean_aoi = 0.0;
  double mean_paoi = 0.0;
  double duty_cycle = 0.0;
  double avg_power = 0.0;
  double ee = 0.0;
  double mean_tx_time = 0.0;
  double mean_success_interval = 0.0;
};

SourceMetrics source_metrics(const SourceParams& src, double power);

/// Min-max bounds used to normalize the two weighted-sum terms.
struct NormalizationContext {
  double aoi_min = 0.0;
  double aoi_max = 1.0;
  double power_min = 0.0;
  double power_max = 1.0;
};

double normalize(double value, double lo, double hi);

struct SystemMetrics {
  double source_avg_aoi = 0.0;
  double total_power = 0.0;
  double weighted_sum = 0.0;
  double overall_ee = 0.0;
  double harmonic_timeliness = 0.0;
};

SystemMetrics system_metrics(std::span<const SourceMetrics> sources, double weight_aoi,
                             const NormalizationContext& norm);

}  // namespace satarq
