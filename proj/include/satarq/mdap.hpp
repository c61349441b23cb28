#pragma once

#include <cstdint>
#include <vector>

#include "satarq/series.hpp"

namespace satarq {

/// Everything the per-source age process depends on: the source's attempt
/// cap, the overall and per-source selection probabilities, and the source's
/// per-attempt success probability.
struct SourceParams {
  int max_tx = 1;
  double overall_ugp = 0.0;
  double select_prob = 0.0;
  double gamma = 1.0;

  /// Failed attempt and no fresh update anywhere: the update is retried.
  double hold_prob() const { return (1.0 - gamma) * (1.0 - overall_ugp); }
};

/// (AoI, elapsed transmission time of the source's in-service update).
/// tx_age == 0 means no update of the source is in service.
struct MdapState {
  std::int64_t aoi = 2;
  int tx_age = 0;

  friend bool operator==(const MdapState&, const MdapState&) = default;
  friend auto operator<=>(const MdapState&, const MdapState&) = default;
};

struct Transition {
  MdapState next;
  double prob;
};

/// Successors of `state` with their one-slot probabilities. Zero-probability
/// successors are omitted.
std::vector<Transition> transition(const MdapState& state, const SourceParams& src);

/// Stationary distribution of the age process in the compact form
/// pi(n, m) = hold^(m-1) * y[n - m + 1] for m >= 1, pi(n, 0) = g[n].
/// Vectors are indexed from n = 2.
struct StationarySeries {
  SourceParams params;
  std::vector<double> y;
  std::vector<double> g;
  std::int64_t horizon = 1;     // last materialized n
  double tail_mass_bound = 0.0;  // probability mass at n > horizon
  double tail_ratio = 0.0;       // geometric decay of the per-n mass

  double y_at(std::int64_t n) const;
  double g_at(std::int64_t n) const;
};

inline constexpr double kDefaultSeriesEps = 1e-10;

/// Expands the generating functions of y and g until the geometric tail
/// estimate of the remaining mass drops below eps. Throws Degenerate when
/// gamma == 0 or select_prob == 0.
StationarySeries stationary_series(const SourceParams& src, double eps = kDefaultSeriesEps);

/// Raw stationary vector of the explicit kernel on states with n <= n_max.
/// Row n_max holds all mass with n >= n_max.
struct OracleDistribution {
  int max_tx = 1;
  std::int64_t n_max = 0;
  std::vector<double> probs;  // row-major over n, m in [0, min(L, n-1)]
  double residual = 0.0;
  int iterations = 0;

  double at(std::int64_t n, int m) const;
};

OracleDistribution oracle_distribution(const SourceParams& src, std::int64_t n_max, double residual_target = 1e-12,
                                       int max_iterations = 2'000'000);

/// Stationary vector of the explicit kernel on {n <= n_max}. Successors with
/// n > n_max are folded into row n_max, so entries below n_max are exact and
/// row n_max carries the whole tail; that mass is reported as
/// tail_mass_bound with horizon = n_max - 1.
StationarySeries stationary_oracle(const SourceParams& src, std::int64_t n_max,
                                   double residual_target = 1e-12, int max_iterations = 2'000'000);

/// pi(n, m) from the compact form.
double pi(const StationarySeries& series, std::int64_t n, int m);

void check_params(const SourceParams& src);

// Polynomials in w = 1/z shared with the metrics module. All transforms are
// numerator / renewal_denominator.
Poly renewal_denominator(const SourceParams& src);
Poly aoi_numerator(const SourceParams& src);
Poly paoi_numerator(const SourceParams& src);
Poly idle_numerator(const SourceParams& src);      // g_n
Poly in_service_numerator(const SourceParams& src);  // y_n

}  // namespace satarq
