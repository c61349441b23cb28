#include "satarq/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "satarq/error.hpp"

namespace satarq {

namespace {

void require_renewal(double gamma, double select_prob) {
  if (!(gamma > 0.0) || !(select_prob > 0.0)) {
    throw Degenerate("AoI is infinite: need gamma > 0 and p_i > 0 (gamma = " + std::to_string(gamma) +
                     ", p_i = " + std::to_string(select_prob) + ")");
  }
}

void require_renewal(const SourceParams& src) {
  check_params(src);
  require_renewal(src.gamma, src.select_prob);
}

double hold_of(double overall_ugp, double gamma) { return (1.0 - gamma) * (1.0 - overall_ugp); }

Pmf to_pmf(const TailedExpansion& e) {
  Pmf out;
  for (std::size_t k = 2; k < e.coeffs.size(); ++k) out.probs.push_back(clamp_roundoff(e.coeffs[k]));
  out.tail_mass = e.tail.mass;
  out.tail_ratio = e.tail.ratio;
  return out;
}

Pmf expand_pmf(Poly num, Poly den, double eps) { return to_pmf(expand_with_tail(std::move(num), std::move(den), eps, 2)); }

void fill_tail(Pmf& pmf) {
  const auto t = estimate_tail(pmf.probs, 1);
  if (t.settled) {
    pmf.tail_mass = t.mass;
    pmf.tail_ratio = t.ratio;
  }
}

}  // namespace

double Pmf::at(std::int64_t n) const {
  if (n < kFirstIndex || n > horizon()) return 0.0;
  return probs[static_cast<std::size_t>(n - kFirstIndex)];
}

double Pmf::total() const {
  double s = tail_mass;
  for (double p : probs) s += p;
  return s;
}

double Pmf::mean() const {
  double s = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) s += static_cast<double>(k + kFirstIndex) * probs[k];
  const double h = static_cast<double>(horizon());
  if (tail_mass > 0.0) {
    if (tail_ratio && *tail_ratio > 0.0 && *tail_ratio < 1.0) {
      s += tail_mass * (h + 1.0 / (1.0 - *tail_ratio));
    } else {
      s += tail_mass * (h + 1.0);
    }
  }
  return s;
}

double tv_distance(const Pmf& a, const Pmf& b) {
  const std::int64_t common = std::min(a.horizon(), b.horizon());
  double diff = 0.0, rest_a = a.tail_mass, rest_b = b.tail_mass;
  for (std::int64_t n = Pmf::kFirstIndex; n <= std::max(a.horizon(), b.horizon()); ++n) {
    if (n <= common) {
      diff += std::abs(a.at(n) - b.at(n));
    } else {
      rest_a += a.at(n);
      rest_b += b.at(n);
    }
  }
  return 0.5 * (diff + std::abs(rest_a - rest_b));
}

Pmf aoi_pmf(const SourceParams& src, double eps) {
  require_renewal(src);
  return expand_pmf(aoi_numerator(src), renewal_denominator(src), eps);
}

Pmf aoi_pmf_from_stationary(const StationarySeries& series) {
  const double hold = series.params.hold_prob();
  const int cap = series.params.max_tx;
  Pmf out;
  out.probs.reserve(series.y.size());
  for (std::int64_t n = 2; n <= series.horizon; ++n) {
    double v = series.g_at(n);
    const std::int64_t terms = std::min<std::int64_t>(cap, n - 1);
    double w = 1.0;
    for (std::int64_t k = 0; k < terms; ++k) {
      v += w * series.y_at(n - k);
      w *= hold;
    }
    out.probs.push_back(v);
  }
  out.tail_mass = series.tail_mass_bound;
  if (series.tail_ratio > 0.0) out.tail_ratio = series.tail_ratio;
  return out;
}

double aoi_mean(const SourceParams& src) {
  require_renewal(src);
  const double hold = src.hold_prob();
  return (1.0 - hold) / (src.gamma * src.select_prob * (1.0 - std::pow(hold, src.max_tx))) + 1.0;
}

Pmf paoi_pmf(const SourceParams& src, double eps) {
  require_renewal(src);
  const StationarySeries series = stationary_series(src, eps);
  const Pmf aoi = aoi_pmf_from_stationary(series);
  const double busy = duty_cycle(src);
  Pmf out;
  out.probs.reserve(aoi.probs.size());
  for (std::int64_t n = 2; n <= series.horizon; ++n) {
    out.probs.push_back(clamp_roundoff((aoi.at(n) - series.g_at(n)) / busy));
  }
  fill_tail(out);
  return out;
}

Pmf paoi_pmf_from_transform(const SourceParams& src, std::int64_t horizon) {
  require_renewal(src);
  const auto coeffs =
      RationalSeries::expand(paoi_numerator(src), renewal_denominator(src), static_cast<std::size_t>(std::max<std::int64_t>(horizon, 2)));
  Pmf out;
  for (std::size_t k = 2; k < coeffs.size(); ++k) out.probs.push_back(clamp_roundoff(coeffs[k]));
  fill_tail(out);
  return out;
}

double paoi_mean(const SourceParams& src) {
  require_renewal(src);
  const double hold = src.hold_prob();
  const double hold_l = std::pow(hold, src.max_tx);
  return (1.0 - hold) / (src.gamma * src.select_prob * (1.0 - hold_l)) + 1.0 / (1.0 - hold) -
         src.max_tx * hold_l / (1.0 - hold_l);
}

CarqMetrics carq_metrics(double overall_ugp, double select_prob, double gamma, double eps) {
  require_renewal(gamma, select_prob);
  const double hold = hold_of(overall_ugp, gamma);
  const double rate = gamma * select_prob;
  // (1 - w)(1 - hold w) + rate w
  const Poly den{1.0, rate - 1.0 - hold, hold};
  CarqMetrics out;
  out.aoi_mean = (1.0 - hold) / rate + 1.0;
  out.paoi_mean = (1.0 - hold) / rate + 1.0 / (1.0 - hold);
  out.aoi = expand_pmf({0.0, 0.0, rate}, den, eps);
  out.paoi = expand_pmf({0.0, 0.0, rate * (1.0 - hold)}, poly_mul(Poly{1.0, -hold}, den), eps);
  return out;
}

NarqMetrics narq_metrics(double select_prob, double gamma, double eps) {
  require_renewal(gamma, select_prob);
  const double rate = gamma * select_prob;
  NarqMetrics out;
  out.mean = 1.0 / rate + 1.0;
  double term = rate;
  double remaining = 1.0;
  while (true) {
    out.pmf.probs.push_back(term);
    remaining -= term;
    if (remaining < eps || term == 0.0) break;
    term *= 1.0 - rate;
  }
  out.pmf.tail_mass = std::max(0.0, remaining);
  if (rate < 1.0) out.pmf.tail_ratio = 1.0 - rate;
  return out;
}

double duty_cycle(const SourceParams& src) {
  check_params(src);
  const double hold = src.hold_prob();
  if (!(hold < 1.0)) throw Degenerate("duty cycle undefined: update is held forever (gamma = 0 and p = 0)");
  return src.select_prob * (1.0 - std::pow(hold, src.max_tx)) / (1.0 - hold);
}

double avg_power(const SourceParams& src, double power) {
  if (!(power >= 0.0)) throw Error("power must be >= 0");
  return power * duty_cycle(src);
}

TxTimeStats tx_time_stats(int max_tx, double overall_ugp, double gamma) {
  if (max_tx < 1) throw Error("max transmission time must be >= 1");
  const double hold = hold_of(overall_ugp, gamma);
  if (!(hold < 1.0)) throw Degenerate("transmission time undefined: no attempt can succeed");
  const double hold_l = std::pow(hold, max_tx);
  TxTimeStats out;
  out.pmf.reserve(static_cast<std::size_t>(max_tx));
  double w = 1.0;
  for (int n = 1; n <= max_tx; ++n) {
    out.pmf.push_back(w * (1.0 - hold) / (1.0 - hold_l));
    w *= hold;
  }
  out.mean = 1.0 / (1.0 - hold) - max_tx * hold_l / (1.0 - hold_l);
  return out;
}

double success_interval_mean(const SourceParams& src) {
  require_renewal(src);
  const double hold = src.hold_prob();
  return (1.0 - hold) / (src.gamma * src.select_prob * (1.0 - std::pow(hold, src.max_tx)));
}

double ee_source(double gamma, double power) {
  if (!(power > 0.0)) throw Degenerate("energy efficiency undefined at zero transmit power");
  return gamma / power;
}

SourceMetrics source_metrics(const SourceParams& src, double power) {
  SourceMetrics m;
  m.mean_success_interval = success_interval_mean(src);
  m.mean_aoi = aoi_mean(src);
  m.mean_paoi = paoi_mean(src);
  m.duty_cycle = duty_cycle(src);
  m.avg_power = power * m.duty_cycle;
  m.ee = ee_source(src.gamma, power);
  m.mean_tx_time = tx_time_stats(src.max_tx, src.overall_ugp, src.gamma).mean;
  return m;
}

double normalize(double value, double lo, double hi) {
  if (!(hi > lo)) return 0.0;
  return (value - lo) / (hi - lo);
}

SystemMetrics system_metrics(std::span<const SourceMetrics> sources, double weight_aoi,
                             const NormalizationContext& norm) {
  if (sources.empty()) throw Error("system metrics need at least one source");
  double aoi_sum = 0.0, power_sum = 0.0, delivery_rate = 0.0, inv_timeliness = 0.0;
  for (const auto& s : sources) {
    if (!std::isfinite(s.mean_aoi)) throw Degenerate("a source with infinite mean AoI must be excluded first");
    aoi_sum += s.mean_aoi;
    power_sum += s.avg_power;
    // gamma_i rho_i = (gamma_i / P_i) (P_i rho_i)
    delivery_rate += s.ee * s.avg_power;
    inv_timeliness += 1.0 / (s.mean_aoi - 1.0);
  }
  const double n = static_cast<double>(sources.size());
  SystemMetrics out;
  out.source_avg_aoi = aoi_sum / n;
  out.total_power = power_sum;
  out.overall_ee = power_sum > 0.0 ? delivery_rate / power_sum : std::numeric_limits<double>::infinity();
  out.harmonic_timeliness = n / inv_timeliness;
  out.weighted_sum = weight_aoi * normalize(out.source_avg_aoi, norm.aoi_min, norm.aoi_max) +
                     (1.0 - weight_aoi) * normalize(out.total_power, norm.power_min, norm.power_max);
  return out;
}

}  // namespace satarq
