#include "satarq/mdap.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "satarq/error.hpp"

namespace satarq {

namespace {

constexpr std::size_t kMaxHorizon = 20'000'000;

bool valid_state(const MdapState& s, int max_tx) {
  return s.aoi >= 2 && s.tx_age >= 0 && s.tx_age <= max_tx && s.aoi > s.tx_age;
}

// S(w) = sum_{k < L} (hold w)^k
Poly retry_window(const SourceParams& src) {
  Poly s(static_cast<std::size_t>(src.max_tx));
  const double hold = src.hold_prob();
  double term = 1.0;
  for (auto& c : s) {
    c = term;
    term *= hold;
  }
  return s;
}

Poly shift2_scaled(std::span<const double> p, double scale) {
  Poly out(p.size() + 2, 0.0);
  for (std::size_t k = 0; k < p.size(); ++k) out[k + 2] = scale * p[k];
  return out;
}

std::vector<double> from_index_two(const std::vector<double>& coeffs) {
  std::vector<double> out;
  out.reserve(coeffs.size() > 2 ? coeffs.size() - 2 : 0);
  for (std::size_t k = 2; k < coeffs.size(); ++k) out.push_back(clamp_roundoff(coeffs[k]));
  return out;
}

}  // namespace

void check_params(const SourceParams& src) {
  constexpr double slack = 1e-12;
  std::string why;
  if (src.max_tx < 1) why = "max transmission time must be >= 1";
  else if (!(src.overall_ugp >= 0.0 && src.overall_ugp <= 1.0)) why = "overall UGP must be in [0, 1]";
  else if (!(src.select_prob >= 0.0 && src.select_prob <= src.overall_ugp + slack)) why = "selection probability must be in [0, p]";
  else if (!(src.gamma >= 0.0 && src.gamma <= 1.0)) why = "success probability must be in [0, 1]";
  if (!why.empty()) throw Error("invalid source parameters: " + why);
}

std::vector<Transition> transition(const MdapState& state, const SourceParams& src) {
  check_params(src);
  if (!valid_state(state, src.max_tx)) {
    throw InvalidState("state (" + std::to_string(state.aoi) + ", " + std::to_string(state.tx_age) +
                       ") is not valid for L = " + std::to_string(src.max_tx));
  }
  const double pi_sel = src.select_prob;
  const double gam = src.gamma;
  const std::int64_t n1 = state.aoi + 1;
  const int m = state.tx_age;
  std::vector<Transition> out;
  auto add = [&](MdapState s, double prob) {
    if (prob > 0.0) out.push_back({s, prob});
  };
  if (m == 0) {
    add({n1, 1}, pi_sel);
    add({n1, 0}, 1.0 - pi_sel);
    return out;
  }
  // Success: the AoI resets to the delivered update's age.
  const std::int64_t reset = m + 1;
  add({reset, 1}, gam * pi_sel);
  add({reset, 0}, gam * (1.0 - pi_sel));
  add({n1, 1}, (1.0 - gam) * pi_sel);
  if (m < src.max_tx) {
    add({n1, 0}, (1.0 - gam) * (src.overall_ugp - pi_sel));
    add({n1, m + 1}, src.hold_prob());
  } else {
    add({n1, 0}, (1.0 - gam) * (1.0 - pi_sel));  // truncated
  }
  return out;
}

Poly renewal_denominator(const SourceParams& src) {
  const double rate = src.gamma * src.select_prob;
  const Poly s = retry_window(src);
  Poly q(s.size() + 1, 0.0);
  q[0] = 1.0;
  q[1] = -1.0;
  for (std::size_t k = 0; k < s.size(); ++k) q[k + 1] += rate * s[k];
  return q;
}

Poly aoi_numerator(const SourceParams& src) {
  return shift2_scaled(retry_window(src), src.gamma * src.select_prob);
}

Poly in_service_numerator(const SourceParams& src) {
  return shift2_scaled(retry_window(src), src.gamma * src.select_prob * src.select_prob);
}

Poly idle_numerator(const SourceParams& src) {
  const Poly s = retry_window(src);
  Poly not_selected(s.size());
  for (std::size_t k = 0; k < s.size(); ++k) not_selected[k] = -src.select_prob * s[k];
  not_selected[0] += 1.0;
  return shift2_scaled(poly_mul(s, not_selected), src.gamma * src.select_prob);
}

Poly paoi_numerator(const SourceParams& src) {
  const double hold = src.hold_prob();
  const double norm = (1.0 - hold) / (1.0 - std::pow(hold, src.max_tx));
  const Poly s = retry_window(src);
  return shift2_scaled(poly_mul(s, s), src.gamma * src.select_prob * norm);
}

double StationarySeries::y_at(std::int64_t n) const {
  if (n < 2) return 0.0;
  if (n > horizon) throw BeyondHorizon("n = " + std::to_string(n) + " exceeds horizon " + std::to_string(horizon));
  return y[static_cast<std::size_t>(n - 2)];
}

double StationarySeries::g_at(std::int64_t n) const {
  if (n < 2) return 0.0;
  if (n > horizon) throw BeyondHorizon("n = " + std::to_string(n) + " exceeds horizon " + std::to_string(horizon));
  return g[static_cast<std::size_t>(n - 2)];
}

StationarySeries stationary_series(const SourceParams& src, double eps) {
  check_params(src);
  if (src.gamma <= 0.0 || src.select_prob <= 0.0) {
    throw Degenerate("stationary series needs gamma > 0 and p_i > 0 (AoI never renews otherwise)");
  }
  if (!(eps > 0.0)) throw Error("eps must be > 0");

  const Poly den = renewal_denominator(src);
  // Per-n mass of the chain (the AoI marginal) decides the horizon.
  const auto mass = expand_with_tail(aoi_numerator(src), den, eps, 2, kMaxHorizon);
  const std::size_t last = mass.coeffs.size() - 1;
  const TailEstimate& tail = mass.tail;

  StationarySeries out;
  out.params = src;
  out.horizon = static_cast<std::int64_t>(last);
  out.tail_mass_bound = tail.mass;
  out.tail_ratio = tail.ratio;
  out.y = from_index_two(RationalSeries::expand(in_service_numerator(src), den, last));
  out.g = from_index_two(RationalSeries::expand(idle_numerator(src), den, last));
  return out;
}

namespace {

std::size_t oracle_row_start(std::int64_t n, int max_tx) {
  // Rows 2..n-1 hold min(L, k-1) + 1 states each.
  std::size_t count = 0;
  const std::int64_t full_from = std::min<std::int64_t>(n, max_tx + 1);
  for (std::int64_t k = 2; k < full_from; ++k) count += static_cast<std::size_t>(k);
  if (n > max_tx + 1) count += static_cast<std::size_t>(n - std::max<std::int64_t>(2, max_tx + 1)) * (max_tx + 1);
  return count;
}

}  // namespace

double OracleDistribution::at(std::int64_t n, int m) const {
  if (!valid_state({n, m}, max_tx) || n > n_max) return 0.0;
  return probs[oracle_row_start(n, max_tx) + static_cast<std::size_t>(m)];
}

OracleDistribution oracle_distribution(const SourceParams& src, std::int64_t n_max, double residual_target,
                                       int max_iterations) {
  check_params(src);
  const int cap_m = src.max_tx;
  if (n_max < cap_m + 10) throw Error("oracle needs n_max >= L + 10");

  const std::size_t count = oracle_row_start(n_max + 1, cap_m);
  auto index_of = [&](MdapState s) { return oracle_row_start(s.aoi, cap_m) + static_cast<std::size_t>(s.tx_age); };

  struct Edge {
    std::size_t from, to;
    double prob;
  };
  std::vector<Edge> edges;
  edges.reserve(count * 5);
  for (std::int64_t n = 2; n <= n_max; ++n) {
    const int top = static_cast<int>(std::min<std::int64_t>(cap_m, n - 1));
    for (int m = 0; m <= top; ++m) {
      const MdapState from{n, m};
      for (const auto& t : transition(from, src)) {
        MdapState to = t.next;
        to.aoi = std::min(to.aoi, n_max);
        edges.push_back({index_of(from), index_of(to), t.prob});
      }
    }
  }

  OracleDistribution out;
  out.max_tx = cap_m;
  out.n_max = n_max;
  std::vector<double> cur(count, 1.0 / static_cast<double>(count));
  std::vector<double> nxt(count);
  double residual = 1.0;
  int it = 0;
  while (it < max_iterations) {
    ++it;
    std::fill(nxt.begin(), nxt.end(), 0.0);
    for (const auto& e : edges) nxt[e.to] += cur[e.from] * e.prob;
    double total = 0.0;
    for (double v : nxt) total += v;
    residual = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
      nxt[i] /= total;
      residual += std::abs(nxt[i] - cur[i]);
    }
    cur.swap(nxt);
    if (residual < residual_target) break;
  }
  if (!(residual < residual_target)) {
    throw NoConvergence("oracle power iteration stalled at residual " + std::to_string(residual) + " after " +
                        std::to_string(it) + " iterations");
  }
  out.probs = std::move(cur);
  out.residual = residual;
  out.iterations = it;
  return out;
}

StationarySeries stationary_oracle(const SourceParams& src, std::int64_t n_max, double residual_target,
                                   int max_iterations) {
  const auto dist = oracle_distribution(src, n_max, residual_target, max_iterations);
  StationarySeries out;
  out.params = src;
  out.horizon = n_max - 1;
  for (std::int64_t n = 2; n < n_max; ++n) {
    out.g.push_back(dist.at(n, 0));
    out.y.push_back(dist.at(n, 1));
  }
  double capped = 0.0;
  for (int m = 0; m <= src.max_tx; ++m) capped += dist.at(n_max, m);
  out.tail_mass_bound = capped;
  return out;
}

double pi(const StationarySeries& series, std::int64_t n, int m) {
  if (!valid_state({n, m}, series.params.max_tx)) {
    throw InvalidState("state (" + std::to_string(n) + ", " + std::to_string(m) + ") is not valid for L = " +
                       std::to_string(series.params.max_tx));
  }
  if (n > series.horizon) {
    throw BeyondHorizon("n = " + std::to_string(n) + " exceeds horizon " + std::to_string(series.horizon));
  }
  if (m == 0) return series.g_at(n);
  return std::pow(series.params.hold_prob(), m - 1) * series.y_at(n - m + 1);
}

}  // namespace satarq
