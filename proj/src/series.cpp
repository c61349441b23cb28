#include "satarq/series.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "satarq/error.hpp"

namespace satarq {

Poly poly_mul(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) return {};
  Poly out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

RationalSeries::RationalSeries(Poly numerator, Poly denominator)
    : num_(std::move(numerator)), den_(std::move(denominator)) {
  if (den_.empty() || den_[0] == 0.0) throw Error("rational series: denominator must have a non-zero constant term");
  if (num_.empty()) num_.push_back(0.0);
}

double RationalSeries::next() {
  const std::size_t k = out_.size();
  double acc = k < num_.size() ? num_[k] : 0.0;
  const std::size_t top = std::min(k, den_.size() - 1);
  for (std::size_t j = 1; j <= top; ++j) acc -= den_[j] * out_[k - j];
  acc /= den_[0];
  out_.push_back(acc);
  return acc;
}

std::vector<double> RationalSeries::expand(Poly numerator, Poly denominator, std::size_t last) {
  RationalSeries s(std::move(numerator), std::move(denominator));
  std::vector<double> out;
  out.reserve(last + 1);
  for (std::size_t k = 0; k <= last; ++k) out.push_back(s.next());
  return out;
}

TailEstimate estimate_tail(std::span<const double> seq, std::size_t order) {
  TailEstimate t;
  const std::size_t n = seq.size();
  const std::size_t zeros_needed = std::max<std::size_t>(order, 1);
  if (n >= zeros_needed) {
    bool all_zero = true;
    for (std::size_t i = n - zeros_needed; i < n; ++i) {
      if (seq[i] != 0.0) {
        all_zero = false;
        break;
      }
    }
    if (all_zero) {
      t.settled = true;
      return t;
    }
  }
  if (n < 3) return t;
  const double a = seq[n - 3], b = seq[n - 2], c = seq[n - 1];
  if (!(a > 0.0 && b > 0.0 && c >= 0.0)) return t;
  const double r0 = b / a;
  const double r1 = c / b;
  if (!(r0 < 1.0 && r1 < 1.0)) return t;
  if (std::abs(r1 - r0) > 1e-3 * (1.0 - r1)) return t;
  t.settled = true;
  t.ratio = std::max(r0, r1);
  t.mass = c * t.ratio / (1.0 - t.ratio);
  return t;
}

TailedExpansion expand_with_tail(Poly numerator, Poly denominator, double eps, std::size_t skip,
                                 std::size_t max_terms) {
  if (!(eps > 0.0)) throw Error("eps must be > 0");
  RationalSeries s(std::move(numerator), std::move(denominator));
  TailedExpansion out;
  // Past this index the recurrence is homogeneous.
  const std::size_t warm = std::max(s.numerator_degree() + s.order() + 2, skip + 3);
  for (;;) {
    out.coeffs.push_back(s.next());
    const std::size_t k = out.coeffs.size() - 1;
    if (k >= warm) {
      out.tail = estimate_tail(std::span<const double>(out.coeffs).subspan(skip), s.order());
      if (out.tail.settled && out.tail.mass < eps) return out;
    }
    if (k >= max_terms) {
      throw NoConvergence("series tail did not fall below " + std::to_string(eps) + " within " +
                          std::to_string(max_terms) + " terms");
    }
  }
}

double clamp_roundoff(double v) {
  if (v >= 0.0) return v;
  if (v > -1e-15) return 0.0;
  throw Error("series coefficient " + std::to_string(v) + " is negative beyond round-off");
}

}  // namespace satarq
