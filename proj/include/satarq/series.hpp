#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace satarq {

using Poly = std::vector<double>;

Poly poly_mul(std::span<const double> a, std::span<const double> b);

/// Streams the power-series coefficients of numerator(w) / denominator(w)
/// by long division. Requires denominator[0] != 0. Each coefficient costs
/// O(deg denominator).
class RationalSeries {
 public:
  RationalSeries(Poly numerator, Poly denominator);

  double next();
  std::size_t index() const { return out_.size(); }
  std::size_t order() const { return den_.size() - 1; }
  std::size_t numerator_degree() const { return num_.size() - 1; }

  /// Expands coefficients 0..last inclusive.
  static std::vector<double> expand(Poly numerator, Poly denominator, std::size_t last);

 private:
  Poly num_;
  Poly den_;
  std::vector<double> out_;
};

struct TailEstimate {
  bool settled = false;
  double ratio = 0.0;
  double mass = 0.0;  // estimated sum of all terms after the last one given
};

/// Geometric tail of a non-negative sequence produced by a linear recurrence
/// of the given order. Settled once the ratio of consecutive terms is below
/// one and has stopped moving, or once `order` trailing terms are exactly 0
/// (the recurrence then stays at 0).
TailEstimate estimate_tail(std::span<const double> seq, std::size_t order);

struct TailedExpansion {
  std::vector<double> coeffs;  // coefficients of w^0 .. w^horizon
  TailEstimate tail;
};

/// Expands numerator / denominator until the geometric tail of the
/// coefficients from index `skip` on is below eps. Throws NoConvergence past
/// `max_terms`.
TailedExpansion expand_with_tail(Poly numerator, Poly denominator, double eps, std::size_t skip,
                                 std::size_t max_terms = 20'000'000);

/// Replaces round-off negatives in (-1e-15, 0) with 0. Anything more negative
/// is an implementation error and throws.
double clamp_roundoff(double v);

}  // namespace satarq
