#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "doctest.h"
#include "satarq/error.hpp"
#include "satarq/metrics.hpp"
#include "satarq/model.hpp"

using namespace satarq;

namespace {

// Independent oracle: walk all 2^N generation outcomes and split each
// outcome's probability uniformly among the generators.
std::vector<double> enumerate_selection(const std::vector<double>& q, double* any = nullptr) {
  const std::size_t n = q.size();
  std::vector<double> p(n, 0.0);
  double total = 0.0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    double pr = 1.0;
    int k = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const bool gen = (mask >> i) & 1u;
      pr *= gen ? q[i] : 1.0 - q[i];
      k += gen;
    }
    if (k == 0) continue;
    total += pr;
    for (std::size_t i = 0; i < n; ++i) {
      if ((mask >> i) & 1u) p[i] += pr / k;
    }
  }
  if (any) *any = total;
  return p;
}

Scenario two_direct(double q1, double q2, double g1, double g2) {
  Scenario s;
  s.sources = {{q1, 2, DirectChannel{g1, 1.0}}, {q2, 2, DirectChannel{g2, 1.0}}};
  return s;
}

}  // namespace

TEST_CASE("overall_ugp") {
  CHECK(overall_ugp(std::vector{0.1, 0.1}) == doctest::Approx(0.19).epsilon(1e-15));
  CHECK(overall_ugp(std::vector{0.0, 0.0, 0.0}) == 0.0);
  double any = 0.0;
  enumerate_selection({0.5, 0.2}, &any);
  CHECK(std::abs(overall_ugp(std::vector{0.5, 0.2}) - any) < 1e-15);
  CHECK(std::abs(any - 0.6) < 1e-15);
}

TEST_CASE("selection_probabilities examples") {
  CHECK(selection_probabilities(std::vector{0.7})[0] == doctest::Approx(0.7));
  const auto sym = selection_probabilities(std::vector{0.1, 0.1});
  CHECK(std::abs(sym[0] - 0.095) < 1e-15);
  CHECK(std::abs(sym[1] - 0.095) < 1e-15);
  const auto p = selection_probabilities(std::vector{0.5, 0.2});
  const auto oracle = enumerate_selection({0.5, 0.2});
  CHECK(std::abs(p[0] - oracle[0]) < 1e-15);
  CHECK(std::abs(p[1] - oracle[1]) < 1e-15);
  CHECK(std::abs(p[0] - 0.45) < 1e-15);
  CHECK(std::abs(p[1] - 0.15) < 1e-15);
}

TEST_CASE("selection_probabilities agree with enumeration and sum to p") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> size(1, 10);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> q(static_cast<std::size_t>(size(rng)));
    for (auto& v : q) v = trial % 5 == 0 && unit(rng) < 0.3 ? (unit(rng) < 0.5 ? 0.0 : 1.0) : unit(rng);
    double any = 0.0;
    const auto oracle = enumerate_selection(q, &any);
    const auto p = selection_probabilities(q);
    double sum = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
      CHECK(std::abs(p[i] - oracle[i]) < 1e-12);
      CHECK(p[i] <= q[i] + 1e-15);
      sum += p[i];
    }
    CHECK(std::abs(sum - overall_ugp(q)) < 1e-12);
  }
}

TEST_CASE("selection probability does not grow with contention") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> q(4);
    for (auto& v : q) v = unit(rng);
    auto more = q;
    more[2] = q[2] + (1.0 - q[2]) * unit(rng);
    const auto a = selection_probabilities(q);
    const auto b = selection_probabilities(more);
    for (std::size_t i : {0u, 1u, 3u}) CHECK(b[i] <= a[i] + 1e-15);
  }
}

TEST_CASE("resolve_gamma") {
  CHECK(resolve_gamma(DirectChannel{0.42, 1.0}) == 0.42);
  CHECK(std::abs(resolve_gamma(RayleighChannel{1e9, 2.0}) - 1.0) < 1e-8);
  const double k = std::expm1(1.3);
  CHECK(std::abs(resolve_gamma(RayleighChannel{k, 1.3}) - std::exp(-1.0)) < 1e-15);
  // mpmath: exp(-(e^2 - 1) / 15) at 40 digits
  CHECK(std::abs(resolve_gamma(RayleighChannel{15.0, 2.0}) - 0.65315744189471522) < 1e-14);
}

TEST_CASE("resolve_gamma is increasing in power and decreasing in rate") {
  for (double rate = 0.25; rate <= 4.0; rate += 0.25) {
    double prev = 0.0;
    for (double power = 0.5; power <= 200.0; power *= 1.3) {
      const double g = resolve_gamma(RayleighChannel{power, rate});
      CHECK(g > prev);
      CHECK(g > 0.0);
      CHECK(g < 1.0);
      prev = g;
    }
  }
  for (double power = 0.5; power <= 200.0; power *= 1.7) {
    double prev = 1.0;
    for (double rate = 0.1; rate <= 4.0; rate += 0.1) {
      const double g = resolve_gamma(RayleighChannel{power, rate});
      CHECK(g < prev);
      prev = g;
    }
  }
}

TEST_CASE("derive") {
  const auto d = derive(two_direct(0.1, 0.1, 0.8, 0.8));
  CHECK(std::abs(d.overall_ugp - 0.19) < 1e-15);
  for (const auto& s : d.sources) {
    CHECK(std::abs(s.select_prob - 0.095) < 1e-15);
    CHECK(std::abs(s.hold_prob - 0.162) < 1e-15);
  }

  Scenario sat;
  sat.sources = {{1.0, 1, DirectChannel{1.0, 1.0}}};
  const auto ds = derive(sat);
  CHECK(ds.overall_ugp == 1.0);
  CHECK(ds.sources[0].select_prob == 1.0);
  CHECK(ds.sources[0].hold_prob == 0.0);

  const auto mixed = derive(two_direct(0.5, 0.2, 0.9, 0.6));
  CHECK(std::abs(mixed.sources[0].hold_prob - 0.04) < 1e-15);
  CHECK(std::abs(mixed.sources[1].hold_prob - 0.16) < 1e-15);

  Scenario ray;
  ray.sources = {{0.3, 2, RayleighChannel{15.0, 1.5}}};
  const auto dr = derive(ray);
  REQUIRE(dr.sources[0].outage_constant.has_value());
  CHECK(std::abs(*dr.sources[0].outage_constant - std::expm1(1.5)) < 1e-15);
  CHECK(dr.sources[0].power == 15.0);
}

TEST_CASE("derive reports every violated invariant") {
  Scenario bad;
  bad.sources = {{1.5, 0, DirectChannel{0.5, 1.0}}, {0.0, 2, RayleighChannel{-1.0, 0.0}}};
  try {
    derive(bad);
    FAIL("expected InvalidScenario");
  } catch (const InvalidScenario& e) {
    std::vector<std::string> fields;
    for (const auto& v : e.violations()) fields.push_back(v.field);
    auto has = [&](const std::string& f) { return std::find(fields.begin(), fields.end(), f) != fields.end(); };
    CHECK(has("sources[0].q"));
    CHECK(has("sources[0].L"));
    CHECK(has("sources[1].channel.rayleigh.P"));
    CHECK(has("sources[1].channel.rayleigh.R"));
  }

  Scenario empty;
  CHECK_THROWS_AS(derive(empty), InvalidScenario);

  Scenario silent;
  silent.sources = {{0.0, 1, DirectChannel{}}};
  CHECK_THROWS_AS(derive(silent), InvalidScenario);
}

TEST_CASE("q = 0 sources are allowed in a scenario") {
  const auto d = derive(two_direct(0.0, 0.4, 0.8, 0.8));
  CHECK(d.sources[0].select_prob == 0.0);
  CHECK(std::abs(d.sources[1].select_prob - 0.4) < 1e-15);
}

TEST_CASE("power_monotonicity_certificate") {
  auto c = power_monotonicity_certificate(2, 0.01, 0.1);
  REQUIRE(c.certified());
  CHECK(*c.condition == MonotonicityCondition::kShortMtt);

  c = power_monotonicity_certificate(10, 0.2, 0.1);
  REQUIRE(c.certified());
  CHECK(*c.condition == MonotonicityCondition::kUgpThreshold);
  CHECK(1.0 / (std::numbers::e * std::numbers::e + 1.0) == doctest::Approx(0.1192029220221176));

  // min{1 - 1/(2 * 0.95), 1/e} = 0.367879 > 0.3
  CHECK_FALSE(power_monotonicity_certificate(10, 0.05, 0.3).certified());
  c = power_monotonicity_certificate(10, 0.05, 0.37);
  REQUIRE(c.certified());
  CHECK(*c.condition == MonotonicityCondition::kGammaThreshold);
}

TEST_CASE("certified power monotonicity holds numerically") {
  // Scan E(P) along Rayleigh channels; wherever the certificate holds on both
  // ends of a step, average power must not decrease.
  int certified_steps = 0;
  for (int max_tx : {1, 2, 3, 4, 8, 20}) {
    for (double q : {0.01, 0.03, 0.05, 0.1, 0.3}) {
      for (double rate : {0.5, 1.5, 2.0, 3.0}) {
        const std::vector<double> qs{q, 0.02};
        const double p = overall_ugp(qs);
        const double sel = selection_probabilities(qs)[0];
        double prev_power = -1.0;
        bool prev_cert = false;
        for (double power = 0.1; power <= 100.0; power += 0.05) {
          const double g = resolve_gamma(RayleighChannel{power, rate});
          const double e = avg_power(SourceParams{max_tx, p, sel, g}, power);
          const bool cert = power_monotonicity_certificate(max_tx, p, g).certified();
          if (cert && prev_cert) {
            ++certified_steps;
            CHECK(e >= prev_power - 1e-9);
          }
          prev_power = e;
          prev_cert = cert;
        }
      }
    }
  }
  CHECK(certified_steps > 1000);
}
