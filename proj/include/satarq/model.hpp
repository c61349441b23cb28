#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace satarq {

/// Per-slot success probability given directly. `power` is the transmit
/// power charged per busy slot; it does not affect the success probability.
struct DirectChannel {
  double gamma = 1.0;
  double power = 1.0;
};

/// Rayleigh block fading with unit-variance noise: success iff
/// rate <= ln(1 + power |h|^2), i.e. gamma = exp(-(e^rate - 1) / power).
struct RayleighChannel {
  double power = 1.0;
  double rate = 1.0;  // nats per channel use
};

using ChannelSpec = std::variant<DirectChannel, RayleighChannel>;

struct SourceSpec {
  double q = 0.0;    // update generation probability per slot
  int max_tx = 1;    // maximum transmission time (attempt cap), >= 1
  ChannelSpec channel = DirectChannel{};
};

struct SimConfig {
  std::int64_t slots = 10'000'000;
  // Unset means max(1e4, 20 x analytic mean AoI).
  std::optional<std::int64_t> warmup;
  std::uint64_t seed = 42;
  int replications = 8;
  // AoI values >= cap land in the overflow bucket. Unset means 10 x the
  // largest analytic mean AoI.
  std::optional<std::int64_t> histogram_cap;
};

enum class ObjectiveKind { kWeightedSum, kEnergyEfficiency };

struct ObjectiveSpec {
  ObjectiveKind kind = ObjectiveKind::kWeightedSum;
  double weight_aoi = 0.5;
};

struct Scenario {
  std::vector<SourceSpec> sources;
  SimConfig sim;
  std::optional<ObjectiveSpec> objective;
};

struct SourceDerived {
  double select_prob = 0.0;   // p_i
  double success_prob = 0.0;  // gamma_i
  double hold_prob = 0.0;     // lambda_i = (1 - gamma_i)(1 - p)
  double power = 0.0;
  std::optional<double> outage_constant;  // k_i = e^R - 1, Rayleigh only
};

struct DerivedParams {
  double overall_ugp = 0.0;  // p
  std::vector<SourceDerived> sources;
};

/// 1 - prod(1 - q_i).
double overall_ugp(std::span<const double> q);

/// Probability that source i generates and wins the uniform tie-break in a
/// slot. Uses the Poisson-binomial distribution of the other sources'
/// generation counts.
std::vector<double> selection_probabilities(std::span<const double> q);

double resolve_gamma(const ChannelSpec& channel);
double transmit_power(const ChannelSpec& channel);

/// Collects every violated invariant; throws InvalidScenario when non-empty.
void validate(const Scenario& scenario);

DerivedParams derive(const Scenario& scenario);

enum class MonotonicityCondition { kShortMtt, kUgpThreshold, kGammaThreshold };

/// Result of checking the sufficient conditions under which average power is
/// increasing in transmit power for Rayleigh fading. An empty `condition`
/// means none applied; it is not a claim of non-monotonicity.
struct PowerCertificate {
  std::optional<MonotonicityCondition> condition;
  bool certified() const { return condition.has_value(); }
};

PowerCertificate power_monotonicity_certificate(int max_tx, double overall_ugp, double gamma);

std::string to_string(MonotonicityCondition c);

}  // namespace satarq
