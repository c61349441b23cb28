#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "satarq/metrics.hpp"
#include "satarq/model.hpp"

namespace satarq {

/// Inclusive range min, min + step, ... <= max.
struct SweepRange {
  double min = 0.0;
  double max = 0.0;
  double step = 1.0;

  std::vector<double> values() const;
  /// Index of the value nearest the range midpoint, lower on ties.
  std::size_t median_index() const;
};

/// Per-source sweep ranges. An empty vector or a nullopt entry keeps the
/// template's value for that source.
struct GridSpec {
  std::vector<std::optional<SweepRange>> max_tx;
  std::vector<std::optional<SweepRange>> q;
  std::vector<std::optional<SweepRange>> power;
};

/// {"L": [range|null, ...], "q": [...], "P": [...]}, range = {"min", "max", "step"}.
GridSpec grid_from_json(const nlohmann::json& j, std::size_t num_sources);
GridSpec load_grid(const std::string& path, std::size_t num_sources);

enum class Family { kMaxTx, kQ, kPower };

/// One swept dimension: a family and a source.
struct Dimension {
  Family family;
  std::size_t source;
  SweepRange range;
};

/// Swept dimensions in enumeration order: all L, then all q, then all P,
/// each by source index. The first dimension varies slowest.
std::vector<Dimension> dimensions(const GridSpec& grid, std::size_t num_sources);

struct Assignment {
  std::vector<int> max_tx;
  std::vector<double> q;
  std::vector<double> power;
};

struct SweepRow {
  Assignment assignment;
  std::vector<std::size_t> index;  // position in each dimension
  std::vector<double> gamma;
  std::vector<SourceMetrics> sources;
  double source_avg_aoi = 0.0;
  double total_power = 0.0;
  double overall_ee = 0.0;
  double ws = 0.0;
  bool timeliness_degenerate = false;
};

struct SweepTable {
  std::size_t num_sources = 0;
  std::vector<Dimension> dims;
  std::vector<SweepRow> rows;
  double weight_aoi = 0.5;
  NormalizationContext norm;
};

/// Evaluates every grid point of `grid` applied to `tmpl`. A grid point
/// with q_i = 0 or gamma_i = 0 is kept with infinite timeliness metrics
/// and an infinite weighted sum. Throws EmptyGrid when a range is empty.
SweepTable sweep(const Scenario& tmpl, const GridSpec& grid, double weight_aoi = 0.5);

struct Baseline {
  std::string name;
  std::size_t row = 0;
  double value = 0.0;
};

struct DegeneracyWarning {
  std::size_t source = 0;
  std::string parameter;
  double value = 0.0;
  std::string reason;
};

struct OptResult {
  ObjectiveKind kind = ObjectiveKind::kWeightedSum;
  std::size_t row = 0;
  double value = 0.0;
  std::vector<Baseline> baselines;
  std::vector<DegeneracyWarning> warnings;
};

/// Minimum weighted sum; ties go to the earliest row in enumeration order.
OptResult optimize_ws(const SweepTable& table);
/// Maximum overall EE, with degeneracy warnings for the optimum.
OptResult optimize_ee(const SweepTable& table);

void write_sweep_csv(std::ostream& out, const SweepTable& table);
nlohmann::json opt_result_json(const OptResult& result, const SweepTable& table);

/// Round-trip decimal form: 17 significant digits.
std::string format_number(double v);

}  // namespace satarq
