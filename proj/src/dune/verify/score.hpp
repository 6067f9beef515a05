// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>
#include <vector>

#include "dune/grid/climatology.hpp"
#include "dune/verify/metrics.hpp"
#include "dune/verify/regions.hpp"

namespace dune::verify {

/// One forecast source. Either anomalies (all metrics) or externally made
/// category grids (HSS only).
struct ForecastSet {
  std::string name;
  std::map<Stamp, Field> anomaly;
  std::map<Stamp, std::vector<Category>> categories;
  std::map<Stamp, int> lead;  // optional, defaults to 1
};

enum class AccReference { mean_base, test_period };
AccReference parse_acc_reference(const std::string& text);

struct ScoreRow {
  std::string source;
  std::string region;
  std::string stamp;  // "mean" on aggregate rows
  int lead = 1;       // 0 on aggregate rows
  double rmse = 0;    // NaN for category-only sources
  double acc = 0;
  double hss = 0;
  long samples = 1;   // stamps averaged (aggregate rows)
  Contingency counts;
};

struct ScoreReport {
  PeriodKind kind = PeriodKind::monthly;
  std::vector<std::string> sources;
  std::vector<std::pair<std::string, std::string>> regions;  // name, definition
  std::vector<ScoreRow> rows;                                 // per stamp, then one aggregate per (source, region)

  const ScoreRow& aggregate(const std::string& source, const std::string& region) const;
  /// Long format: one line per row.
  std::string to_csv() const;
  std::string to_json() const;
  /// One line per source, RMSE/ACC/HSS column groups per region.
  std::string wide_table() const;
};

/// Scores every source against `truth` (anomalies w.r.t. mean_clim).
/// Categories use pct_clim thresholds on absolute values.
ScoreReport score_run(const std::vector<ForecastSet>& sources, const std::map<Stamp, Field>& truth,
                      const ClimatologyTable& mean_clim, const ClimatologyTable& pct_clim,
                      const std::vector<RegionMask>& regions, AccReference acc_reference = AccReference::mean_base);

/// Category grid <-> field (0 below, 1 near, 2 above, NaN invalid).
Field category_field(const std::vector<Category>& cats, const GridPtr& grid, const Stamp& stamp);
std::vector<Category> categories_from_field(const Field& f);

/// Categories of absolute values anomaly + mean for the stamp.
std::vector<Category> categorize_anomaly(const Field& anomaly, const ClimatologyTable& mean_clim,
                                         const ClimatologyTable& pct_clim);

}  // namespace dune::verify
