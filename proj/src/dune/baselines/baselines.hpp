// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "dune/grid/field.hpp"

namespace dune::baselines {

enum class BaselineKind { persist_prior_step, persist_prior_year, climatology, mlr };
std::string_view to_string(BaselineKind k);
BaselineKind parse_baseline_kind(std::string_view text);

/// Anomaly history keyed by period.
using AnomalySeries = std::map<Stamp, Field>;

/// Copy of the previous period's anomaly (prior_step) or the same slot one
/// year earlier (prior_year). DataError if that period is absent.
Field persistence_forecast(BaselineKind kind, const AnomalySeries& history, const Stamp& target);

/// All-zero anomaly, i.e. the climatological mean itself.
Field climatology_forecast(const GridPtr& grid, const Stamp& target);

/// Per-gridpoint OLS of the anomaly on [1, prior-step anomaly, sin, cos of
/// the target slot angle]; annual mode drops the calendar terms.
class MlrModel {
 public:
  /// Fits on every target period in `targets` whose prior period is in `series`.
  static MlrModel fit(const AnomalySeries& series, std::span<const Stamp> targets);

  PeriodKind kind() const { return kind_; }
  const GridPtr& grid() const { return grid_; }
  int predictor_count() const { return predictors_; }
  /// Gridpoints whose design was rank deficient; they forecast zero anomaly.
  std::size_t fallback_count() const { return fallback_count_; }
  /// Coefficients of gridpoint k, predictor_count() entries.
  std::span<const double> coefficients(std::size_t k) const;

  Field forecast(const Field& prior_anomaly, const Stamp& target) const;

  /// Design row for a target period.
  static std::vector<double> design_row(double prior, const Stamp& target);

 private:
  PeriodKind kind_ = PeriodKind::monthly;
  GridPtr grid_;
  int predictors_ = 0;
  std::vector<double> coef_;
  std::vector<std::uint8_t> fallback_;
  std::size_t fallback_count_ = 0;
};

/// Integer block factor that coarsens a grid of this resolution to about 2
/// degrees (at least 1, and dividing both dimensions).
int coarse_factor(const GridSpec& grid, double target_degrees = 2.0);

/// MLR at the coarse grid: block-mean the series, fit, forecast, then
/// bilinear back onto the data grid.
struct CoarseMlr {
  int factor = 1;
  GridPtr coarse;
  GridPtr fine;
  MlrModel model;

  static CoarseMlr fit(const AnomalySeries& fine_series, std::span<const Stamp> targets, int factor);
  Field forecast(const AnomalySeries& fine_series, const Stamp& target) const;
};

}  // namespace dune::baselines
