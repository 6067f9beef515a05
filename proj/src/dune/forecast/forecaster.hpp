// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dune/grid/climatology.hpp"
#include "dune/nn/checkpoint.hpp"
#include "dune/nn/dune_net.hpp"
#include "dune/train/samples.hpp"

namespace dune::forecast {

struct ForecastResult {
  Stamp stamp;
  int lead = 1;  // periods after the last observed input
  Field anomaly;
  std::optional<Field> absolute;
  std::vector<Field> heads;  // per-head anomalies, when requested
};

/// Adds anomaly + climatology mean. The stored anomaly is re-derived as
/// absolute - mean (exact by Sterbenz for temperatures in kelvin), so
/// absolute - anomaly == mean holds bit for bit.
void attach_absolute(ForecastResult& r, const ClimatologyTable& clim);

enum class Feedback { forecast, truth };

/// Inference over a trained checkpoint. Parameters are read-only, so one
/// instance can serve concurrent requests.
class Forecaster {
 public:
  explicit Forecaster(nn::Checkpoint ckpt);

  const nn::Checkpoint& checkpoint() const { return ckpt_; }
  const nn::DuneNet<float>& net() const { return net_; }
  int window() const { return ckpt_.window; }
  PeriodKind kind() const { return ckpt_.mode; }

  /// DataError unless `clim` is the table the checkpoint's stats were fit on.
  void check_climatology(const ClimatologyTable& clim) const;

  /// Normalized inputs built with the checkpoint's statistics.
  train::SeriesBundle bundle(std::span<const Field> anomalies, std::span<const Field> tisr_cycle,
                             std::span<const Field> constants) const;

  /// One network call: anomalies of the W periods from `first_target`.
  std::vector<ForecastResult> step(const train::SeriesBundle& bundle, const Stamp& first_target,
                                   const std::map<Stamp, Field>* history = nullptr, bool with_heads = false) const;

  /// `horizon` periods from `first_target`. Observed data is needed only for
  /// the initial window; later inputs are earlier forecasts (or observations
  /// with Feedback::truth).
  std::vector<ForecastResult> rollout(const train::SeriesBundle& bundle, const Stamp& first_target, int horizon,
                                      Feedback feedback = Feedback::forecast) const;

  /// Non-overlapping W-period blocks tiling the periods inside `months`,
  /// each started from observed inputs.
  std::vector<ForecastResult> evaluate_blocks(const train::SeriesBundle& bundle, const StampRange& months) const;

 private:
  nn::Checkpoint ckpt_;
  nn::DuneNet<float> net_;
};

}  // namespace dune::forecast
