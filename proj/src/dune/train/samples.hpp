// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "dune/grid/field.hpp"
#include "dune/grid/normalize.hpp"
#include "dune/ingest/input_stack.hpp"
#include "dune/nn/tensor.hpp"

namespace dune::train {

/// Names of the normalization channels, in checkpoint order.
std::vector<std::string> norm_channel_names();

/// Min/max statistics: anomalies from `train_anomalies`, TISR over the
/// calendar cycle, constants over their single field each. A constant that
/// is flat everywhere gets a unit range so it normalizes to zero.
std::vector<NormStats> fit_norm_stats(std::span<const Field> train_anomalies, std::span<const Field> tisr_cycle,
                                      std::span<const Field> constants);

/// Normalized model inputs for one period kind and window.
struct SeriesBundle {
  PeriodKind kind = PeriodKind::monthly;
  int window = 1;
  ingest::TisrAlignment alignment = ingest::TisrAlignment::target;
  GridPtr grid;
  std::map<Stamp, Field> anomaly;  // normalized anomalies
  std::vector<Field> tisr;         // normalized, one per calendar slot
  std::vector<Field> constants;    // normalized lsm, slt, orography, cvh, cvl

  bool has(const Stamp& s) const { return anomaly.count(s) != 0; }
  /// True when the W periods before `first_target` exist (and the W
  /// targets, if `with_targets`).
  bool can_build(const Stamp& first_target, bool with_targets) const;
  /// Input for targets first_target .. first_target+W-1 from the W periods
  /// before it; `history` overrides observed anomalies where present.
  nn::Tensor<float> input_for(const Stamp& first_target, const std::map<Stamp, Field>* history = nullptr) const;
  nn::Tensor<float> target_for(const Stamp& first_target) const;
  const Field& tisr_for(const Stamp& s) const;
};

/// `anomalies` are period anomalies (not normalized); tisr_cycle holds the
/// slots of `kind`.
SeriesBundle make_bundle(std::span<const Field> anomalies, std::span<const Field> tisr_cycle,
                         std::span<const Field> constants, const std::vector<NormStats>& stats, PeriodKind kind,
                         int window, ingest::TisrAlignment alignment);

struct Sample {
  Stamp first_target;
  nn::Tensor<float> input;
  nn::Tensor<float> target;
  std::vector<Stamp> stamps;  // every anomaly period read, inputs then targets
};

/// One sample per target block of W consecutive periods lying inside
/// `months`, advancing by `stride` periods (1 overlaps, W tiles).
std::vector<Sample> build_samples(const SeriesBundle& bundle, const StampRange& months, int stride = 1);

}  // namespace dune::train
