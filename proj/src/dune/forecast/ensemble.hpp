// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dune/forecast/forecaster.hpp"

namespace dune::forecast {

struct MeanStd {
  double mean = 0;
  double std = 0;  // population standard deviation
};
MeanStd mean_std(std::span<const double> values);

struct EnsembleResult {
  std::vector<std::vector<ForecastResult>> members;
  std::vector<Field> mean;  // per stamp, gridpoint mean over members
  std::vector<Field> std;   // per stamp, gridpoint population std
  std::size_t sample_count = 0;  // members x stamps
};

/// Block evaluation of every member over `months`. Members must be on the
/// checkpoint grid.
EnsembleResult ensemble_inference(const Forecaster& f, std::span<const train::SeriesBundle> members,
                                  const StampRange& months);

/// `count` copies of `fields`, each with independent N(0, amplitude^2) noise per cell.
std::vector<std::vector<Field>> perturbed_members(std::span<const Field> fields, int count, double amplitude,
                                                  std::uint64_t seed);

/// Bilinear upsampling of every field onto `target`.
std::vector<Field> upsample_all(std::span<const Field> fields, const GridPtr& target);

}  // namespace dune::forecast
