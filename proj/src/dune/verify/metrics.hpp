// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "dune/grid/field.hpp"
#include "dune/verify/regions.hpp"

namespace dune::verify {

/// Latitude-weighted RMSE over the region's cells, with the weights
/// renormalized over those cells: sqrt( sum m L(j) d^2 / sum m L(j) ).
double rmse(std::span<const float> forecast, std::span<const float> truth, const GridSpec& grid,
            const RegionMask& region);

/// Weighted anomaly correlation sum L f t / sqrt(sum L f^2 sum L t^2) over
/// the region. 0 when either field is identically zero there.
double acc(std::span<const float> forecast_anom, std::span<const float> truth_anom, const GridSpec& grid,
           const RegionMask& region);

enum class Category : std::uint8_t { below = 0, near = 1, above = 2, invalid = 3 };

/// below if v < p33, above if v > p66, near otherwise (ties go to near);
/// invalid if any input is NaN.
Category categorize(double v, double p33, double p66);
std::vector<Category> categorize_grid(std::span<const float> values, const Field& p33, const Field& p66);

/// Counts over valid pairs. "matches" is the HSS hit count (any category);
/// H/M/F/C treat "not near normal" as the event: H = matching extreme,
/// C = near/near, M = observed extreme not matched, F = observed near but
/// forecast extreme.
struct Contingency {
  long hits = 0, misses = 0, false_alarms = 0, correct_negatives = 0;
  long matches = 0;
  long total = 0;
  std::array<std::array<long, 3>, 3> confusion{};  // [observed][forecast]
};

Contingency contingency(std::span<const Category> forecast, std::span<const Category> observed,
                        const RegionMask* region = nullptr);

/// 100 (H - E) / (T - E) with E = T/3, i.e. 100 (3H - T) / (2T).
double hss(const Contingency& c);

}  // namespace dune::verify
