// SPDX-License-Identifier: Apache-2.0
#include "dune/grid/normalize.hpp"

#include <cmath>
#include <limits>

#include "dune/common/error.hpp"

namespace dune {

NormStats::NormStats(std::string channel, double x_min, double x_max)
    : channel_(std::move(channel)), x_min_(x_min), x_max_(x_max) {
  if (!std::isfinite(x_min_) || !std::isfinite(x_max_))
    throw UsageError("normalization range of channel '" + channel_ + "' is not finite");
  if (!(x_max_ > x_min_))
    throw UsageError("degenerate normalization range for channel '" + channel_ + "' (x_max <= x_min)");
}

NormStats NormStats::fit(std::string channel, std::span<const float> values) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (float v : values) {
    if (!std::isfinite(v)) continue;
    lo = std::min(lo, static_cast<double>(v));
    hi = std::max(hi, static_cast<double>(v));
  }
  return NormStats(std::move(channel), lo, hi);
}

}  // namespace dune
