// SPDX-License-Identifier: Apache-2.0
#include "dune/train/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dune/common/error.hpp"

namespace dune::train {

LrHold parse_lr_hold(const std::string& text) {
  if (text == "last_nonzero") return LrHold::last_nonzero;
  if (text == "floor") return LrHold::floor;
  throw UsageError("train.lr_hold must be last_nonzero or floor, got '" + text + "'");
}

double CosineSchedule::lr_at(int epoch) const {
  if (epoch < 0) throw UsageError("lr_at: epoch must be non-negative");
  if (period <= 0) return base_rate;
  int e = epoch;
  if (e >= period) e = hold == LrHold::floor ? period : period - 1;
  const double v = 0.5 * base_rate * (1.0 + std::cos(std::numbers::pi * e / period));
  return std::max(v, 0.0);
}

}  // namespace dune::train
