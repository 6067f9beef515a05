// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

namespace dune::train {

/// What the cosine schedule does once the period is over.
///  last_nonzero: keep the rate of epoch period-1 (training keeps moving).
///  floor: keep the epoch-period value, which is 0.
enum class LrHold { last_nonzero, floor };
LrHold parse_lr_hold(const std::string& text);

struct CosineSchedule {
  double base_rate = 1e-3;
  int period = 225;
  LrHold hold = LrHold::last_nonzero;

  /// `epoch` is 0-based.
  double lr_at(int epoch) const;
};

}  // namespace dune::train
