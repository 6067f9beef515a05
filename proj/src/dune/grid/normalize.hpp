// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <string>

namespace dune {

/// Min/max scaling statistics of one input channel. Construction rejects
/// degenerate ranges, so normalize() itself never fails.
class NormStats {
 public:
  NormStats(std::string channel, double x_min, double x_max);

  /// Min/max over the finite entries of `values`.
  static NormStats fit(std::string channel, std::span<const float> values);

  const std::string& channel() const { return channel_; }
  double x_min() const { return x_min_; }
  double x_max() const { return x_max_; }
  double range() const { return x_max_ - x_min_; }

  friend bool operator==(const NormStats&, const NormStats&) = default;

 private:
  std::string channel_;
  double x_min_;
  double x_max_;
};

/// z = (x - x_min) / (x_max - x_min). Not clipped: values outside the
/// fitted range map outside [0, 1].
inline double normalize(double x, const NormStats& s) { return (x - s.x_min()) / s.range(); }

inline double denormalize(double z, const NormStats& s) { return z * s.range() + s.x_min(); }

}  // namespace dune
