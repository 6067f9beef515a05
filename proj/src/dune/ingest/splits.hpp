// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <vector>

#include "dune/common/config.hpp"
#include "dune/common/stamp.hpp"

namespace dune::ingest {

enum class Split { train, val, test };
std::string_view to_string(Split s);
Split parse_split(std::string_view s);

/// Train/validation/test month ranges; disjoint and ordered.
struct SplitPlan {
  StampRange train;
  StampRange val;
  StampRange test;

  static SplitPlan from_config(const Config& cfg);
  void validate() const;
  const StampRange& range(Split s) const;
  std::optional<Split> split_of(const Stamp& month) const;
};

/// Periods of `kind` whose months all lie in `months`.
std::vector<Stamp> periods_inside(const StampRange& months, PeriodKind kind);

/// Consecutive (input, target) period pairs with both periods inside `months`.
std::vector<std::pair<Stamp, Stamp>> pairs_inside(const StampRange& months, PeriodKind kind);

struct SplitCounts {
  long train = 0, val = 0, test = 0;
};
SplitCounts count_periods(const SplitPlan& plan, PeriodKind kind);
SplitCounts count_pairs(const SplitPlan& plan, PeriodKind kind);

}  // namespace dune::ingest
