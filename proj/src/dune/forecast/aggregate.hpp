// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "dune/grid/field.hpp"

namespace dune::forecast {

/// Gridpoint means of the months making up each season or year. Monthly
/// input must be contiguous. Periods cut off at either end of the series are
/// dropped unless `strict`, in which case they raise DataError. A cell is
/// missing in the mean when it is missing in any member month.
std::vector<Field> aggregate_periods(std::span<const Field> months, PeriodKind kind, bool strict = false);

/// Reduce a 12-entry calendar cycle (January first) to the slots of `kind`.
std::vector<Field> cycle_for_kind(std::span<const Field> monthly_cycle, PeriodKind kind);

}  // namespace dune::forecast
