// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <string>
#include <vector>

#include "dune/common/stamp.hpp"
#include "dune/grid/field.hpp"

namespace dune {

/// Per-slot (month, season or year) climatological mean over a base period,
/// optionally with 33rd/66th percentile grids.
class ClimatologyTable {
 public:
  ClimatologyTable() = default;
  ClimatologyTable(PeriodKind kind, int first_year, int last_year, std::vector<Field> mean, std::vector<Field> p33,
                   std::vector<Field> p66);

  PeriodKind kind() const { return kind_; }
  int first_year() const { return first_year_; }
  int last_year() const { return last_year_; }
  bool has_percentiles() const { return !p33_.empty(); }
  const GridPtr& grid() const { return mean_.front().grid; }

  const Field& mean_for(const Stamp& s) const;
  const Field& p33_for(const Stamp& s) const;
  const Field& p66_for(const Stamp& s) const;

  const std::vector<Field>& means() const { return mean_; }
  const std::vector<Field>& p33() const { return p33_; }
  const std::vector<Field>& p66() const { return p66_; }

 private:
  std::size_t slot_of(const Stamp& s) const;

  PeriodKind kind_ = PeriodKind::monthly;
  int first_year_ = 0;
  int last_year_ = 0;
  std::vector<Field> mean_;
  std::vector<Field> p33_;
  std::vector<Field> p66_;
};

/// Linear-interpolation percentile (q in [0,1]) of an unsorted sample:
/// h = (n-1)q, result = x[floor h] + (h - floor h)(x[ceil h] - x[floor h]).
double percentile_linear(std::span<const double> samples, double q);

/// Builds the table from every field whose period lies in the base years.
/// All fields must share one grid and kind; every period of the base years
/// must be present exactly once (DataError naming the first absent stamp).
ClimatologyTable build_climatology(std::span<const Field> fields, int first_year, int last_year,
                                   bool with_percentiles);

/// Content hash of the mean table (kind, base years, values).
std::string climatology_hash(const ClimatologyTable& clim);

}  // namespace dune
