// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dune/common/stamp.hpp"
#include "dune/grid/grid_spec.hpp"

namespace dune {

enum class Variable { t2m, sst, blended_t, tisr, lsm, slt, orography, cvh, cvl, category };

std::string_view to_string(Variable v);
Variable parse_variable(std::string_view name);
std::string_view units_of(Variable v);
bool is_temperature(Variable v);

/// One variable on a lat/lon grid, optionally stamped (constants are not).
/// Values are row-major (lat, lon). `missing` is either empty (nothing
/// missing) or holds one flag per cell.
struct Field {
  Variable variable = Variable::t2m;
  std::optional<Stamp> stamp;
  GridPtr grid;
  std::vector<float> values;
  std::vector<std::uint8_t> missing;

  Field() = default;
  Field(Variable v, std::optional<Stamp> s, GridPtr g, float fill = 0.0f);

  std::size_t size() const { return values.size(); }
  float& at(std::size_t i, std::size_t j) { return values[i * grid->n_lon() + j]; }
  float at(std::size_t i, std::size_t j) const { return values[i * grid->n_lon() + j]; }
  bool is_missing(std::size_t k) const { return !missing.empty() && missing[k] != 0; }
  std::size_t missing_count() const;

  /// Throws DataError when a non-missing value is not finite or a mask
  /// variable leaves [0, 1].
  void validate() const;
};

/// Throws DataError naming `what` if the grids differ.
void require_same_grid(const Field& a, const Field& b, std::string_view what);

/// values - climatology mean of the stamp's slot; deanomalize is the inverse.
class ClimatologyTable;
Field anomalize(const Field& field, const ClimatologyTable& clim);
Field deanomalize(const Field& anomaly, const ClimatologyTable& clim);

}  // namespace dune
