// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dune/common/stamp.hpp"
#include "dune/grid/field.hpp"

namespace dune::ingest {

/// Reads monthly fields of the requested variables from either a directory
/// of grid files (`<dir>/<variable>.dgf`) or a classic netCDF file with
/// CF names (t2m, sst, lsm, slt, z, cvh, cvl, tisr).
///
/// Returned series are sorted by stamp, share one grid and are contiguous;
/// a hole inside the requested range raises DataError naming the first
/// absent stamp. Time-invariant variables (lsm, slt, orography, cvh, cvl)
/// come back as one unstamped field.
std::map<Variable, std::vector<Field>> read_monthly_dataset(const std::filesystem::path& path,
                                                            std::span<const Variable> variables,
                                                            std::optional<StampRange> range);

/// Name of a variable inside ERA5/CF netCDF files.
std::string netcdf_name(Variable v);
bool is_constant(Variable v);

/// Decodes a CF time value ("hours since 1900-01-01 00:00:00") to the month
/// containing it.
Stamp decode_cf_month(double value, const std::string& units);

/// Drops a pole row when the grid has an odd number of rows that includes
/// both poles (ERA5's 721 rows); otherwise returns the field unchanged.
Field to_model_grid(const Field& f, PoleRow drop, const GridPtr& model_grid);
GridPtr model_grid_for(const GridSpec& data_grid, PoleRow drop);

/// Throws DataError if `fields` is not sorted and gap-free.
void require_contiguous(std::span<const Field> fields, std::string_view what);

}  // namespace dune::ingest
