// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "dune/grid/field.hpp"

namespace dune::ingest {

/// Internal gridded file ("DUNEGRD1"):
///
///   bytes 0-7   magic "DUNEGRD1"
///   bytes 8-11  header length H, uint32 little-endian
///   H bytes     JSON header: variable, units, period kind, stamps, grid
///               latitudes/longitudes, record count and layout note
///   payload     count records, time-major; each record n_lat*n_lon
///               float32 little-endian, row-major (lat, lon); NaN = missing
///
/// All fields in one file share a variable and a grid; either every field is
/// stamped (one kind) or none is (constants).
void write_grid_file(const std::filesystem::path& path, std::span<const Field> fields);
std::vector<Field> read_grid_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& bytes);

}  // namespace dune::ingest
