// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "dune/common/config.hpp"
#include "dune/grid/field.hpp"

namespace dune::verify {

enum class Surface { all, land, ocean };

/// Latitude/longitude box restricted to a surface type. Longitudes are
/// degrees east in [0, 360]; lon_min > lon_max wraps through 0.
struct RegionDef {
  std::string name;
  double lat_min = -90, lat_max = 90;
  double lon_min = 0, lon_max = 360;
  Surface surface = Surface::all;

  /// "LAT0:LAT1:LON0:LON1:land|ocean|all"
  static RegionDef parse(const std::string& name, const std::string& text);
  std::string definition() const;
};

/// Built-in global/global_land/global_ocean, others from verify.region.NAME.
std::vector<RegionDef> regions_from_config(const Config& cfg);
RegionDef builtin_region(const std::string& name);

struct RegionMask {
  std::string name;
  std::string definition;
  GridPtr grid;
  std::vector<std::uint8_t> cells;

  std::size_t count() const;
  bool contains(std::size_t k) const { return cells[k] != 0; }
  /// Mask with every cell set.
  static RegionMask everywhere(const GridPtr& grid);
};

/// DataError if no cell qualifies. Land means lsm >= threshold.
RegionMask build_mask(const RegionDef& def, const Field& lsm, double lsm_threshold);

}  // namespace dune::verify
