// SPDX-License-Identifier: Apache-2.0
#include "dune/verify/regions.hpp"

#include <algorithm>
#include <sstream>

#include "dune/common/error.hpp"

namespace dune::verify {

RegionDef RegionDef::parse(const std::string& name, const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() != 5) throw UsageError("region '" + name + "' must be LAT0:LAT1:LON0:LON1:SURFACE, got '" + text + "'");
  RegionDef d;
  d.name = name;
  try {
    d.lat_min = std::stod(parts[0]);
    d.lat_max = std::stod(parts[1]);
    d.lon_min = std::stod(parts[2]);
    d.lon_max = std::stod(parts[3]);
  } catch (const std::exception&) {
    throw UsageError("region '" + name + "' has a non-numeric bound: '" + text + "'");
  }
  const auto s = trim(parts[4]);
  if (s == "land")
    d.surface = Surface::land;
  else if (s == "ocean")
    d.surface = Surface::ocean;
  else if (s == "all")
    d.surface = Surface::all;
  else
    throw UsageError("region '" + name + "' surface must be land, ocean or all");
  if (d.lat_min > d.lat_max) throw UsageError("region '" + name + "' has lat_min > lat_max");
  return d;
}

std::string RegionDef::definition() const {
  std::ostringstream os;
  os << "lat " << lat_min << ".." << lat_max << ", lon " << lon_min << ".." << lon_max << "E, "
     << (surface == Surface::land ? "land" : surface == Surface::ocean ? "ocean" : "all surfaces");
  return os.str();
}

RegionDef builtin_region(const std::string& name) {
  RegionDef d;
  d.name = name;
  if (name == "global") return d;
  if (name == "global_land") {
    d.surface = Surface::land;
    return d;
  }
  if (name == "global_ocean") {
    d.surface = Surface::ocean;
    return d;
  }
  throw UsageError("unknown region '" + name + "'");
}

std::vector<RegionDef> regions_from_config(const Config& cfg) {
  std::vector<RegionDef> out;
  for (const auto& name : cfg.get_list("verify.regions")) {
    const std::string key = "verify.region." + name;
    if (cfg.has(key))
      out.push_back(RegionDef::parse(name, cfg.get(key)));
    else
      out.push_back(builtin_region(name));
  }
  return out;
}

std::size_t RegionMask::count() const { return static_cast<std::size_t>(std::count(cells.begin(), cells.end(), 1)); }

RegionMask RegionMask::everywhere(const GridPtr& grid) {
  return {"global", "all cells", grid, std::vector<std::uint8_t>(grid->size(), 1)};
}

RegionMask build_mask(const RegionDef& d, const Field& lsm, double threshold) {
  const auto& g = *lsm.grid;
  RegionMask m{d.name, d.definition(), lsm.grid, std::vector<std::uint8_t>(g.size(), 0)};
  const bool wraps = d.lon_min > d.lon_max;
  for (std::size_t i = 0; i < g.n_lat(); ++i) {
    const double lat = g.lat()[i];
    if (lat < d.lat_min || lat > d.lat_max) continue;
    for (std::size_t k = 0; k < g.n_lon(); ++k) {
      const double lon = g.lon()[k];
      const bool in_lon = wraps ? (lon >= d.lon_min || lon <= d.lon_max) : (lon >= d.lon_min && lon <= d.lon_max);
      if (!in_lon) continue;
      const bool land = lsm.at(i, k) >= threshold;
      if (d.surface == Surface::land && !land) continue;
      if (d.surface == Surface::ocean && land) continue;
      m.cells[i * g.n_lon() + k] = 1;
    }
  }
  if (m.count() == 0) throw DataError("region '" + d.name + "' (" + d.definition() + ") contains no grid cells");
  return m;
}

}  // namespace dune::verify
