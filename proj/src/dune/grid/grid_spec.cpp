// SPDX-License-Identifier: Apache-2.0
#include "dune/grid/grid_spec.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "dune/common/error.hpp"

namespace dune {

namespace {

void check_uniform(const std::vector<double>& v, const char* what) {
  if (v.size() < 2) return;
  const double step = v[1] - v[0];
  for (std::size_t i = 1; i < v.size(); ++i)
    if (std::abs((v[i] - v[i - 1]) - step) > 1e-6 * std::max(1.0, std::abs(step)))
      throw DataError(std::string(what) + " spacing is not uniform");
}

}  // namespace

PoleRow parse_pole_row(const std::string& text) {
  if (text == "south") return PoleRow::south;
  if (text == "north") return PoleRow::north;
  if (text == "none") return PoleRow::none;
  throw UsageError("grid.drop_pole_row must be south, north or none (got '" + text + "')");
}

GridSpec::GridSpec(std::vector<double> lat, std::vector<double> lon) : lat_(std::move(lat)), lon_(std::move(lon)) {
  if (lat_.empty() || lon_.empty()) throw DataError("grid must have at least one latitude and one longitude");
  for (std::size_t i = 0; i < lat_.size(); ++i) {
    if (std::abs(lat_[i]) > 90.0 + 1e-9) throw DataError("latitude outside [-90, 90]");
    if (i > 0 && !(lat_[i] < lat_[i - 1])) throw DataError("latitudes must be strictly descending");
  }
  for (std::size_t i = 0; i < lon_.size(); ++i) {
    if (lon_[i] < 0.0 || lon_[i] >= 360.0) throw DataError("longitudes must lie in [0, 360)");
    if (i > 0 && !(lon_[i] > lon_[i - 1])) throw DataError("longitudes must be strictly ascending");
  }
  check_uniform(lat_, "latitude");
  check_uniform(lon_, "longitude");
  if (lon_.size() > 1) {
    // Periodic: the gap from the last longitude back to the first equals the step.
    const double wrap = lon_.front() + 360.0 - lon_.back();
    if (std::abs(wrap - lon_step()) > 1e-6 * lon_step()) throw DataError("longitudes do not cover the globe periodically");
  }
}

GridSpec GridSpec::regular(std::size_t n_lat, std::size_t n_lon, PoleRow drop) {
  if (n_lat == 0 || n_lon == 0) throw UsageError("grid dimensions must be positive");
  std::vector<double> lat;
  std::vector<double> lon(n_lon);
  if (drop == PoleRow::none) {
    // Cell centres, no pole rows.
    const double step = 180.0 / static_cast<double>(n_lat);
    for (std::size_t i = 0; i < n_lat; ++i) lat.push_back(90.0 - step * (static_cast<double>(i) + 0.5));
  } else {
    const double step = 180.0 / static_cast<double>(n_lat);
    const std::size_t first = drop == PoleRow::north ? 1 : 0;
    for (std::size_t i = first; i < first + n_lat; ++i) lat.push_back(90.0 - step * static_cast<double>(i));
  }
  const double lstep = 360.0 / static_cast<double>(n_lon);
  for (std::size_t j = 0; j < n_lon; ++j) lon[j] = lstep * static_cast<double>(j);
  return GridSpec(std::move(lat), std::move(lon));
}

double GridSpec::lat_step() const { return lat_.size() < 2 ? 180.0 : lat_[0] - lat_[1]; }
double GridSpec::lon_step() const { return lon_.size() < 2 ? 360.0 : lon_[1] - lon_[0]; }

GridSpec GridSpec::coarsened(std::size_t factor) const {
  if (factor == 0 || !divisible_by(factor))
    throw UsageError("grid " + describe() + " is not divisible by " + std::to_string(factor));
  std::vector<double> lat(n_lat() / factor), lon(n_lon() / factor);
  for (std::size_t i = 0; i < lat.size(); ++i) {
    double s = 0;
    for (std::size_t k = 0; k < factor; ++k) s += lat_[i * factor + k];
    lat[i] = s / static_cast<double>(factor);
  }
  for (std::size_t j = 0; j < lon.size(); ++j) {
    double s = 0;
    for (std::size_t k = 0; k < factor; ++k) s += lon_[j * factor + k];
    lon[j] = s / static_cast<double>(factor);
  }
  return GridSpec(std::move(lat), std::move(lon));
}

GridSpec GridSpec::without_pole_row(PoleRow which) const {
  if (which == PoleRow::none) return *this;
  std::vector<double> lat = lat_;
  if (which == PoleRow::south) lat.pop_back();
  else lat.erase(lat.begin());
  return GridSpec(std::move(lat), lon_);
}

std::string GridSpec::describe() const {
  std::ostringstream os;
  os << n_lat() << "x" << n_lon() << " (" << lat_step() << " deg)";
  return os.str();
}

bool operator==(const GridSpec& a, const GridSpec& b) {
  if (a.lat_.size() != b.lat_.size() || a.lon_.size() != b.lon_.size()) return false;
  for (std::size_t i = 0; i < a.lat_.size(); ++i)
    if (std::abs(a.lat_[i] - b.lat_[i]) > 1e-9) return false;
  for (std::size_t i = 0; i < a.lon_.size(); ++i)
    if (std::abs(a.lon_[i] - b.lon_[i]) > 1e-9) return false;
  return true;
}

std::vector<double> latitude_weights(const GridSpec& grid) {
  std::vector<double> w(grid.n_lat());
  double sum = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    // cos(+-90 deg) is ~6e-17 in floating point; clamp so weights stay >= 0.
    w[j] = std::max(0.0, std::cos(grid.lat()[j] * std::numbers::pi / 180.0));
    sum += w[j];
  }
  for (double& x : w) x /= sum;
  return w;
}

}  // namespace dune
