// SPDX-License-Identifier: Apache-2.0
#include "dune/ingest/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "dune/common/config.hpp"
#include "dune/common/error.hpp"
#include "dune/ingest/grid_file.hpp"
#include "dune/ingest/netcdf_classic.hpp"

namespace dune::ingest {

namespace {

constexpr double kGravity = 9.80665;

// Days since 0000-03-01 in the proleptic Gregorian calendar.
long days_from_civil(long y, unsigned m, unsigned d) {
  y -= m <= 2;
  const long era = (y >= 0 ? y : y - 399) / 400;
  const auto yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<long>(doe) - 719468;
}

void civil_from_days(long z, int& y, int& m) {
  z += 719468;
  const long era = (z >= 0 ? z : z - 146096) / 146097;
  const auto doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  m = static_cast<int>(mp < 10 ? mp + 3 : mp - 9);
  y = static_cast<int>(static_cast<long>(yoe) + era * 400 + (m <= 2));
}

const NetcdfFile::Variable* find_any(const NetcdfFile& nc, std::initializer_list<const char*> names) {
  for (const char* n : names)
    if (const auto* v = nc.find(n)) return v;
  return nullptr;
}

std::map<Variable, std::vector<Field>> read_netcdf(const std::filesystem::path& path,
                                                   std::span<const Variable> variables) {
  NetcdfFile nc(path);
  const auto* latv = find_any(nc, {"latitude", "lat"});
  const auto* lonv = find_any(nc, {"longitude", "lon"});
  if (!latv || !lonv) throw DataError(path.string() + ": no latitude/longitude coordinate variables");
  std::vector<double> lat = nc.read_unpacked(*latv);
  std::vector<double> lon = nc.read_unpacked(*lonv);
  const bool flip_lat = lat.size() > 1 && lat[0] < lat[1];
  if (flip_lat) std::reverse(lat.begin(), lat.end());
  for (double& x : lon) x = std::fmod(std::fmod(x, 360.0) + 360.0, 360.0);
  // Roll so longitudes ascend from the smallest (e.g. -180..180 sources).
  const auto roll = static_cast<std::size_t>(std::min_element(lon.begin(), lon.end()) - lon.begin());
  std::rotate(lon.begin(), lon.begin() + static_cast<long>(roll), lon.end());
  auto grid = make_grid(GridSpec(lat, lon));
  const std::size_t n_lat = lat.size(), n_lon = lon.size();

  std::vector<Stamp> stamps;
  std::optional<std::size_t> time_dim;
  if (const auto* tv = find_any(nc, {"time", "valid_time"})) {
    if (!tv->dims.empty()) time_dim = tv->dims.front();
    const auto units = tv->text("units");
    if (!units) throw DataError(path.string() + ": time variable has no units");
    for (double t : nc.read_raw(*tv)) stamps.push_back(decode_cf_month(t, *units));
  }

  std::map<Variable, std::vector<Field>> out;
  for (Variable var : variables) {
    const auto* v = nc.find(netcdf_name(var));
    if (!v) throw DataError(path.string() + ": variable '" + netcdf_name(var) + "' not present");
    const auto shape = nc.shape(*v);
    if (shape.size() < 2 || shape[shape.size() - 2] != n_lat || shape.back() != n_lon)
      throw DataError(path.string() + ": variable " + v->name + " is not laid out as (..., lat, lon)");
    const std::size_t cells = n_lat * n_lon;
    std::vector<double> data = nc.read_unpacked(*v);
    const std::size_t records = data.size() / cells;
    // Leading dimensions other than time (e.g. a singleton level) must be 1.
    const bool has_time = !stamps.empty() && shape.size() >= 3 && time_dim && v->dims.front() == *time_dim;
    if (has_time && records % stamps.size() != 0) throw DataError(path.string() + ": " + v->name + " has an odd record count");
    const std::size_t per_time = has_time ? records / stamps.size() : records;

    auto make = [&](std::size_t rec, std::optional<Stamp> st) {
      Field f(var, st, grid);
      // ERA5 recent-month data carries an expver axis; take the first valid value.
      for (std::size_t i = 0; i < n_lat; ++i) {
        const std::size_t si = flip_lat ? n_lat - 1 - i : i;
        for (std::size_t j = 0; j < n_lon; ++j) {
          const std::size_t sj = (j + roll) % n_lon;
          double value = std::numeric_limits<double>::quiet_NaN();
          for (std::size_t e = 0; e < per_time && std::isnan(value); ++e)
            value = data[(rec * per_time + e) * cells + si * n_lon + sj];
          if (var == Variable::orography) value /= kGravity;
          const std::size_t k = i * n_lon + j;
          f.values[k] = static_cast<float>(value);
          if (std::isnan(value)) {
            if (f.missing.empty()) f.missing.assign(cells, 0);
            f.missing[k] = 1;
          }
        }
      }
      return f;
    };

    auto& series = out[var];
    if (is_constant(var) || !has_time) {
      series.push_back(make(0, std::nullopt));
    } else {
      for (std::size_t t = 0; t < stamps.size(); ++t) series.push_back(make(t, stamps[t]));
    }
  }
  return out;
}

}  // namespace

bool is_constant(Variable v) {
  return v == Variable::lsm || v == Variable::slt || v == Variable::orography || v == Variable::cvh ||
         v == Variable::cvl;
}

std::string netcdf_name(Variable v) {
  if (v == Variable::orography) return "z";
  return std::string(to_string(v));
}

Stamp decode_cf_month(double value, const std::string& units) {
  const auto since = units.find(" since ");
  if (since == std::string::npos) throw DataError("unsupported time units '" + units + "'");
  const std::string unit = trim(units.substr(0, since));
  const std::string ref = trim(units.substr(since + 7));
  int y = 0, m = 0, d = 0, hh = 0, mm = 0;
  double ss = 0;
  if (std::sscanf(ref.c_str(), "%d-%d-%d", &y, &m, &d) != 3) throw DataError("unsupported time reference '" + ref + "'");
  if (auto t = ref.find_first_of(" T"); t != std::string::npos)
    std::sscanf(ref.c_str() + t + 1, "%d:%d:%lf", &hh, &mm, &ss);
  if (unit == "months") {
    const long months = static_cast<long>(std::floor(value + 1e-6));
    return Stamp::month(y, m).next(months);
  }
  double seconds_per_unit = 0;
  if (unit == "days") seconds_per_unit = 86400;
  else if (unit == "hours") seconds_per_unit = 3600;
  else if (unit == "minutes") seconds_per_unit = 60;
  else if (unit == "seconds") seconds_per_unit = 1;
  else throw DataError("unsupported time unit '" + unit + "'");
  const double secs = value * seconds_per_unit + hh * 3600.0 + mm * 60.0 + ss;
  const long day = days_from_civil(y, static_cast<unsigned>(m), static_cast<unsigned>(d)) +
                   static_cast<long>(std::floor(secs / 86400.0 + 1e-9));
  int oy = 0, om = 0;
  civil_from_days(day, oy, om);
  return Stamp::month(oy, om);
}

void require_contiguous(std::span<const Field> fields, std::string_view what) {
  for (std::size_t i = 1; i < fields.size(); ++i) {
    const Stamp expect = fields[i - 1].stamp->next();
    if (!(*fields[i].stamp == expect))
      throw DataError(std::string(what) + ": stamp gap, " + expect.str() + " is absent");
  }
}

std::map<Variable, std::vector<Field>> read_monthly_dataset(const std::filesystem::path& path,
                                                            std::span<const Variable> variables,
                                                            std::optional<StampRange> range) {
  if (!std::filesystem::exists(path)) throw DataError("dataset path does not exist: " + path.string());
  std::map<Variable, std::vector<Field>> out;
  if (std::filesystem::is_directory(path)) {
    for (Variable v : variables) {
      const auto file = path / (std::string(to_string(v)) + ".dgf");
      if (!std::filesystem::exists(file)) throw DataError("variable '" + std::string(to_string(v)) + "' not present in " + path.string());
      out[v] = read_grid_file(file);
    }
  } else {
    out = read_netcdf(path, variables);
  }

  GridPtr grid;
  for (auto& [var, series] : out) {
    for (auto& f : series) {
      if (f.variable != var) throw DataError("file for '" + std::string(to_string(var)) + "' holds another variable");
      if (!grid) grid = f.grid;
      require_same_grid(f, Field(var, std::nullopt, grid), "dataset variables");
      f.grid = grid;
    }
    if (is_constant(var) || series.empty() || !series.front().stamp) continue;
    std::stable_sort(series.begin(), series.end(), [](const Field& a, const Field& b) { return *a.stamp < *b.stamp; });
    if (range) {
      std::erase_if(series, [&](const Field& f) { return !range->contains(*f.stamp); });
      if (series.empty() || !(*series.front().stamp == range->first))
        throw DataError(std::string(to_string(var)) + ": stamp gap, " + range->first.str() + " is absent");
      if (!(*series.back().stamp == range->last))
        throw DataError(std::string(to_string(var)) + ": stamp gap, " + range->last.str() + " is absent");
    }
    require_contiguous(series, to_string(var));
  }
  return out;
}

GridPtr model_grid_for(const GridSpec& data_grid, PoleRow drop) {
  const bool has_both_poles = std::abs(data_grid.lat().front() - 90.0) < 1e-9 &&
                              std::abs(data_grid.lat().back() + 90.0) < 1e-9 && data_grid.n_lat() % 2 == 1;
  if (!has_both_poles || drop == PoleRow::none) return make_grid(data_grid);
  return make_grid(data_grid.without_pole_row(drop));
}

Field to_model_grid(const Field& f, PoleRow drop, const GridPtr& model_grid) {
  if (*f.grid == *model_grid) {
    Field out = f;
    out.grid = model_grid;
    return out;
  }
  if (f.grid->n_lat() != model_grid->n_lat() + 1 || f.grid->n_lon() != model_grid->n_lon())
    throw DataError("cannot map grid " + f.grid->describe() + " onto model grid " + model_grid->describe());
  const std::size_t skip_rows = drop == PoleRow::north ? 1 : 0;
  const std::size_t n_lon = model_grid->n_lon();
  Field out(f.variable, f.stamp, model_grid);
  std::copy_n(f.values.begin() + static_cast<long>(skip_rows * n_lon), model_grid->size(), out.values.begin());
  if (!f.missing.empty()) {
    out.missing.assign(model_grid->size(), 0);
    std::copy_n(f.missing.begin() + static_cast<long>(skip_rows * n_lon), model_grid->size(), out.missing.begin());
  }
  return out;
}

}  // namespace dune::ingest
