// SPDX-License-Identifier: Apache-2.0
#include "dune/grid/field.hpp"

#include <algorithm>
#include <cmath>

#include "dune/common/error.hpp"
#include "dune/grid/climatology.hpp"

namespace dune {

namespace {

struct VarInfo {
  Variable v;
  const char* name;
  const char* units;
};

constexpr VarInfo kVars[] = {
    {Variable::t2m, "t2m", "K"},          {Variable::sst, "sst", "K"},
    {Variable::blended_t, "blended_t", "K"}, {Variable::tisr, "tisr", "J m**-2"},
    {Variable::lsm, "lsm", "1"},          {Variable::slt, "slt", "1"},
    {Variable::orography, "orography", "m"}, {Variable::cvh, "cvh", "1"},
    {Variable::cvl, "cvl", "1"},          {Variable::category, "category", "1"},
};

}  // namespace

std::string_view to_string(Variable v) {
  for (const auto& i : kVars)
    if (i.v == v) return i.name;
  return "?";
}

Variable parse_variable(std::string_view name) {
  for (const auto& i : kVars)
    if (name == i.name) return i.v;
  throw DataError("unknown variable '" + std::string(name) + "'");
}

std::string_view units_of(Variable v) {
  for (const auto& i : kVars)
    if (i.v == v) return i.units;
  return "";
}

bool is_temperature(Variable v) { return v == Variable::t2m || v == Variable::sst || v == Variable::blended_t; }

Field::Field(Variable v, std::optional<Stamp> s, GridPtr g, float fill)
    : variable(v), stamp(s), grid(std::move(g)), values(grid->size(), fill) {}

std::size_t Field::missing_count() const {
  return static_cast<std::size_t>(std::count_if(missing.begin(), missing.end(), [](auto m) { return m != 0; }));
}

void Field::validate() const {
  if (!grid) throw DataError("field has no grid");
  if (values.size() != grid->size()) throw DataError("field size does not match its grid");
  if (!missing.empty() && missing.size() != values.size()) throw DataError("missing mask size does not match field");
  const bool unit_interval = variable == Variable::lsm || variable == Variable::cvh || variable == Variable::cvl;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (is_missing(k)) continue;
    if (!std::isfinite(values[k]))
      throw DataError(std::string(to_string(variable)) + (stamp ? " " + stamp->str() : std::string()) +
                      ": non-finite value at cell " + std::to_string(k));
    if (unit_interval && (values[k] < 0.0f || values[k] > 1.0f))
      throw DataError(std::string(to_string(variable)) + " value outside [0, 1]");
  }
}

void require_same_grid(const Field& a, const Field& b, std::string_view what) {
  if (a.grid == b.grid) return;
  if (!a.grid || !b.grid || !(*a.grid == *b.grid))
    throw DataError("grid mismatch in " + std::string(what) + ": " + (a.grid ? a.grid->describe() : "none") +
                    " vs " + (b.grid ? b.grid->describe() : "none"));
}

Field anomalize(const Field& field, const ClimatologyTable& clim) {
  if (!field.stamp) throw DataError("cannot anomalize an unstamped field");
  const Field& mean = clim.mean_for(*field.stamp);
  require_same_grid(field, mean, "anomalize");
  Field out = field;
  for (std::size_t k = 0; k < out.values.size(); ++k) out.values[k] = field.values[k] - mean.values[k];
  return out;
}

Field deanomalize(const Field& anomaly, const ClimatologyTable& clim) {
  if (!anomaly.stamp) throw DataError("cannot deanomalize an unstamped field");
  const Field& mean = clim.mean_for(*anomaly.stamp);
  require_same_grid(anomaly, mean, "deanomalize");
  Field out = anomaly;
  for (std::size_t k = 0; k < out.values.size(); ++k) out.values[k] = anomaly.values[k] + mean.values[k];
  return out;
}

}  // namespace dune
