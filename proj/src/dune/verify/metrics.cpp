// SPDX-License-Identifier: Apache-2.0
#include "dune/verify/metrics.hpp"

#include <cmath>

#include "dune/common/error.hpp"

namespace dune::verify {

namespace {

void check(std::size_t nf, std::size_t nt, const GridSpec& g, const RegionMask& r) {
  if (nf != g.size() || nt != g.size()) throw DataError("metric inputs do not match the grid size");
  if (r.cells.size() != g.size()) throw DataError("region mask '" + r.name + "' is for a different grid");
}

}  // namespace

double rmse(std::span<const float> f, std::span<const float> t, const GridSpec& g, const RegionMask& r) {
  check(f.size(), t.size(), g, r);
  const auto L = latitude_weights(g);
  double num = 0, den = 0;
  for (std::size_t i = 0; i < g.n_lat(); ++i)
    for (std::size_t k = 0; k < g.n_lon(); ++k) {
      const std::size_t q = i * g.n_lon() + k;
      if (!r.contains(q)) continue;
      const double d = static_cast<double>(f[q]) - static_cast<double>(t[q]);
      num += L[i] * d * d;
      den += L[i];
    }
  if (den <= 0) throw DataError("region '" + r.name + "' has no cells with positive latitude weight");
  return std::sqrt(num / den);
}

double acc(std::span<const float> f, std::span<const float> t, const GridSpec& g, const RegionMask& r) {
  check(f.size(), t.size(), g, r);
  const auto L = latitude_weights(g);
  double ft = 0, ff = 0, tt = 0;
  for (std::size_t i = 0; i < g.n_lat(); ++i)
    for (std::size_t k = 0; k < g.n_lon(); ++k) {
      const std::size_t q = i * g.n_lon() + k;
      if (!r.contains(q)) continue;
      const double a = f[q], b = t[q];
      ft += L[i] * a * b;
      ff += L[i] * a * a;
      tt += L[i] * b * b;
    }
  if (ff == 0 || tt == 0) return 0.0;
  return ft / std::sqrt(ff * tt);
}

Category categorize(double v, double p33, double p66) {
  if (std::isnan(v) || std::isnan(p33) || std::isnan(p66)) return Category::invalid;
  if (v < p33) return Category::below;
  if (v > p66) return Category::above;
  return Category::near;
}

std::vector<Category> categorize_grid(std::span<const float> values, const Field& p33, const Field& p66) {
  if (values.size() != p33.size() || values.size() != p66.size())
    throw DataError("categorize: value grid does not match the percentile grids");
  std::vector<Category> out(values.size());
  for (std::size_t k = 0; k < values.size(); ++k)
    out[k] = (p33.is_missing(k) || p66.is_missing(k)) ? Category::invalid : categorize(values[k], p33.values[k], p66.values[k]);
  return out;
}

Contingency contingency(std::span<const Category> f, std::span<const Category> o, const RegionMask* region) {
  if (f.size() != o.size()) throw DataError("contingency: category grids differ in size");
  if (region && region->cells.size() != f.size()) throw DataError("contingency: region is for a different grid");
  Contingency c;
  for (std::size_t k = 0; k < f.size(); ++k) {
    if (region && !region->contains(k)) continue;
    if (f[k] == Category::invalid || o[k] == Category::invalid) continue;
    const auto fi = static_cast<int>(f[k]), oi = static_cast<int>(o[k]);
    ++c.confusion[oi][fi];
    ++c.total;
    if (fi == oi) ++c.matches;
    const bool obs_event = o[k] != Category::near, fc_event = f[k] != Category::near;
    if (obs_event && fi == oi)
      ++c.hits;
    else if (obs_event)
      ++c.misses;
    else if (fc_event)
      ++c.false_alarms;
    else
      ++c.correct_negatives;
  }
  return c;
}

double hss(const Contingency& c) {
  if (c.total == 0) throw DataError("HSS is undefined with no valid category pairs");
  const long num = 3 * c.matches - c.total;
  const long den = 2 * c.total;
  return 100.0 * static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace dune::verify
