// SPDX-License-Identifier: Apache-2.0
#include "dune/forecast/regrid.hpp"

#include <algorithm>
#include <cmath>

#include "dune/common/error.hpp"

namespace dune::forecast {

namespace {

// Fractional row position of `lat` in a descending latitude axis, clamped.
double row_position(const std::vector<double>& lats, double lat) {
  const std::size_t n = lats.size();
  if (n == 1 || lat >= lats.front()) return 0.0;
  if (lat <= lats.back()) return static_cast<double>(n - 1);
  const auto it = std::lower_bound(lats.begin(), lats.end(), lat, [](double a, double b) { return a > b; });
  const std::size_t hi = static_cast<std::size_t>(it - lats.begin());
  const std::size_t lo = hi - 1;
  return lo + (lats[lo] - lat) / (lats[lo] - lats[hi]);
}

}  // namespace

Field bilinear_regrid(const Field& src, const GridPtr& target) {
  if (!src.missing.empty() && src.missing_count() > 0) throw DataError("bilinear_regrid: source has missing cells");
  const auto& g = *src.grid;
  Field out(src.variable, src.stamp, target);
  const auto& slon = g.lon();
  const std::size_t sn_lon = g.n_lon();
  const double dlon = 360.0 / static_cast<double>(sn_lon);
  std::vector<std::size_t> x0(target->n_lon());
  std::vector<double> fx(target->n_lon());
  for (std::size_t k = 0; k < target->n_lon(); ++k) {
    double pos = (target->lon()[k] - slon.front()) / dlon;
    pos -= std::floor(pos / static_cast<double>(sn_lon)) * static_cast<double>(sn_lon);
    const double fl = std::floor(pos);
    x0[k] = static_cast<std::size_t>(fl) % sn_lon;
    fx[k] = pos - fl;
  }
  for (std::size_t i = 0; i < target->n_lat(); ++i) {
    const double py = row_position(g.lat(), target->lat()[i]);
    const std::size_t y0 = static_cast<std::size_t>(std::floor(py));
    const std::size_t y1 = std::min(y0 + 1, g.n_lat() - 1);
    const double fy = py - static_cast<double>(y0);
    for (std::size_t k = 0; k < target->n_lon(); ++k) {
      const std::size_t xa = x0[k], xb = (x0[k] + 1) % sn_lon;
      const double top = (1 - fx[k]) * src.at(y0, xa) + fx[k] * src.at(y0, xb);
      const double bot = (1 - fx[k]) * src.at(y1, xa) + fx[k] * src.at(y1, xb);
      out.at(i, k) = static_cast<float>((1 - fy) * top + fy * bot);
    }
  }
  return out;
}

Field block_mean(const Field& src, int factor, const GridPtr& coarse) {
  const auto& g = *src.grid;
  const auto f = static_cast<std::size_t>(factor);
  if (factor < 1 || g.n_lat() % f || g.n_lon() % f || coarse->n_lat() * f != g.n_lat() ||
      coarse->n_lon() * f != g.n_lon())
    throw DataError("block_mean: grid " + g.describe() + " does not coarsen by " + std::to_string(factor) + " to " +
                    coarse->describe());
  Field out(src.variable, src.stamp, coarse);
  for (std::size_t i = 0; i < coarse->n_lat(); ++i)
    for (std::size_t k = 0; k < coarse->n_lon(); ++k) {
      double s = 0;
      for (std::size_t a = 0; a < f; ++a)
        for (std::size_t b = 0; b < f; ++b) s += src.at(i * f + a, k * f + b);
      out.at(i, k) = static_cast<float>(s / static_cast<double>(f * f));
    }
  return out;
}

}  // namespace dune::forecast
