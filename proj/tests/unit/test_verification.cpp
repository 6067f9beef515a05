// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "dune/app/plot.hpp"
#include "dune/common/error.hpp"
#include "dune/grid/climatology.hpp"
#include "dune/ingest/synthetic.hpp"
#include "dune/verify/metrics.hpp"
#include "dune/verify/regions.hpp"
#include "dune/verify/score.hpp"
#include "helpers.hpp"

using namespace dune;
using namespace dune::verify;

namespace {

std::vector<double> cos_lat(const GridSpec& g) {
  std::vector<double> w;
  for (double lat : g.lat()) w.push_back(std::max(0.0, std::cos(lat * std::numbers::pi / 180)));
  return w;
}

RegionMask box_mask(const GridPtr& g, double lat0, double lat1) {
  RegionMask m{"box", "box", g, std::vector<std::uint8_t>(g->size(), 0)};
  for (std::size_t i = 0; i < g->n_lat(); ++i)
    if (g->lat()[i] >= lat0 && g->lat()[i] <= lat1)
      for (std::size_t j = 0; j < g->n_lon(); ++j) m.cells[i * g->n_lon() + j] = 1;
  return m;
}

Contingency with_matches(long matches, long total) {
  Contingency c;
  c.matches = matches;
  c.total = total;
  return c;
}

}  // namespace

TEST_CASE("weighted RMSE and ACC against loop oracles") {
  const auto g = testutil::grid(8, 16);
  std::mt19937_64 rng(4);
  const Field f = testutil::random_field(g, Stamp::month(2000, 1), rng);
  const Field t = testutil::random_field(g, Stamp::month(2000, 1), rng);
  const auto w = cos_lat(*g);
  for (const auto& mask : {RegionMask::everywhere(g), box_mask(g, -30, 50)}) {
    long double se = 0, sw = 0, ft = 0, ff = 0, tt = 0;
    for (std::size_t i = 0; i < 8; ++i)
      for (std::size_t j = 0; j < 16; ++j) {
        if (!mask.contains(i * 16 + j)) continue;
        const long double a = f.at(i, j), b = t.at(i, j);
        se += w[i] * (a - b) * (a - b);
        sw += w[i];
        ft += w[i] * a * b;
        ff += w[i] * a * a;
        tt += w[i] * b * b;
      }
    const double r_oracle = static_cast<double>(std::sqrt(se / sw));
    const double a_oracle = static_cast<double>(ft / std::sqrt(ff * tt));
    CHECK(testutil::rel_err(rmse(f.values, t.values, *g, mask), r_oracle) < 1e-12);
    CHECK(testutil::rel_err(acc(f.values, t.values, *g, mask), a_oracle) < 1e-12);
  }
}

TEST_CASE("ACC limits") {
  const auto g = testutil::grid(4, 8);
  std::mt19937_64 rng(5);
  const Field t = testutil::random_field(g, Stamp::month(2000, 1), rng);
  Field neg = t;
  for (auto& v : neg.values) v = -v;
  const Field zero = testutil::field(g, Stamp::month(2000, 1));
  const auto m = RegionMask::everywhere(g);
  CHECK(acc(t.values, t.values, *g, m) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(acc(neg.values, t.values, *g, m) == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(acc(zero.values, t.values, *g, m) == 0.0);
  CHECK(rmse(t.values, t.values, *g, m) == 0.0);
  std::vector<float> short_v(3);
  CHECK_THROWS_AS(rmse(short_v, t.values, *g, m), DataError);
}

TEST_CASE("tercile categories") {
  CHECK(categorize(0.9, 1.0, 2.0) == Category::below);
  CHECK(categorize(1.0, 1.0, 2.0) == Category::near);
  CHECK(categorize(2.0, 1.0, 2.0) == Category::near);
  CHECK(categorize(2.1, 1.0, 2.0) == Category::above);
  CHECK(categorize(NAN, 1.0, 2.0) == Category::invalid);
  CHECK(categorize(1.5, NAN, 2.0) == Category::invalid);
}

TEST_CASE("HSS") {
  CHECK(hss(with_matches(90, 90)) == 100.0);
  CHECK(hss(with_matches(0, 90)) == -50.0);
  CHECK(hss(with_matches(30, 90)) == 0.0);
  CHECK_THROWS_AS(hss(with_matches(0, 0)), DataError);

  using C = Category;
  const std::vector<C> obs{C::above, C::above, C::below, C::near, C::near, C::near, C::invalid};
  const std::vector<C> fc{C::above, C::below, C::below, C::near, C::above, C::near, C::near};
  const auto c = contingency(fc, obs);
  CHECK(c.total == 6);
  CHECK(c.matches == 4);
  CHECK(c.hits == 2);
  CHECK(c.misses == 1);
  CHECK(c.false_alarms == 1);
  CHECK(c.correct_negatives == 2);
  CHECK(c.confusion[2][0] == 1);
  CHECK(hss(c) == doctest::Approx(100.0 * (12 - 6) / 12));
}

TEST_CASE("regions") {
  const auto g = testutil::grid(8, 16);
  Field lsm(Variable::lsm, std::nullopt, g);
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 8; ++j) lsm.at(i, j) = 1.0f;  // land on the eastern half
  const auto d = RegionDef::parse("atl", "-30:30:300:60:ocean");
  CHECK(d.lon_min == 300);
  const auto m = build_mask(d, lsm, 0.5);
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 16; ++j) {
      const double lat = g->lat()[i], lon = g->lon()[j];
      const bool expect = lat >= -30 && lat <= 30 && (lon >= 300 || lon <= 60) && j >= 8;
      CHECK(m.contains(i * 16 + j) == expect);
    }
  CHECK(m.count() > 0);
  CHECK(build_mask(builtin_region("global_land"), lsm, 0.5).count() == 64);
  CHECK_THROWS_AS(build_mask(RegionDef::parse("tiny", "1:2:300:60:all"), lsm, 0.5), DataError);
  CHECK_THROWS_AS(RegionDef::parse("x", "0:1:2:3:sea"), UsageError);
  CHECK_THROWS_AS(RegionDef::parse("x", "0:1:2"), UsageError);
  CHECK_THROWS_AS(builtin_region("mars"), UsageError);
}

TEST_CASE("category grids round trip") {
  const auto g = testutil::grid(2, 4);
  using C = Category;
  const std::vector<C> cats{C::below, C::near, C::above, C::invalid, C::near, C::near, C::below, C::above};
  const auto f = category_field(cats, g, Stamp::month(2001, 1));
  CHECK(categories_from_field(f) == cats);
  Field bad = f;
  bad.values[0] = 3.0f;
  CHECK_THROWS_AS(categories_from_field(bad), DataError);
}

TEST_CASE("scoring a run") {
  ingest::SyntheticOptions o;
  o.n_lat = 8;
  o.n_lon = 16;
  o.years = 15;
  o.last_year = 2023;
  const auto corpus = ingest::generate_synthetic_corpus(o);
  const auto clim = build_climatology(corpus.t2m, 2009, 2018, true);
  std::map<Stamp, Field> truth;
  for (const auto& f : corpus.t2m)
    if (f.stamp->year >= 2019) truth.emplace(*f.stamp, anomalize(f, clim));
  REQUIRE(truth.size() == 60);

  ForecastSet perfect{"perfect", truth, {}, {}};
  ForecastSet zero{"climatology", {}, {}, {}};
  for (const auto& [s, f] : truth) zero.anomaly.emplace(s, testutil::field(f.grid, s));
  const auto g = truth.begin()->second.grid;
  const std::vector<RegionMask> regions{RegionMask::everywhere(g), build_mask(builtin_region("global_land"), corpus.constants.lsm, 0.5)};
  const auto rep = score_run({perfect, zero}, truth, clim, clim, regions);

  CHECK(rep.rows.size() == 2 * 2 * 61);
  const auto& p = rep.aggregate("perfect", "global");
  CHECK(p.rmse == 0.0);
  CHECK(p.acc == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(p.hss == 100.0);
  CHECK(p.samples == 60);
  const auto& z = rep.aggregate("climatology", "global");
  CHECK(z.acc == 0.0);
  CHECK(z.rmse > 0);
  CHECK(z.hss < 0);  // the warming test years fall outside the base-period middle tercile
  CHECK_THROWS_AS(rep.aggregate("nobody", "global"), UsageError);

  const auto csv = rep.to_csv();
  CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(rep.rows.size()) + 1);
  CHECK(csv.rfind("source,region,stamp,lead,rmse,acc,hss", 0) == 0);
  const auto table = rep.wide_table();
  CHECK(table.find("method,global_rmse,global_acc,global_hss,global_land_rmse") == 0);

  SUBCASE("category-only sources get HSS alone") {
    ForecastSet cats{"external", {}, {}, {}};
    for (const auto& [s, f] : truth) cats.categories.emplace(s, categorize_anomaly(f, clim, clim));
    const auto r2 = score_run({cats}, truth, clim, clim, {regions[0]});
    const auto& a = r2.aggregate("external", "global");
    CHECK(std::isnan(a.rmse));
    CHECK(a.hss == 100.0);
  }
  SUBCASE("misaligned stamps are rejected") {
    ForecastSet shortened = perfect;
    shortened.anomaly.erase(shortened.anomaly.begin());
    CHECK_THROWS_WITH_AS(score_run({perfect, shortened}, truth, clim, clim, regions),
                         doctest::Contains("misalignment"), DataError);
  }
}

TEST_CASE("plot helpers") {
  using namespace dune::app::plot;
  std::vector<Panel> panels;
  for (const char* name : {"rmse", "acc", "hss"}) panels.push_back({name, {{"dune", {1, 2, 3}, {0.5, NAN, 0.7}}}});
  const auto svg = line_panels("scores", "lead", "value", panels);
  std::size_t count = 0;
  for (auto pos = svg.find("<g class=\"panel\""); pos != std::string::npos; pos = svg.find("<g class=\"panel\"", pos + 1))
    ++count;
  CHECK(count == 3);
  CHECK(svg.rfind("<svg", 0) == 0);

  const auto g = testutil::grid(6, 12);
  const Field c = testutil::field(g, Stamp::month(2000, 1), 3.25f);
  CHECK(cosine_weighted_mean(c) == doctest::Approx(3.25).epsilon(1e-14));
  const auto map = field_map("t", "caption", c);
  CHECK(map.find("</svg>") != std::string::npos);
}
