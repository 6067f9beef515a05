// SPDX-License-Identifier: Apache-2.0
#include <bit>
#include <fstream>
#include <iterator>
#include <random>

#include "doctest.h"
#include "dune/common/config.hpp"
#include "dune/common/error.hpp"
#include "dune/grid/climatology.hpp"
#include "dune/ingest/blend.hpp"
#include "dune/ingest/dataset.hpp"
#include "dune/ingest/grid_file.hpp"
#include "dune/ingest/input_stack.hpp"
#include "dune/ingest/splits.hpp"
#include "dune/ingest/synthetic.hpp"
#include "helpers.hpp"

using namespace dune;
using namespace dune::ingest;

namespace {

SyntheticOptions small_corpus(std::uint64_t seed = 7, double noise = 1.0) {
  SyntheticOptions o;
  o.n_lat = 8;
  o.n_lon = 16;
  o.years = 12;
  o.last_year = 1991;
  o.seed = seed;
  o.noise_scale = noise;
  return o;
}

}  // namespace

TEST_CASE("grid file round trip is bit identical, including missing cells") {
  const auto dir = testutil::temp_dir("gridfile");
  const auto c = generate_synthetic_corpus(small_corpus());
  write_grid_file(dir / "sst.dgf", c.sst);
  const auto back = read_grid_file(dir / "sst.dgf");
  REQUIRE(back.size() == c.sst.size());
  for (std::size_t t = 0; t < back.size(); ++t) {
    CHECK(*back[t].stamp == *c.sst[t].stamp);
    CHECK(*back[t].grid == *c.sst[t].grid);
    CHECK(back[t].missing == c.sst[t].missing);
    for (std::size_t k = 0; k < back[t].size(); ++k)
      if (!back[t].is_missing(k)) CHECK(std::bit_cast<std::uint32_t>(back[t].values[k]) ==
                                        std::bit_cast<std::uint32_t>(c.sst[t].values[k]));
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("corrupt and truncated grid files raise data errors") {
  const auto dir = testutil::temp_dir("gridfile_bad");
  const auto c = generate_synthetic_corpus(small_corpus());
  write_grid_file(dir / "t2m.dgf", std::span(c.t2m).first(3));
  std::string bytes;
  {
    std::ifstream in(dir / "t2m.dgf", std::ios::binary);
    bytes.assign(std::istreambuf_iterator<char>(in), {});
  }
  write_file_atomic(dir / "cut.dgf", bytes.substr(0, bytes.size() - 5));
  CHECK_THROWS_AS(read_grid_file(dir / "cut.dgf"), DataError);
  write_file_atomic(dir / "junk.dgf", "not a grid file at all");
  CHECK_THROWS_AS(read_grid_file(dir / "junk.dgf"), DataError);
  CHECK_THROWS_AS(read_grid_file(dir / "absent.dgf"), DataError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("dataset reader returns requested months in order") {
  const auto dir = testutil::temp_dir("dataset");
  const auto c = generate_synthetic_corpus(small_corpus());
  write_grid_file(dir / "t2m.dgf", c.t2m);
  write_grid_file(dir / "lsm.dgf", std::span(&c.constants.lsm, 1));
  const Variable want[] = {Variable::t2m, Variable::lsm};
  const auto got = read_monthly_dataset(dir, want, StampRange::parse("1981-01:1981-12"));
  const auto& t = got.at(Variable::t2m);
  REQUIRE(t.size() == 12);
  for (int m = 0; m < 12; ++m) CHECK(*t[m].stamp == Stamp::month(1981, m + 1));
  CHECK(got.at(Variable::lsm).size() == 1);
  CHECK_FALSE(got.at(Variable::lsm).front().stamp.has_value());

  CHECK_THROWS_AS(parse_variable("q"), DataError);
  const Variable sst[] = {Variable::sst};
  CHECK_THROWS_WITH_AS(read_monthly_dataset(dir, sst, std::nullopt), doctest::Contains("not present"), DataError);
  CHECK_THROWS_WITH_AS(read_monthly_dataset(dir, std::span(want, 1), StampRange::parse("1979-06:1980-03")),
                       doctest::Contains("1979-06"), DataError);

  // A hole inside the series.
  std::vector<Field> holed(c.t2m.begin(), c.t2m.end());
  holed.erase(holed.begin() + 30);
  write_grid_file(dir / "t2m.dgf", holed);
  CHECK_THROWS_WITH_AS(read_monthly_dataset(dir, std::span(want, 1), std::nullopt),
                       doctest::Contains(c.t2m[30].stamp->str().c_str()), DataError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("blend selects T2m over land and SST over sea") {
  std::mt19937_64 rng(21);
  const auto g = testutil::grid(8, 16);
  const Stamp s = Stamp::month(1990, 5);
  const Field t2m = testutil::random_field(g, s, rng, 250, 300, Variable::t2m);
  Field sst = testutil::random_field(g, s, rng, 270, 305, Variable::sst);

  SUBCASE("all land") {
    const Field lsm(Variable::lsm, std::nullopt, g, 1.0f);
    const auto r = blend_sst_t2m(t2m, sst, lsm, 0.5);
    CHECK(r.field.values == t2m.values);
    CHECK(r.fallback_count == 0);
  }
  SUBCASE("all sea") {
    const Field lsm(Variable::lsm, std::nullopt, g, 0.0f);
    CHECK(blend_sst_t2m(t2m, sst, lsm, 0.5).field.values == sst.values);
  }
  SUBCASE("checkerboard against a per-point select") {
    Field lsm(Variable::lsm, std::nullopt, g, 0.0f);
    for (std::size_t i = 0; i < g->n_lat(); ++i)
      for (std::size_t j = 0; j < g->n_lon(); ++j) lsm.at(i, j) = float((i + j) % 2);
    sst.missing.assign(sst.size(), 0);
    sst.missing[2] = 1;  // sea cell with no SST
    sst.missing[5] = 1;  // land cell, irrelevant
    const auto r = blend_sst_t2m(t2m, sst, lsm, 0.5);
    std::size_t fallback = 0;
    for (std::size_t k = 0; k < g->size(); ++k) {
      const bool land = lsm.values[k] >= 0.5f;
      float expect;
      if (land) {
        expect = t2m.values[k];
      } else if (sst.is_missing(k)) {
        expect = t2m.values[k];
        ++fallback;
      } else {
        expect = sst.values[k];
      }
      CHECK(r.field.values[k] == expect);
    }
    CHECK(r.fallback_count == fallback);
    CHECK(r.field.variable == Variable::blended_t);
    CHECK(r.field.missing_count() == 0);
  }
}

TEST_CASE("synthetic corpus is deterministic and sized") {
  const auto a = generate_synthetic_corpus(small_corpus(3));
  const auto b = generate_synthetic_corpus(small_corpus(3));
  const auto c = generate_synthetic_corpus(small_corpus(4));
  REQUIRE(a.t2m.size() == 144);
  bool differs = false;
  for (std::size_t t = 0; t < a.t2m.size(); ++t) {
    CHECK(a.t2m[t].values == b.t2m[t].values);
    differs = differs || a.t2m[t].values != c.t2m[t].values;
  }
  CHECK(differs);
  CHECK(a.constants.tisr_cycle.size() == 12);

  SyntheticOptions full;
  full.noise_scale = 0;
  const auto big = generate_synthetic_corpus(full);
  CHECK(big.t2m.size() == 504);
  CHECK(big.t2m.front().grid->n_lat() == 32);
  CHECK(big.t2m.front().grid->n_lon() == 64);
  CHECK(*big.t2m.front().stamp == Stamp::month(1982, 1));
  CHECK(*big.t2m.back().stamp == Stamp::month(2023, 12));
}

TEST_CASE("noise-free corpus: anomalies are the linear trend") {
  auto opt = small_corpus(1, 0.0);
  opt.trend_per_year = 0.03;
  const auto c = generate_synthetic_corpus(opt);
  const int y0 = 1982, y1 = 1989;
  const auto clim = build_climatology(c.t2m, y0, y1, false);
  const double mean_year = (y0 + y1) / 2.0;
  double worst = 0;
  for (const auto& f : c.t2m) {
    const auto a = anomalize(f, clim);
    const double expect = opt.trend_per_year * (f.stamp->year - mean_year);
    for (float v : a.values) worst = std::max(worst, std::abs(v - expect));
  }
  // float32 storage of ~300 K values limits this to a few ulp of 300.
  CHECK(worst < 1e-4);
}

TEST_CASE("input stack channel counts and order") {
  const auto g = testutil::grid(8, 16);
  const std::pair<int, int> table[] = {{1, 7}, {2, 9}, {3, 11}, {4, 13}, {6, 17}, {12, 29}};
  const auto c = generate_synthetic_corpus(small_corpus());
  std::vector<Field> k;
  for (const Field* f : c.constants.ordered()) k.push_back(*f);
  for (auto [w, channels] : table) {
    CHECK(input_channels_for(w) == channels);
    std::vector<Field> an, ti;
    for (int i = 0; i < w; ++i) {
      an.push_back(testutil::field(g, Stamp::month(1985, 1).next(i), float(i)));
      ti.push_back(c.constants.tisr_cycle[i % 12]);
    }
    const auto st = assemble_input_stack(an, ti, k, *g);
    CHECK(st.channels() == channels);
    CHECK(st.channel(0)[0] == 0.0f);
    CHECK(st.channel(w - 1)[0] == float(w - 1));
    CHECK(st.channel_names.back() == "cvl");
    CHECK(std::equal(st.channel(2 * w).begin(), st.channel(2 * w).end(), c.constants.lsm.values.begin()));
  }
  std::vector<Field> an(5, testutil::field(g, Stamp::month(1985, 1)));
  CHECK_THROWS_AS(assemble_input_stack(an, an, k, *g), UsageError);
}

TEST_CASE("split counts on the 1980-2023 calendar") {
  const auto plan = SplitPlan::from_config(Config::defaults());
  const auto months = count_periods(plan, PeriodKind::monthly);
  CHECK(months.train == 444);
  CHECK(months.val == 24);
  CHECK(months.test == 60);
  const auto years = count_periods(plan, PeriodKind::annual);
  CHECK(years.train == 37);
  CHECK(years.val == 2);
  CHECK(years.test == 5);
  const auto seasons = count_pairs(plan, PeriodKind::seasonal);
  CHECK(seasons.val == 6);
  CHECK(seasons.test == 18);
  // Consecutive-season pairs inside 1980-01..2016-12: the first complete
  // season is MAM 1980, so pairs run from (MAM, JJA) 1980 to (JJA, SON)
  // 2016, which is 147 seasons minus one.
  CHECK(seasons.train == 146);

  CHECK(plan.split_of(Stamp::month(2017, 1)) == Split::val);
  CHECK_FALSE(plan.split_of(Stamp::month(1975, 1)).has_value());
  Config bad = Config::defaults();
  bad.set("split.val", "2016-06:2018-12");
  CHECK_THROWS_AS(SplitPlan::from_config(bad), UsageError);
}

TEST_CASE("model grid mapping drops one pole row of an ERA5-style grid") {
  std::vector<double> lat, lon;
  for (int i = 0; i <= 8; ++i) lat.push_back(90.0 - 22.5 * i);
  for (int j = 0; j < 16; ++j) lon.push_back(22.5 * j);
  const auto data = make_grid(GridSpec(lat, lon));
  const auto model = model_grid_for(*data, PoleRow::south);
  CHECK(model->n_lat() == 8);
  CHECK(model->lat().front() == 90.0);
  Field f(Variable::t2m, Stamp::month(2000, 1), data);
  for (std::size_t k = 0; k < f.size(); ++k) f.values[k] = float(k);
  const auto m = to_model_grid(f, PoleRow::south, model);
  CHECK(m.values.front() == 0.0f);
  CHECK(m.values.back() == float(8 * 16 - 1));
  const auto north = model_grid_for(*data, PoleRow::north);
  CHECK(to_model_grid(f, PoleRow::north, north).values.front() == 16.0f);
}
