// SPDX-License-Identifier: Apache-2.0
#include "dune/verify/score.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "dune/common/error.hpp"
#include "json.hpp"

namespace dune::verify {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string num(double v) {
  if (std::isnan(v)) return "";
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

nlohmann::json json_num(double v) { return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v); }

}  // namespace

AccReference parse_acc_reference(const std::string& text) {
  if (text == "mean_base") return AccReference::mean_base;
  if (text == "test_period") return AccReference::test_period;
  throw UsageError("verify.acc_climatology must be mean_base or test_period, got '" + text + "'");
}

std::vector<Category> categorize_anomaly(const Field& anomaly, const ClimatologyTable& mean_clim,
                                         const ClimatologyTable& pct_clim) {
  const Stamp& s = *anomaly.stamp;
  const Field& mean = mean_clim.mean_for(s);
  const Field& p33 = pct_clim.p33_for(s);
  const Field& p66 = pct_clim.p66_for(s);
  std::vector<Category> out(anomaly.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (anomaly.is_missing(k) || p33.is_missing(k) || p66.is_missing(k) || mean.is_missing(k)) {
      out[k] = Category::invalid;
      continue;
    }
    const float absolute = anomaly.values[k] + mean.values[k];
    out[k] = categorize(absolute, p33.values[k], p66.values[k]);
  }
  return out;
}

Field category_field(const std::vector<Category>& cats, const GridPtr& grid, const Stamp& stamp) {
  if (cats.size() != grid->size()) throw DataError("category grid size does not match the grid");
  Field f(Variable::category, stamp, grid);
  for (std::size_t k = 0; k < cats.size(); ++k)
    f.values[k] = cats[k] == Category::invalid ? std::numeric_limits<float>::quiet_NaN() : static_cast<float>(cats[k]);
  return f;
}

std::vector<Category> categories_from_field(const Field& f) {
  std::vector<Category> out(f.size());
  for (std::size_t k = 0; k < f.size(); ++k) {
    const float v = f.values[k];
    if (f.is_missing(k) || std::isnan(v)) {
      out[k] = Category::invalid;
    } else if (v == 0.0f || v == 1.0f || v == 2.0f) {
      out[k] = static_cast<Category>(static_cast<int>(v));
    } else {
      throw DataError("category grid holds " + std::to_string(v) + "; expected 0 (below), 1 (near), 2 (above)");
    }
  }
  return out;
}

ScoreReport score_run(const std::vector<ForecastSet>& sources, const std::map<Stamp, Field>& truth,
                      const ClimatologyTable& mean_clim, const ClimatologyTable& pct_clim,
                      const std::vector<RegionMask>& regions, AccReference acc_reference) {
  if (sources.empty()) throw UsageError("nothing to score");
  if (regions.empty()) throw UsageError("no regions to score");
  ScoreReport rep;
  for (const auto& r : regions) rep.regions.emplace_back(r.name, r.definition);

  std::set<Stamp> stamps;
  for (const auto& src : sources) {
    std::set<Stamp> mine;
    for (const auto& [s, f] : src.anomaly) mine.insert(s);
    for (const auto& [s, c] : src.categories) mine.insert(s);
    if (mine.empty()) throw DataError("forecast source '" + src.name + "' is empty");
    for (const auto& s : mine)
      if (!truth.count(s)) throw DataError("stamp misalignment: '" + src.name + "' forecasts " + s.str() + " but truth lacks it");
    if (stamps.empty())
      stamps = mine;
    else if (mine != stamps)
      throw DataError("stamp misalignment: '" + src.name + "' covers different periods than '" + sources.front().name + "'");
    rep.sources.push_back(src.name);
  }
  rep.kind = stamps.begin()->kind;

  // Optional ACC reference: per-slot mean of observed absolute values over the scored periods.
  std::map<int, std::vector<double>> test_ref;
  if (acc_reference == AccReference::test_period) {
    std::map<int, int> count;
    for (const auto& s : stamps) {
      const Field& t = truth.at(s);
      const Field& m = mean_clim.mean_for(s);
      auto& acc_v = test_ref[s.slot_index()];
      acc_v.resize(t.size(), 0.0);
      for (std::size_t k = 0; k < t.size(); ++k) acc_v[k] += static_cast<double>(t.values[k]) + m.values[k];
      ++count[s.slot_index()];
    }
    for (auto& [slot, v] : test_ref)
      for (auto& x : v) x /= count[slot];
  }

  std::map<Stamp, std::vector<Category>> truth_cats;
  for (const auto& s : stamps) truth_cats[s] = categorize_anomaly(truth.at(s), mean_clim, pct_clim);

  for (const auto& src : sources) {
    for (const auto& region : regions) {
      std::vector<ScoreRow> per;
      for (const auto& s : stamps) {
        const Field& t = truth.at(s);
        ScoreRow row;
        row.source = src.name;
        row.region = region.name;
        row.stamp = s.str();
        if (auto it = src.lead.find(s); it != src.lead.end()) row.lead = it->second;
        std::vector<Category> fc_cats;
        if (auto it = src.anomaly.find(s); it != src.anomaly.end()) {
          const Field& f = it->second;
          require_same_grid(f, t, "forecast vs truth");
          row.rmse = rmse(f.values, t.values, *t.grid, region);
          if (acc_reference == AccReference::mean_base) {
            row.acc = acc(f.values, t.values, *t.grid, region);
          } else {
            const auto& ref = test_ref.at(s.slot_index());
            const Field& m = mean_clim.mean_for(s);
            std::vector<float> fa(f.size()), ta(f.size());
            for (std::size_t k = 0; k < f.size(); ++k) {
              fa[k] = static_cast<float>(f.values[k] + m.values[k] - ref[k]);
              ta[k] = static_cast<float>(t.values[k] + m.values[k] - ref[k]);
            }
            row.acc = acc(fa, ta, *t.grid, region);
          }
          fc_cats = categorize_anomaly(f, mean_clim, pct_clim);
        } else {
          row.rmse = row.acc = kNaN;
          fc_cats = src.categories.at(s);
          if (fc_cats.size() != t.size()) throw DataError("category grid for " + s.str() + " has the wrong size");
        }
        row.counts = contingency(fc_cats, truth_cats.at(s), &region);
        row.hss = row.counts.total > 0 ? hss(row.counts) : kNaN;
        per.push_back(row);
      }
      ScoreRow agg;
      agg.source = src.name;
      agg.region = region.name;
      agg.stamp = "mean";
      agg.lead = 0;
      agg.samples = static_cast<long>(per.size());
      double sr = 0, sa = 0, sh = 0;
      long nh = 0;
      for (const auto& r : per) {
        sr += r.rmse;
        sa += r.acc;
        if (!std::isnan(r.hss)) {
          sh += r.hss;
          ++nh;
        }
        agg.counts.hits += r.counts.hits;
        agg.counts.misses += r.counts.misses;
        agg.counts.false_alarms += r.counts.false_alarms;
        agg.counts.correct_negatives += r.counts.correct_negatives;
        agg.counts.matches += r.counts.matches;
        agg.counts.total += r.counts.total;
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b) agg.counts.confusion[a][b] += r.counts.confusion[a][b];
      }
      agg.rmse = sr / static_cast<double>(per.size());
      agg.acc = sa / static_cast<double>(per.size());
      agg.hss = nh ? sh / static_cast<double>(nh) : kNaN;
      // With equal per-stamp totals the mean of the scores equals the score
      // of the pooled counts, which avoids summation noise around zero.
      const bool equal_totals = std::all_of(per.begin(), per.end(), [&](const ScoreRow& r) {
        return r.counts.total == per.front().counts.total && !std::isnan(r.hss);
      });
      if (nh && equal_totals) agg.hss = hss(agg.counts);
      rep.rows.insert(rep.rows.end(), per.begin(), per.end());
      rep.rows.push_back(agg);
    }
  }
  return rep;
}

const ScoreRow& ScoreReport::aggregate(const std::string& source, const std::string& region) const {
  for (const auto& r : rows)
    if (r.stamp == "mean" && r.source == source && r.region == region) return r;
  throw UsageError("report has no aggregate for source '" + source + "' in region '" + region + "'");
}

std::string ScoreReport::to_csv() const {
  std::ostringstream os;
  os << "source,region,stamp,lead,rmse,acc,hss,samples,H,M,F,C,T\n";
  for (const auto& r : rows)
    os << r.source << ',' << r.region << ',' << r.stamp << ',' << r.lead << ',' << num(r.rmse) << ',' << num(r.acc)
       << ',' << num(r.hss) << ',' << r.samples << ',' << r.counts.hits << ',' << r.counts.misses << ','
       << r.counts.false_alarms << ',' << r.counts.correct_negatives << ',' << r.counts.total << '\n';
  return os.str();
}

std::string ScoreReport::to_json() const {
  nlohmann::json j;
  j["kind"] = to_string(kind);
  j["sources"] = sources;
  auto regs = nlohmann::json::array();
  for (const auto& [n, d] : regions) regs.push_back({{"name", n}, {"definition", d}});
  j["regions"] = regs;
  auto agg = nlohmann::json::array();
  auto per = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json o = {{"source", r.source}, {"region", r.region}, {"stamp", r.stamp},      {"lead", r.lead},
                        {"rmse", json_num(r.rmse)}, {"acc", json_num(r.acc)}, {"hss", json_num(r.hss)},
                        {"samples", r.samples},
                        {"contingency",
                         {{"H", r.counts.hits},
                          {"M", r.counts.misses},
                          {"F", r.counts.false_alarms},
                          {"C", r.counts.correct_negatives},
                          {"T", r.counts.total},
                          {"matches", r.counts.matches},
                          {"confusion", r.counts.confusion}}}};
    (r.stamp == "mean" ? agg : per).push_back(o);
  }
  j["aggregate"] = agg;
  j["per_stamp"] = per;
  return j.dump(2);
}

std::string ScoreReport::wide_table() const {
  std::ostringstream os;
  os << "method";
  for (const auto& [n, d] : regions) os << ',' << n << "_rmse," << n << "_acc," << n << "_hss";
  os << '\n';
  for (const auto& s : sources) {
    os << s;
    for (const auto& [n, d] : regions) {
      const auto& a = aggregate(s, n);
      os << ',' << num(a.rmse) << ',' << num(a.acc) << ',' << num(a.hss);
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace dune::verify
