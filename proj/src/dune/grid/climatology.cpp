// SPDX-License-Identifier: Apache-2.0
#include "dune/grid/climatology.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "dune/common/error.hpp"
#include "dune/common/hash.hpp"

namespace dune {

ClimatologyTable::ClimatologyTable(PeriodKind kind, int first_year, int last_year, std::vector<Field> mean,
                                   std::vector<Field> p33, std::vector<Field> p66)
    : kind_(kind), first_year_(first_year), last_year_(last_year), mean_(std::move(mean)), p33_(std::move(p33)),
      p66_(std::move(p66)) {
  const auto n = static_cast<std::size_t>(slots_per_year(kind_));
  if (mean_.size() != n) throw DataError("climatology needs one mean grid per slot");
  if (!p33_.empty() && (p33_.size() != n || p66_.size() != n)) throw DataError("climatology percentile slots incomplete");
}

std::size_t ClimatologyTable::slot_of(const Stamp& s) const {
  if (s.kind != kind_)
    throw DataError("climatology is " + std::string(to_string(kind_)) + " but stamp " + s.str() + " is " +
                    std::string(to_string(s.kind)));
  return static_cast<std::size_t>(s.slot_index());
}

const Field& ClimatologyTable::mean_for(const Stamp& s) const { return mean_[slot_of(s)]; }

const Field& ClimatologyTable::p33_for(const Stamp& s) const {
  if (!has_percentiles()) throw DataError("climatology table has no percentiles");
  return p33_[slot_of(s)];
}

const Field& ClimatologyTable::p66_for(const Stamp& s) const {
  if (!has_percentiles()) throw DataError("climatology table has no percentiles");
  return p66_[slot_of(s)];
}

double percentile_linear(std::span<const double> samples, double q) {
  if (samples.empty()) throw DataError("percentile of an empty sample");
  std::vector<double> x(samples.begin(), samples.end());
  std::sort(x.begin(), x.end());
  const double h = static_cast<double>(x.size() - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, x.size() - 1);
  return x[lo] + (h - static_cast<double>(lo)) * (x[hi] - x[lo]);
}

ClimatologyTable build_climatology(std::span<const Field> fields, int first_year, int last_year,
                                   bool with_percentiles) {
  if (fields.empty()) throw DataError("no fields given for climatology");
  if (last_year < first_year) throw UsageError("climatology base period is reversed");
  const PeriodKind kind = fields.front().stamp ? fields.front().stamp->kind : PeriodKind::monthly;
  const GridPtr grid = fields.front().grid;

  std::map<long, const Field*> by_ordinal;
  for (const auto& f : fields) {
    if (!f.stamp) throw DataError("climatology input field has no stamp");
    if (f.stamp->kind != kind) throw DataError("climatology inputs mix period kinds");
    require_same_grid(f, fields.front(), "climatology inputs");
    if (f.stamp->year < first_year || f.stamp->year > last_year) continue;
    if (!by_ordinal.emplace(f.stamp->ordinal(), &f).second)
      throw DataError("duplicate stamp " + f.stamp->str() + " in climatology inputs");
  }

  const int slots = slots_per_year(kind);
  const auto n_years = static_cast<std::size_t>(last_year - first_year + 1);
  std::vector<std::vector<const Field*>> per_slot(slots);
  for (int y = first_year; y <= last_year; ++y) {
    for (int s = 0; s < slots; ++s) {
      const Stamp st = Stamp::from_ordinal(kind, Stamp{kind, y, kind == PeriodKind::monthly ? 1 : 0}.ordinal() + s);
      auto it = by_ordinal.find(st.ordinal());
      if (it == by_ordinal.end()) throw DataError("climatology base period is missing " + st.str());
      per_slot[s].push_back(it->second);
    }
  }

  const std::size_t cells = grid->size();
  std::vector<Field> mean, p33, p66;
  std::vector<double> sample;
  sample.reserve(n_years);
  for (int s = 0; s < slots; ++s) {
    const Stamp slot_stamp = Stamp::from_ordinal(kind, Stamp{kind, first_year, kind == PeriodKind::monthly ? 1 : 0}.ordinal() + s);
    Field m(fields.front().variable, slot_stamp, grid);
    Field lo = m, hi = m;
    for (std::size_t k = 0; k < cells; ++k) {
      sample.clear();
      double acc = 0.0;
      for (std::size_t y = 0; y < n_years; ++y) {
        if (per_slot[s][y]->is_missing(k)) continue;
        sample.push_back(per_slot[s][y]->values[k]);
        acc += sample.back();
      }
      if (sample.empty()) {
        // Cell never observed in the base period (e.g. SST over land).
        for (Field* f : {&m, &lo, &hi}) {
          if (f->missing.empty()) f->missing.assign(cells, 0);
          f->missing[k] = 1;
          f->values[k] = std::numeric_limits<float>::quiet_NaN();
        }
        continue;
      }
      m.values[k] = static_cast<float>(acc / static_cast<double>(sample.size()));
      if (with_percentiles) {
        lo.values[k] = static_cast<float>(percentile_linear(sample, 0.33));
        hi.values[k] = static_cast<float>(percentile_linear(sample, 0.66));
      }
    }
    mean.push_back(std::move(m));
    if (with_percentiles) {
      p33.push_back(std::move(lo));
      p66.push_back(std::move(hi));
    }
  }
  return ClimatologyTable(kind, first_year, last_year, std::move(mean), std::move(p33), std::move(p66));
}

std::string climatology_hash(const ClimatologyTable& clim) {
  std::string head = std::string(to_string(clim.kind())) + ":" + std::to_string(clim.first_year()) + ":" +
                     std::to_string(clim.last_year());
  auto h = fnv1a(head);
  for (const auto& f : clim.means())
    h = fnv1a(std::string_view(reinterpret_cast<const char*>(f.values.data()), f.values.size() * sizeof(float)), h);
  return hex64(h);
}

}  // namespace dune
