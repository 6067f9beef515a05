// SPDX-License-Identifier: Apache-2.0
#include "dune/forecast/aggregate.hpp"

#include <map>

#include "dune/common/error.hpp"
#include "dune/ingest/dataset.hpp"

namespace dune::forecast {

namespace {

Field mean_of(std::span<const Field* const> parts, Variable v, std::optional<Stamp> stamp) {
  Field out(v, stamp, parts.front()->grid);
  std::vector<double> acc(out.size(), 0.0);
  bool any_missing = false;
  for (const Field* f : parts) {
    require_same_grid(*parts.front(), *f, "aggregation");
    any_missing = any_missing || !f->missing.empty();
    for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += f->values[k];
  }
  for (std::size_t k = 0; k < acc.size(); ++k) out.values[k] = static_cast<float>(acc[k] / parts.size());
  if (any_missing) {
    out.missing.assign(out.size(), 0);
    for (const Field* f : parts)
      for (std::size_t k = 0; k < out.size(); ++k)
        if (f->is_missing(k)) out.missing[k] = 1;
  }
  return out;
}

}  // namespace

std::vector<Field> aggregate_periods(std::span<const Field> months, PeriodKind kind, bool strict) {
  if (months.empty()) return {};
  for (const auto& f : months)
    if (!f.stamp || f.stamp->kind != PeriodKind::monthly) throw DataError("aggregation needs monthly fields");
  if (kind == PeriodKind::monthly) return {months.begin(), months.end()};
  ingest::require_contiguous(months, "aggregation input");

  std::map<Stamp, std::vector<const Field*>> groups;
  for (const auto& f : months) groups[f.stamp->containing(kind)].push_back(&f);
  const std::size_t need = kind == PeriodKind::seasonal ? 3 : 12;
  std::vector<Field> out;
  for (const auto& [period, members] : groups) {
    if (members.size() != need) {
      if (strict) throw DataError("incomplete " + std::string(to_string(kind)) + " period " + period.str());
      continue;
    }
    out.push_back(mean_of(members, months.front().variable, period));
  }
  return out;
}

std::vector<Field> cycle_for_kind(std::span<const Field> cycle, PeriodKind kind) {
  if (cycle.size() != 12) throw DataError("a calendar cycle needs 12 monthly fields");
  if (kind == PeriodKind::monthly) return {cycle.begin(), cycle.end()};
  std::vector<Field> out;
  const int slots = slots_per_year(kind);
  for (int s = 0; s < slots; ++s) {
    const Stamp p = kind == PeriodKind::seasonal ? Stamp::season(2001, s) : Stamp::annual(2001);
    std::vector<const Field*> parts;
    for (const auto& m : p.months()) parts.push_back(&cycle[static_cast<std::size_t>(m.slot - 1)]);
    Field f = mean_of(parts, cycle.front().variable, std::nullopt);
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace dune::forecast
