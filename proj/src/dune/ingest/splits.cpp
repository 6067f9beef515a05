// SPDX-License-Identifier: Apache-2.0
#include "dune/ingest/splits.hpp"

#include "dune/common/error.hpp"

namespace dune::ingest {

std::string_view to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "?";
}

Split parse_split(std::string_view s) {
  if (s == "train") return Split::train;
  if (s == "val") return Split::val;
  if (s == "test") return Split::test;
  throw UsageError("unknown split '" + std::string(s) + "' (train, val, test)");
}

SplitPlan SplitPlan::from_config(const Config& cfg) {
  SplitPlan p{StampRange::parse(cfg.get("split.train")), StampRange::parse(cfg.get("split.val")),
              StampRange::parse(cfg.get("split.test"))};
  p.validate();
  return p;
}

void SplitPlan::validate() const {
  for (const auto* r : {&train, &val, &test})
    if (r->first.kind != PeriodKind::monthly) throw UsageError("split ranges must be given in months");
  if (!(train.last < val.first) || !(val.last < test.first))
    throw UsageError("splits must be disjoint and ordered train < val < test");
}

const StampRange& SplitPlan::range(Split s) const {
  switch (s) {
    case Split::train: return train;
    case Split::val: return val;
    case Split::test: return test;
  }
  return train;
}

std::optional<Split> SplitPlan::split_of(const Stamp& month) const {
  for (Split s : {Split::train, Split::val, Split::test})
    if (range(s).contains(month)) return s;
  return std::nullopt;
}

std::vector<Stamp> periods_inside(const StampRange& months, PeriodKind kind) {
  std::vector<Stamp> out;
  const Stamp first = months.first.containing(kind);
  const Stamp last = months.last.containing(kind);
  for (long o = first.ordinal(); o <= last.ordinal(); ++o) {
    const Stamp p = Stamp::from_ordinal(kind, o);
    const auto ms = p.months();
    if (months.contains(ms.front()) && months.contains(ms.back())) out.push_back(p);
  }
  return out;
}

std::vector<std::pair<Stamp, Stamp>> pairs_inside(const StampRange& months, PeriodKind kind) {
  const auto periods = periods_inside(months, kind);
  std::vector<std::pair<Stamp, Stamp>> out;
  for (std::size_t i = 1; i < periods.size(); ++i) out.emplace_back(periods[i - 1], periods[i]);
  return out;
}

SplitCounts count_periods(const SplitPlan& plan, PeriodKind kind) {
  return {static_cast<long>(periods_inside(plan.train, kind).size()),
          static_cast<long>(periods_inside(plan.val, kind).size()),
          static_cast<long>(periods_inside(plan.test, kind).size())};
}

SplitCounts count_pairs(const SplitPlan& plan, PeriodKind kind) {
  return {static_cast<long>(pairs_inside(plan.train, kind).size()),
          static_cast<long>(pairs_inside(plan.val, kind).size()),
          static_cast<long>(pairs_inside(plan.test, kind).size())};
}

}  // namespace dune::ingest
