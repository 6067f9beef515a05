// SPDX-License-Identifier: Apache-2.0
#include "dune/common/stamp.hpp"

#include <charconv>

#include "dune/common/error.hpp"

namespace dune {

namespace {

constexpr std::string_view kSeasonNames[4] = {"DJF", "MAM", "JJA", "SON"};

long floor_div(long a, long b) {
  long q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

int parse_int(std::string_view text, std::string_view what) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw UsageError("invalid " + std::string(what) + " '" + std::string(text) + "'");
  return value;
}

}  // namespace

std::string_view to_string(PeriodKind kind) {
  switch (kind) {
    case PeriodKind::monthly: return "monthly";
    case PeriodKind::seasonal: return "seasonal";
    case PeriodKind::annual: return "annual";
  }
  return "?";
}

PeriodKind parse_period_kind(std::string_view text) {
  if (text == "monthly") return PeriodKind::monthly;
  if (text == "seasonal") return PeriodKind::seasonal;
  if (text == "annual") return PeriodKind::annual;
  throw UsageError("unknown mode '" + std::string(text) + "' (expected monthly, seasonal or annual)");
}

int slots_per_year(PeriodKind kind) {
  switch (kind) {
    case PeriodKind::monthly: return 12;
    case PeriodKind::seasonal: return 4;
    case PeriodKind::annual: return 1;
  }
  return 1;
}

Stamp Stamp::month(int year, int month) {
  if (month < 1 || month > 12) throw UsageError("month out of range: " + std::to_string(month));
  return {PeriodKind::monthly, year, month};
}

Stamp Stamp::season(int year, int season) {
  if (season < 0 || season > 3) throw UsageError("season out of range: " + std::to_string(season));
  return {PeriodKind::seasonal, year, season};
}

Stamp Stamp::annual(int year) { return {PeriodKind::annual, year, 0}; }

long Stamp::ordinal() const {
  switch (kind) {
    case PeriodKind::monthly: return static_cast<long>(year) * 12 + (slot - 1);
    case PeriodKind::seasonal: return static_cast<long>(year) * 4 + slot;
    case PeriodKind::annual: return year;
  }
  return 0;
}

Stamp Stamp::from_ordinal(PeriodKind kind, long ordinal) {
  const long n = slots_per_year(kind);
  const long year = floor_div(ordinal, n);
  const int slot = static_cast<int>(ordinal - year * n);
  return {kind, static_cast<int>(year), kind == PeriodKind::monthly ? slot + 1 : slot};
}

std::vector<Stamp> Stamp::months() const {
  std::vector<Stamp> out;
  switch (kind) {
    case PeriodKind::monthly:
      out.push_back(*this);
      break;
    case PeriodKind::seasonal: {
      // DJF(Y) = Dec(Y-1), Jan(Y), Feb(Y); MAM = 3..5 and so on.
      const Stamp first = slot == 0 ? Stamp::month(year - 1, 12) : Stamp::month(year, 3 * slot);
      for (int i = 0; i < 3; ++i) out.push_back(first.next(i));
      break;
    }
    case PeriodKind::annual:
      for (int m = 1; m <= 12; ++m) out.push_back(Stamp::month(year, m));
      break;
  }
  return out;
}

Stamp Stamp::containing(PeriodKind target) const {
  if (kind != PeriodKind::monthly) throw UsageError("containing() expects a monthly stamp");
  switch (target) {
    case PeriodKind::monthly: return *this;
    case PeriodKind::seasonal:
      if (slot == 12) return Stamp::season(year + 1, 0);
      return Stamp::season(year, slot / 3 % 4);
    case PeriodKind::annual: return Stamp::annual(year);
  }
  return *this;
}

std::string Stamp::str() const {
  std::string y = std::to_string(year);
  switch (kind) {
    case PeriodKind::monthly: return y + (slot < 10 ? "-0" : "-") + std::to_string(slot);
    case PeriodKind::seasonal: return y + "-" + std::string(kSeasonNames[slot]);
    case PeriodKind::annual: return y;
  }
  return y;
}

Stamp Stamp::parse(std::string_view text) {
  const auto dash = text.find('-', 1);
  if (dash == std::string_view::npos) return Stamp::annual(parse_int(text, "year"));
  const int year = parse_int(text.substr(0, dash), "year");
  const auto rest = text.substr(dash + 1);
  for (int s = 0; s < 4; ++s)
    if (rest == kSeasonNames[s]) return Stamp::season(year, s);
  return Stamp::month(year, parse_int(rest, "month"));
}

std::vector<Stamp> StampRange::stamps() const {
  std::vector<Stamp> out;
  for (long o = first.ordinal(); o <= last.ordinal(); ++o) out.push_back(Stamp::from_ordinal(first.kind, o));
  return out;
}

StampRange StampRange::parse(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) throw UsageError("expected FIRST:LAST range, got '" + std::string(text) + "'");
  Stamp a = Stamp::parse(text.substr(0, colon));
  Stamp b = Stamp::parse(text.substr(colon + 1));
  // Bare years mean whole calendar years of months.
  if (a.kind == PeriodKind::annual && b.kind == PeriodKind::annual) {
    a = Stamp::month(a.year, 1);
    b = Stamp::month(b.year, 12);
  }
  if (a.kind != b.kind) throw UsageError("range endpoints differ in kind: '" + std::string(text) + "'");
  if (b < a) throw UsageError("range is reversed: '" + std::string(text) + "'");
  return {a, b};
}

}  // namespace dune
