// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <compare>
#include <string>
#include <string_view>
#include <vector>

namespace dune {

enum class PeriodKind { monthly, seasonal, annual };

std::string_view to_string(PeriodKind kind);
PeriodKind parse_period_kind(std::string_view text);

/// Number of calendar slots per year for a period kind (12, 4, 1).
int slots_per_year(PeriodKind kind);

/// A time stamp for a monthly, seasonal or annual mean.
///
/// `slot` is the month (1-12), the season (0 = DJF, 1 = MAM, 2 = JJA,
/// 3 = SON) or 0 for annual means. DJF of year Y spans December of Y-1
/// and January/February of Y.
struct Stamp {
  PeriodKind kind = PeriodKind::monthly;
  int year = 0;
  int slot = 1;

  static Stamp month(int year, int month);
  static Stamp season(int year, int season);
  static Stamp annual(int year);

  /// Consecutive integer index; ordinal() + 1 is the next period.
  long ordinal() const;
  static Stamp from_ordinal(PeriodKind kind, long ordinal);

  Stamp next(long n = 1) const { return from_ordinal(kind, ordinal() + n); }
  Stamp prev(long n = 1) const { return from_ordinal(kind, ordinal() - n); }

  /// Zero-based slot index into a climatology table.
  int slot_index() const { return kind == PeriodKind::monthly ? slot - 1 : slot; }

  /// The calendar months averaged into this period, in time order.
  std::vector<Stamp> months() const;

  /// Period of `kind` containing this monthly stamp.
  Stamp containing(PeriodKind kind) const;

  /// "1980-01", "1980-DJF", "1980".
  std::string str() const;
  static Stamp parse(std::string_view text);

  friend auto operator<=>(const Stamp& a, const Stamp& b) {
    if (auto c = a.kind <=> b.kind; c != 0) return c;
    return a.ordinal() <=> b.ordinal();
  }
  friend bool operator==(const Stamp& a, const Stamp& b) = default;
};

/// Inclusive range of stamps of one kind.
struct StampRange {
  Stamp first;
  Stamp last;

  long size() const { return last.ordinal() - first.ordinal() + 1; }
  bool contains(const Stamp& s) const {
    return s.kind == first.kind && s.ordinal() >= first.ordinal() && s.ordinal() <= last.ordinal();
  }
  std::vector<Stamp> stamps() const;
  std::string str() const { return first.str() + ":" + last.str(); }
  /// "1980-01:2016-12" or "1980:2016" (whole years, monthly).
  static StampRange parse(std::string_view text);
};

}  // namespace dune
