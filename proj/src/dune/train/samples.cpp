// SPDX-License-Identifier: Apache-2.0
#include "dune/train/samples.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dune/common/error.hpp"
#include "dune/ingest/splits.hpp"

namespace dune::train {

namespace {

const char* const kConstantNames[] = {"lsm", "slt", "orography", "cvh", "cvl"};

NormStats fit_or_unit(const std::string& name, std::span<const Field> fields) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& f : fields)
    for (std::size_t k = 0; k < f.size(); ++k) {
      if (f.is_missing(k) || !std::isfinite(f.values[k])) continue;
      lo = std::min(lo, static_cast<double>(f.values[k]));
      hi = std::max(hi, static_cast<double>(f.values[k]));
    }
  if (!std::isfinite(lo)) throw DataError("no finite values to fit normalization for '" + name + "'");
  if (hi <= lo) return NormStats(name, lo, lo + 1.0);
  return NormStats(name, lo, hi);
}

Field normalized(const Field& f, const NormStats& s) {
  Field out = f;
  for (std::size_t k = 0; k < out.size(); ++k) out.values[k] = static_cast<float>(normalize(out.values[k], s));
  return out;
}

}  // namespace

std::vector<std::string> norm_channel_names() {
  std::vector<std::string> names{"anomaly", "tisr"};
  names.insert(names.end(), std::begin(kConstantNames), std::end(kConstantNames));
  return names;
}

std::vector<NormStats> fit_norm_stats(std::span<const Field> train_anomalies, std::span<const Field> tisr_cycle,
                                      std::span<const Field> constants) {
  if (train_anomalies.empty()) throw DataError("normalization needs at least one training period");
  if (constants.size() != 5) throw DataError("expected 5 constant channels, got " + std::to_string(constants.size()));
  for (const auto& a : train_anomalies)
    if (a.missing_count() > 0)
      throw DataError("anomaly " + (a.stamp ? a.stamp->str() : std::string("?")) + " has missing cells");
  std::vector<NormStats> out;
  out.push_back(fit_or_unit("anomaly", train_anomalies));
  out.push_back(fit_or_unit("tisr", tisr_cycle));
  for (std::size_t c = 0; c < 5; ++c) out.push_back(fit_or_unit(kConstantNames[c], constants.subspan(c, 1)));
  return out;
}

SeriesBundle make_bundle(std::span<const Field> anomalies, std::span<const Field> tisr_cycle,
                         std::span<const Field> constants, const std::vector<NormStats>& stats, PeriodKind kind,
                         int window, ingest::TisrAlignment alignment) {
  if (!ingest::supported_window(window))
    throw UsageError("window " + std::to_string(window) + " is not one of 1, 2, 3, 4, 6, 12");
  if (static_cast<int>(tisr_cycle.size()) != slots_per_year(kind))
    throw DataError("TISR cycle has " + std::to_string(tisr_cycle.size()) + " slots, " +
                    std::string(to_string(kind)) + " needs " + std::to_string(slots_per_year(kind)));
  if (stats.size() != 7) throw DataError("expected 7 normalization channels");
  SeriesBundle b;
  b.kind = kind;
  b.window = window;
  b.alignment = alignment;
  b.grid = constants.empty() ? nullptr : constants.front().grid;
  for (const auto& a : anomalies) {
    if (!a.stamp || a.stamp->kind != kind) throw DataError("anomaly period kind does not match the bundle");
    require_same_grid(constants.front(), a, "anomaly");
    b.anomaly.emplace(*a.stamp, normalized(a, stats[0]));
  }
  for (const auto& t : tisr_cycle) b.tisr.push_back(normalized(t, stats[1]));
  for (std::size_t c = 0; c < constants.size(); ++c) b.constants.push_back(normalized(constants[c], stats[2 + c]));
  return b;
}

bool SeriesBundle::can_build(const Stamp& first, bool with_targets) const {
  for (int w = 1; w <= window; ++w)
    if (!has(first.prev(w))) return false;
  if (with_targets)
    for (int w = 0; w < window; ++w)
      if (!has(first.next(w))) return false;
  return true;
}

const Field& SeriesBundle::tisr_for(const Stamp& s) const {
  return tisr.at(static_cast<std::size_t>(s.slot_index()));
}

nn::Tensor<float> SeriesBundle::input_for(const Stamp& first, const std::map<Stamp, Field>* history) const {
  std::vector<Field> anoms, tisrs;
  for (int w = window; w >= 1; --w) {
    const Stamp s = first.prev(w);
    const Field* f = nullptr;
    if (history) {
      auto it = history->find(s);
      if (it != history->end()) f = &it->second;
    }
    if (!f) {
      auto it = anomaly.find(s);
      if (it == anomaly.end()) throw DataError("no anomaly data for input period " + s.str());
      f = &it->second;
    }
    anoms.push_back(*f);
    const Stamp ts = alignment == ingest::TisrAlignment::target ? first.next(window - w) : s;
    tisrs.push_back(tisr_for(ts));
  }
  const auto stack = ingest::assemble_input_stack(anoms, tisrs, constants, *grid);
  nn::Tensor<float> t(stack.channels(), static_cast<int>(stack.n_lat), static_cast<int>(stack.n_lon));
  t.data.assign(stack.data.begin(), stack.data.end());
  return t;
}

nn::Tensor<float> SeriesBundle::target_for(const Stamp& first) const {
  nn::Tensor<float> t(window, static_cast<int>(grid->n_lat()), static_cast<int>(grid->n_lon()));
  for (int w = 0; w < window; ++w) {
    const Stamp s = first.next(w);
    auto it = anomaly.find(s);
    if (it == anomaly.end()) throw DataError("no anomaly data for target period " + s.str());
    std::copy(it->second.values.begin(), it->second.values.end(), t.channel(w));
  }
  return t;
}

std::vector<Sample> build_samples(const SeriesBundle& b, const StampRange& months, int stride) {
  if (stride < 1) throw UsageError("sample stride must be positive");
  const auto periods = ingest::periods_inside(months, b.kind);
  std::vector<Sample> out;
  for (std::size_t k = 0; k + static_cast<std::size_t>(b.window) <= periods.size(); k += static_cast<std::size_t>(stride)) {
    const Stamp first = periods[k];
    if (!b.can_build(first, true)) continue;
    Sample s{first, b.input_for(first), b.target_for(first), {}};
    for (int w = b.window; w >= 1; --w) s.stamps.push_back(first.prev(w));
    for (int w = 0; w < b.window; ++w) s.stamps.push_back(first.next(w));
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace dune::train
