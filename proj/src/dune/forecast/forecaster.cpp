// SPDX-License-Identifier: Apache-2.0
#include "dune/forecast/forecaster.hpp"

#include <algorithm>

#include "dune/common/error.hpp"
#include "dune/ingest/splits.hpp"

namespace dune::forecast {

void attach_absolute(ForecastResult& r, const ClimatologyTable& clim) {
  const Field& mean = clim.mean_for(r.stamp);
  require_same_grid(mean, r.anomaly, "forecast vs climatology");
  Field abs = r.anomaly;
  abs.missing.clear();
  for (std::size_t k = 0; k < abs.size(); ++k) {
    abs.values[k] = r.anomaly.values[k] + mean.values[k];
    r.anomaly.values[k] = abs.values[k] - mean.values[k];
  }
  r.absolute = std::move(abs);
}

Forecaster::Forecaster(nn::Checkpoint ckpt) : ckpt_(std::move(ckpt)), net_(ckpt_.model) {
  if (net_.parameter_count() != ckpt_.params.size()) throw DataError("checkpoint parameter count mismatch");
  std::copy(ckpt_.params.begin(), ckpt_.params.end(), net_.params().begin());
}

void Forecaster::check_climatology(const ClimatologyTable& clim) const {
  const auto h = climatology_hash(clim);
  if (h != ckpt_.climatology_hash)
    throw DataError("stats mismatch: checkpoint was trained against climatology " + ckpt_.climatology_hash +
                    ", got " + h);
}

train::SeriesBundle Forecaster::bundle(std::span<const Field> anomalies, std::span<const Field> tisr_cycle,
                                       std::span<const Field> constants) const {
  auto b = train::make_bundle(anomalies, tisr_cycle, constants, ckpt_.norm, ckpt_.mode, ckpt_.window,
                              ckpt_.tisr_alignment);
  if (ckpt_.grid && !(*b.grid == *ckpt_.grid))
    throw DataError("input grid " + b.grid->describe() + " differs from the checkpoint grid " +
                    ckpt_.grid->describe());
  return b;
}

std::vector<ForecastResult> Forecaster::step(const train::SeriesBundle& b, const Stamp& first,
                                             const std::map<Stamp, Field>* history, bool with_heads) const {
  if (b.kind != ckpt_.mode || b.window != ckpt_.window)
    throw DataError("input bundle does not match the checkpoint's mode/window");
  const auto out = net_.forward(b.input_for(first, history));
  const auto& s = ckpt_.stats("anomaly");
  auto to_field = [&](const nn::Tensor<float>& t, int w, const Stamp& stamp) {
    Field f(Variable::blended_t, stamp, b.grid);
    const float* src = t.channel(w);
    for (std::size_t k = 0; k < f.size(); ++k) f.values[k] = static_cast<float>(denormalize(src[k], s));
    return f;
  };
  std::vector<ForecastResult> results;
  for (int w = 0; w < ckpt_.window; ++w) {
    ForecastResult r;
    r.stamp = first.next(w);
    r.lead = w + 1;
    r.anomaly = to_field(out.mean, w, r.stamp);
    if (with_heads)
      for (const auto& h : out.heads) r.heads.push_back(to_field(h, w, r.stamp));
    results.push_back(std::move(r));
  }
  return results;
}

std::vector<ForecastResult> Forecaster::rollout(const train::SeriesBundle& b, const Stamp& first, int horizon,
                                                Feedback feedback) const {
  if (horizon < 1) throw UsageError("rollout horizon must be at least 1");
  if (!b.can_build(first, false))
    throw DataError("rollout needs observed data for the " + std::to_string(b.window) + " periods before " +
                    first.str());
  const auto& s = ckpt_.stats("anomaly");
  std::map<Stamp, Field> history;
  std::vector<ForecastResult> out;
  Stamp next = first;
  while (static_cast<int>(out.size()) < horizon) {
    auto block = step(b, next, feedback == Feedback::forecast ? &history : nullptr);
    for (auto& r : block) {
      if (feedback == Feedback::forecast) {
        Field z = r.anomaly;
        for (auto& v : z.values) v = static_cast<float>(normalize(v, s));
        history.insert_or_assign(r.stamp, std::move(z));
      }
      r.lead = static_cast<int>(r.stamp.ordinal() - first.ordinal()) + 1;
      if (static_cast<int>(out.size()) < horizon) out.push_back(std::move(r));
    }
    next = next.next(b.window);
  }
  return out;
}

std::vector<ForecastResult> Forecaster::evaluate_blocks(const train::SeriesBundle& b, const StampRange& months) const {
  const auto periods = ingest::periods_inside(months, b.kind);
  std::vector<ForecastResult> out;
  const auto w = static_cast<std::size_t>(b.window);
  for (std::size_t k = 0; k < periods.size(); k += w) {
    auto block = step(b, periods[k]);
    const std::size_t keep = std::min(w, periods.size() - k);
    for (std::size_t q = 0; q < keep; ++q) out.push_back(std::move(block[q]));
  }
  return out;
}

}  // namespace dune::forecast
