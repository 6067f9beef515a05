// SPDX-License-Identifier: Apache-2.0
#include "dune/forecast/ensemble.hpp"

#include <cmath>
#include <random>

#include "dune/common/error.hpp"
#include "dune/forecast/regrid.hpp"

namespace dune::forecast {

MeanStd mean_std(std::span<const double> v) {
  if (v.empty()) return {};
  double s = 0;
  for (double x : v) s += x;
  const double m = s / static_cast<double>(v.size());
  double q = 0;
  for (double x : v) q += (x - m) * (x - m);
  return {m, std::sqrt(q / static_cast<double>(v.size()))};
}

EnsembleResult ensemble_inference(const Forecaster& f, std::span<const train::SeriesBundle> members,
                                  const StampRange& months) {
  if (members.empty()) throw UsageError("ensemble needs at least one member");
  EnsembleResult res;
  for (std::size_t m = 0; m < members.size(); ++m) {
    const auto& ckgrid = f.checkpoint().grid;
    if (ckgrid && !(*members[m].grid == *ckgrid))
      throw DataError("ensemble member " + std::to_string(m) + " grid " + members[m].grid->describe() +
                      " differs from the checkpoint grid " + ckgrid->describe());
    res.members.push_back(f.evaluate_blocks(members[m], months));
    if (res.members.back().size() != res.members.front().size())
      throw DataError("ensemble member " + std::to_string(m) + " covers a different period");
  }
  const std::size_t n_stamps = res.members.front().size();
  std::vector<double> vals(members.size());
  for (std::size_t t = 0; t < n_stamps; ++t) {
    Field mean = res.members.front()[t].anomaly;
    Field sd = mean;
    for (std::size_t k = 0; k < mean.size(); ++k) {
      for (std::size_t m = 0; m < members.size(); ++m) vals[m] = res.members[m][t].anomaly.values[k];
      const auto ms = mean_std(vals);
      mean.values[k] = static_cast<float>(ms.mean);
      sd.values[k] = static_cast<float>(ms.std);
    }
    res.mean.push_back(std::move(mean));
    res.std.push_back(std::move(sd));
  }
  res.sample_count = members.size() * n_stamps;
  return res;
}

std::vector<std::vector<Field>> perturbed_members(std::span<const Field> fields, int count, double amplitude,
                                                  std::uint64_t seed) {
  if (count < 1) throw UsageError("ensemble member count must be positive");
  if (!(amplitude >= 0)) throw UsageError("ensemble noise amplitude must be >= 0");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::vector<Field>> out;
  for (int m = 0; m < count; ++m) {
    std::vector<Field> member(fields.begin(), fields.end());
    if (amplitude > 0)
      for (auto& f : member)
        for (auto& v : f.values) v = static_cast<float>(v + amplitude * normal(rng));
    out.push_back(std::move(member));
  }
  return out;
}

std::vector<Field> upsample_all(std::span<const Field> fields, const GridPtr& target) {
  std::vector<Field> out;
  out.reserve(fields.size());
  for (const auto& f : fields) out.push_back(bilinear_regrid(f, target));
  return out;
}

}  // namespace dune::forecast
