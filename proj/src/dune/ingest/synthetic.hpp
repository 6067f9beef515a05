// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "dune/grid/field.hpp"

namespace dune::ingest {

/// Five time-invariant channels plus the 12-month TISR cycle shared by every year.
struct ConstantChannels {
  Field lsm, slt, orography, cvh, cvl;
  std::vector<Field> tisr_cycle;  ///< index 0 = January

  /// lsm, slt, orography, cvh, cvl in stack order.
  std::vector<const Field*> ordered() const { return {&lsm, &slt, &orography, &cvh, &cvl}; }
  const Field& tisr_for(const Stamp& month) const { return tisr_cycle.at(static_cast<std::size_t>(month.slot - 1)); }
};

struct SyntheticOptions {
  std::size_t n_lat = 32;
  std::size_t n_lon = 64;
  int years = 42;
  int last_year = 2023;
  std::uint64_t seed = 7;
  double noise_scale = 1.0;        ///< multiplies the AR(1) noise amplitude; 0 disables noise
  double trend_per_year = 0.025;   ///< K per year
};

struct SyntheticCorpus {
  std::vector<Field> t2m;  ///< monthly, contiguous
  std::vector<Field> sst;  ///< monthly, missing over land
  ConstantChannels constants;
};

/// Deterministic synthetic monthly corpus: latitude-dependent mean, annual
/// cycle with opposite phase per hemisphere, linear warming trend and
/// spatially smooth AR(1) noise; smooth continents; analytic insolation.
SyntheticCorpus generate_synthetic_corpus(const SyntheticOptions& opt);

/// Daily-mean top-of-atmosphere insolation (W m^-2) for the middle of a month.
double monthly_insolation(double lat_deg, int month);

}  // namespace dune::ingest
