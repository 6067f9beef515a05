// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>

#include "dune/grid/field.hpp"

namespace dune::ingest {

struct BlendResult {
  Field field;                  ///< blended_t, no missing cells
  std::size_t fallback_count;   ///< ocean cells where SST was missing and T2m was used
};

/// T2m where lsm >= threshold, SST elsewhere (T2m if SST is missing there).
BlendResult blend_sst_t2m(const Field& t2m, const Field& sst, const Field& lsm, double threshold);

}  // namespace dune::ingest
