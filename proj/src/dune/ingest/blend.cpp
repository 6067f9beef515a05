// SPDX-License-Identifier: Apache-2.0
#include "dune/ingest/blend.hpp"

#include "dune/common/error.hpp"

namespace dune::ingest {

BlendResult blend_sst_t2m(const Field& t2m, const Field& sst, const Field& lsm, double threshold) {
  require_same_grid(t2m, sst, "blend (t2m vs sst)");
  require_same_grid(t2m, lsm, "blend (t2m vs lsm)");
  if (t2m.stamp != sst.stamp)
    throw DataError("blend stamp mismatch: t2m " + (t2m.stamp ? t2m.stamp->str() : "-") + " vs sst " +
                    (sst.stamp ? sst.stamp->str() : "-"));
  BlendResult r{Field(Variable::blended_t, t2m.stamp, t2m.grid), 0};
  for (std::size_t k = 0; k < t2m.size(); ++k) {
    if (lsm.values[k] >= threshold) {
      r.field.values[k] = t2m.values[k];
    } else if (sst.is_missing(k)) {
      r.field.values[k] = t2m.values[k];
      ++r.fallback_count;
    } else {
      r.field.values[k] = sst.values[k];
    }
  }
  return r;
}

}  // namespace dune::ingest
