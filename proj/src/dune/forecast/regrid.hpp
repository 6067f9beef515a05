// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dune/grid/field.hpp"

namespace dune::forecast {

/// Bilinear interpolation onto `target`. Longitude wraps periodically;
/// latitudes beyond the outermost source rows take the edge row.
Field bilinear_regrid(const Field& source, const GridPtr& target);

/// Mean over factor x factor blocks (target must be the coarsened grid).
Field block_mean(const Field& source, int factor, const GridPtr& coarse);

}  // namespace dune::forecast
