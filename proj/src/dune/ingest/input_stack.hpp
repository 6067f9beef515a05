// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <string>
#include <vector>

#include "dune/grid/field.hpp"

namespace dune::ingest {

enum class TisrAlignment { target, input };
TisrAlignment parse_tisr_alignment(const std::string& text);

/// Window lengths with a published channel layout.
bool supported_window(int window);
inline int input_channels_for(int window) { return 2 * window + 5; }

/// Network input: channels x n_lat x n_lon, float, row-major.
///
/// Channel order: the W anomaly months (oldest first), the W TISR months
/// (aligned with the W target months by default), then lsm, slt,
/// orography, cvh, cvl. Every channel is already normalized.
struct InputStack {
  int window = 1;
  std::size_t n_lat = 0;
  std::size_t n_lon = 0;
  std::vector<std::string> channel_names;
  std::vector<float> data;

  int channels() const { return static_cast<int>(channel_names.size()); }
  std::span<const float> channel(int c) const {
    return {data.data() + static_cast<std::size_t>(c) * n_lat * n_lon, n_lat * n_lon};
  }
};

InputStack assemble_input_stack(std::span<const Field> anomalies, std::span<const Field> tisr,
                                std::span<const Field> constants, const GridSpec& model_grid);

}  // namespace dune::ingest
