// SPDX-License-Identifier: Apache-2.0
#include "dune/ingest/input_stack.hpp"

#include <algorithm>

#include "dune/common/error.hpp"

namespace dune::ingest {

TisrAlignment parse_tisr_alignment(const std::string& text) {
  if (text == "target") return TisrAlignment::target;
  if (text == "input") return TisrAlignment::input;
  throw UsageError("stack.tisr_alignment must be target or input (got '" + text + "')");
}

bool supported_window(int window) {
  return window == 1 || window == 2 || window == 3 || window == 4 || window == 6 || window == 12;
}

InputStack assemble_input_stack(std::span<const Field> anomalies, std::span<const Field> tisr,
                                std::span<const Field> constants, const GridSpec& model_grid) {
  const int w = static_cast<int>(anomalies.size());
  if (!supported_window(w)) throw UsageError("unsupported window length " + std::to_string(w) + " (use 1,2,3,4,6,12)");
  if (static_cast<int>(tisr.size()) != w) throw UsageError("need one TISR field per window month");
  if (constants.size() != 5) throw UsageError("need exactly five constant channels");

  InputStack s;
  s.window = w;
  s.n_lat = model_grid.n_lat();
  s.n_lon = model_grid.n_lon();
  s.data.reserve(static_cast<std::size_t>(input_channels_for(w)) * model_grid.size());
  auto append = [&](const Field& f, std::string name) {
    if (!f.grid || !(*f.grid == model_grid))
      throw DataError("input channel " + name + " is not on the model grid " + model_grid.describe());
    s.data.insert(s.data.end(), f.values.begin(), f.values.end());
    s.channel_names.push_back(std::move(name));
  };
  for (const auto& f : anomalies) append(f, "anomaly " + (f.stamp ? f.stamp->str() : std::string("?")));
  for (std::size_t i = 0; i < tisr.size(); ++i) append(tisr[i], "tisr " + std::to_string(i));
  for (const auto& f : constants) append(f, std::string(to_string(f.variable)));
  return s;
}

}  // namespace dune::ingest
