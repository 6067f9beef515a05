// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dune/app/workspace.hpp"
#include "dune/baselines/baselines.hpp"
#include "dune/ingest/synthetic.hpp"
#include "json.hpp"

namespace dune::app {

/// Configuration layers kept separately so they can be re-resolved after a
/// command changes the data-directory config (synth writes one).
struct ConfigLayers {
  std::vector<std::filesystem::path> files;  // --config, in order
  bool environment = true;
  std::vector<std::pair<std::string, std::string>> overrides;  // CLI flags
};

struct Context {
  Workspace ws;
  ConfigLayers layers;
  Config config;
  LogLevel level = LogLevel::info;
  LogSink sink;

  explicit Context(std::filesystem::path root) : ws(std::move(root)) { resolve(); }

  /// defaults < data/dune.cfg < files < environment < overrides
  void resolve();
  void log(LogLevel lvl, const std::string& msg) const;
};

using Summary = nlohmann::json;

Summary run_synth(Context& ctx, const ingest::SyntheticOptions& opt);
Summary run_ingest(Context& ctx, const std::vector<std::filesystem::path>& sources,
                   const std::optional<StampRange>& range);
Summary run_climatology(Context& ctx);
Summary run_train(Context& ctx);
/// Block evaluation of the trained checkpoint over `range` (default: test split).
Summary run_forecast(Context& ctx, const std::optional<StampRange>& range);
Summary run_rollout(Context& ctx, const Stamp& start, int horizon, bool truth_feedback);
Summary run_baseline(Context& ctx, const std::vector<baselines::BaselineKind>& kinds);
/// Scores every forecast source of the configured mode over the test split.
/// Missing DUNE/baseline forecasts are produced first. `category_files`
/// add HSS-only sources from category grid files.
Summary run_score(Context& ctx, const std::vector<std::filesystem::path>& category_files);
/// Members from sub-directories of `members_dir` (each with blended_t.dgf),
/// or seeded perturbations of the workspace data.
Summary run_ensemble(Context& ctx, const std::optional<std::filesystem::path>& members_dir, int coarsen);
/// what: all | loss | metrics | maps | hss | global_mean
Summary run_plot(Context& ctx, const std::string& what, const std::optional<Stamp>& map_stamp);
Summary run_model_summary(Context& ctx);

}  // namespace dune::app
