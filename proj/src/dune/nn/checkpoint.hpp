// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "dune/common/stamp.hpp"
#include "dune/grid/grid_spec.hpp"
#include "dune/grid/normalize.hpp"
#include "dune/ingest/input_stack.hpp"
#include "dune/nn/dune_net.hpp"

namespace dune::nn {

struct EpochRecord {
  int epoch = 0;  // 1-based
  double learning_rate = 0;
  double train_loss = 0;
  double val_loss = 0;
  double test_loss = std::numeric_limits<double>::quiet_NaN();  // monitoring only
  bool is_best = false;
};

/// Everything inference needs, in one file.
struct Checkpoint {
  ModelConfig model;
  PeriodKind mode = PeriodKind::monthly;
  int window = 1;
  ingest::TisrAlignment tisr_alignment = ingest::TisrAlignment::target;
  std::uint64_t seed = 0;
  GridPtr grid;
  std::vector<NormStats> norm;  // "anomaly", "tisr", then the constants
  std::string climatology_hash;
  std::string loss_space = "normalized_anomaly";
  std::vector<EpochRecord> history;
  int best_epoch = 0;
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<float> params;

  const NormStats& stats(const std::string& channel) const;
  /// Hash over the normalization statistics.
  std::string stats_hash() const;
  /// Content hash over header and parameters.
  std::string id() const;
};

std::string norm_stats_hash(const std::vector<NormStats>& norm);

/// Written to a temporary sibling and renamed into place.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace dune::nn
