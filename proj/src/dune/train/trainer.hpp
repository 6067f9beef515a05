// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <set>
#include <vector>

#include "dune/common/config.hpp"
#include "dune/nn/checkpoint.hpp"
#include "dune/nn/dune_net.hpp"
#include "dune/train/samples.hpp"
#include "dune/train/schedule.hpp"

namespace dune::train {

struct TrainConfig {
  double learning_rate = 1e-3;
  int batch_size = 4;
  double weight_decay = 1e-4;
  int cosine_period = 225;
  LrHold lr_hold = LrHold::last_nonzero;
  int max_epochs = 500;
  int patience = 100;
  std::uint64_t seed = 0;

  static TrainConfig from_config(const Config& cfg);
  void validate() const;
  CosineSchedule schedule() const { return {learning_rate, cosine_period, lr_hold}; }
};

struct TrainResult {
  std::vector<nn::EpochRecord> history;
  double initial_val_loss = 0;  // before the first update
  int best_epoch = 0;
  double best_val_loss = 0;
  bool stopped_early = false;
  std::set<Stamp> audit;  // every period read by a gradient step
};

/// Adam with coupled L2 weight decay on the latitude-weighted loss.
class Trainer {
 public:
  using EpochCallback = std::function<void(const nn::EpochRecord&, const std::vector<float>& params)>;

  Trainer(nn::DuneNet<float>& net, TrainConfig config, std::vector<double> lat_weights);

  /// Runs until max_epochs or early stop, then restores the best parameters.
  /// `on_epoch` sees every record with the best parameters so far.
  /// `monitor` samples (e.g. the test split) are only evaluated and logged.
  TrainResult fit(const std::vector<Sample>& train, const std::vector<Sample>& val, const EpochCallback& on_epoch = {},
                  const std::vector<Sample>* monitor = nullptr);

  /// Mean loss of the network over `samples` (one forecast per target channel).
  double evaluate(const std::vector<Sample>& samples) const;

 private:
  nn::DuneNet<float>& net_;
  TrainConfig config_;
  std::vector<double> weights_;
};

}  // namespace dune::train
