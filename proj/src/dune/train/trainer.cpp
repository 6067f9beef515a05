// SPDX-License-Identifier: Apache-2.0
#include "dune/train/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "dune/common/error.hpp"
#include "dune/train/loss.hpp"

namespace dune::train {

TrainConfig TrainConfig::from_config(const Config& cfg) {
  TrainConfig t;
  t.learning_rate = cfg.get_double("train.learning_rate");
  t.batch_size = static_cast<int>(cfg.get_int("train.batch_size"));
  t.weight_decay = cfg.get_double("train.weight_decay");
  t.cosine_period = static_cast<int>(cfg.get_int("train.cosine_period"));
  t.lr_hold = parse_lr_hold(cfg.get("train.lr_hold"));
  t.max_epochs = static_cast<int>(cfg.get_int("train.max_epochs"));
  t.patience = static_cast<int>(cfg.get_int("train.patience"));
  t.seed = static_cast<std::uint64_t>(cfg.get_int("train.seed"));
  t.validate();
  return t;
}

void TrainConfig::validate() const {
  if (!(learning_rate >= 0) || !std::isfinite(learning_rate)) throw UsageError("train.learning_rate must be >= 0");
  if (batch_size < 1) throw UsageError("train.batch_size must be positive");
  if (!(weight_decay >= 0)) throw UsageError("train.weight_decay must be >= 0");
  if (max_epochs < 1) throw UsageError("train.max_epochs must be positive");
  if (cosine_period < 1) throw UsageError("train.cosine_period must be positive");
  // A patience at or above max_epochs simply never triggers.
  if (patience < 1) throw UsageError("train.patience must be positive, got " + std::to_string(patience));
}

Trainer::Trainer(nn::DuneNet<float>& net, TrainConfig config, std::vector<double> lat_weights)
    : net_(net), config_(std::move(config)), weights_(std::move(lat_weights)) {
  config_.validate();
}

double Trainer::evaluate(const std::vector<Sample>& samples) const {
  if (samples.empty()) throw DataError("cannot evaluate on an empty sample set");
  double sum = 0;
  std::size_t n = 0;
  for (const auto& s : samples) {
    const auto out = net_.forward(s.input);
    const auto& t = s.target;
    sum += weighted_loss<float>(out.mean.data, t.data, t.h, t.w, weights_) * t.c;
    n += t.c;
  }
  return sum / static_cast<double>(n);
}

TrainResult Trainer::fit(const std::vector<Sample>& train, const std::vector<Sample>& val, const EpochCallback& on_epoch,
                         const std::vector<Sample>* monitor) {
  if (train.empty()) throw DataError("training split has no samples");
  if (val.empty()) throw DataError("validation split has no samples");
  const auto schedule = config_.schedule();
  auto params = net_.params();
  const std::size_t np = params.size();
  nn::AlignedVector<float> grad(np), m(np, 0.0f), v(np, 0.0f);
  const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  long step = 0;

  TrainResult result;
  result.initial_val_loss = evaluate(val);
  std::vector<float> best(params.begin(), params.end());
  double best_val = std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(config_.seed);
  std::vector<std::size_t> order(train.size());
  nn::DuneNet<float>::Activations acts;

  for (int epoch = 1; epoch <= config_.max_epochs; ++epoch) {
    const double lr = schedule.lr_at(epoch - 1);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    double train_sum = 0;
    std::size_t train_n = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config_.batch_size)) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(config_.batch_size));
      std::fill(grad.begin(), grad.end(), 0.0f);
      std::size_t forecasts = 0;
      for (std::size_t q = start; q < stop; ++q) forecasts += static_cast<std::size_t>(train[order[q]].target.c);
      for (std::size_t q = start; q < stop; ++q) {
        const auto& s = train[order[q]];
        const auto out = net_.forward(s.input, &acts);
        nn::Tensor<float> g(out.mean.c, out.mean.h, out.mean.w);
        const double r = weighted_loss_backward<float>(out.mean.data, s.target.data, s.target.h, s.target.w,
                                                       weights_, 1.0 / static_cast<double>(forecasts), g.data);
        if (!std::isfinite(r))
          throw NumericError("non-finite training loss at epoch " + std::to_string(epoch) + ", sample " +
                             s.first_target.str() + "; last good checkpoint kept");
        train_sum += r;
        train_n += static_cast<std::size_t>(s.target.c);
        net_.backward(acts, g, grad);
        result.audit.insert(s.stamps.begin(), s.stamps.end());
      }
      ++step;
      const double c1 = 1.0 - std::pow(b1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(b2, static_cast<double>(step));
      for (std::size_t k = 0; k < np; ++k) {
        const double gk = static_cast<double>(grad[k]) + config_.weight_decay * params[k];
        m[k] = static_cast<float>(b1 * m[k] + (1 - b1) * gk);
        v[k] = static_cast<float>(b2 * v[k] + (1 - b2) * gk * gk);
        const double mh = m[k] / c1, vh = v[k] / c2;
        params[k] = static_cast<float>(params[k] - lr * mh / (std::sqrt(vh) + eps));
      }
    }
    nn::EpochRecord rec;
    rec.epoch = epoch;
    rec.learning_rate = lr;
    rec.train_loss = train_sum / static_cast<double>(train_n);
    rec.val_loss = evaluate(val);
    if (monitor && !monitor->empty()) rec.test_loss = evaluate(*monitor);
    if (!std::isfinite(rec.val_loss))
      throw NumericError("non-finite validation loss at epoch " + std::to_string(epoch) + "; last good checkpoint kept");
    if (rec.val_loss < best_val) {
      best_val = rec.val_loss;
      result.best_epoch = epoch;
      std::copy(params.begin(), params.end(), best.begin());
      for (auto& h : result.history) h.is_best = false;
      rec.is_best = true;
    }
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec, best);
    if (epoch - result.best_epoch >= config_.patience) {
      result.stopped_early = epoch < config_.max_epochs;
      break;
    }
  }
  std::copy(best.begin(), best.end(), params.begin());
  result.best_val_loss = best_val;
  return result;
}

}  // namespace dune::train
