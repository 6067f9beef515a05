// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "dune/common/config.hpp"
#include "dune/common/error.hpp"
#include "dune/ingest/synthetic.hpp"
#include "dune/train/loss.hpp"
#include "dune/train/samples.hpp"
#include "dune/train/schedule.hpp"
#include "dune/train/trainer.hpp"
#include "helpers.hpp"

using namespace dune;
using namespace dune::train;

namespace {

/// Triple loop over fields, rows and columns.
double loss_oracle(const std::vector<double>& p, const std::vector<double>& t, int fields, int n_lat, int n_lon,
                   const std::vector<double>& L) {
  double total = 0;
  for (int f = 0; f < fields; ++f) {
    double s = 0;
    for (int j = 0; j < n_lat; ++j)
      for (int k = 0; k < n_lon; ++k) {
        const std::size_t q = (std::size_t(f) * n_lat + j) * n_lon + k;
        s += L[j] * (p[q] - t[q]) * (p[q] - t[q]);
      }
    total += std::sqrt(s / (n_lat * n_lon));
  }
  return total / fields;
}

nn::ModelConfig tiny_model(int n_lat, int n_lon) {
  nn::ModelConfig m = nn::ModelConfig::for_window(1, n_lat, n_lon);
  m.depth = 2;
  m.channels = {4, 8, 16};
  return m;
}

/// Samples whose target is the first (most recent anomaly) input channel.
std::vector<Sample> identity_samples(int count, int n_lat, int n_lon, std::uint64_t seed, int first_year) {
  std::mt19937_64 rng(seed);
  std::vector<Sample> out;
  for (int s = 0; s < count; ++s) {
    Sample x{Stamp::month(first_year, 1).next(s), nn::Tensor<float>(7, n_lat, n_lon), nn::Tensor<float>(1, n_lat, n_lon), {}};
    // Smooth random anomaly field plus fixed "constant" channels.
    const double a = std::normal_distribution<double>()(rng), b = std::normal_distribution<double>()(rng);
    for (int i = 0; i < n_lat; ++i)
      for (int j = 0; j < n_lon; ++j) {
        const double v = 0.5 + 0.2 * a * std::sin(2 * M_PI * j / n_lon) + 0.2 * b * std::cos(M_PI * i / n_lat);
        x.input.at(0, i, j) = static_cast<float>(v);
        for (int c = 1; c < 7; ++c) x.input.at(c, i, j) = static_cast<float>(0.1 * c + 0.01 * i);
        x.target.at(0, i, j) = static_cast<float>(v);
      }
    x.stamps = {x.first_target.prev(), x.first_target};
    out.push_back(std::move(x));
  }
  return out;
}

}  // namespace

TEST_CASE("loss closed forms") {
  const auto g = GridSpec::regular(8, 16);
  const auto L = latitude_weights(g);
  std::vector<double> t(8 * 16, 1.25), p = t;
  CHECK(weighted_loss<double>(p, t, 8, 16, L) == 0.0);
  const double d = 0.7;
  for (auto& v : p) v += d;
  double sum_l = 0;
  for (double w : L) sum_l += w;
  CHECK(weighted_loss<double>(p, t, 8, 16, L) == doctest::Approx(std::abs(d) * std::sqrt(sum_l / 8)).epsilon(1e-12));

  const GridSpec one({0.0}, {0, 90, 180, 270});
  const auto L1 = latitude_weights(one);
  std::vector<double> t1(4, 0.0), p1(4, -0.3);
  CHECK(weighted_loss<double>(p1, t1, 1, 4, L1) == doctest::Approx(0.3).epsilon(1e-15));
}

TEST_CASE("loss against a triple-loop oracle, and its gradient") {
  std::mt19937_64 rng(12);
  const int fields = 3, n_lat = 8, n_lon = 16;
  const auto L = latitude_weights(GridSpec::regular(n_lat, n_lon));
  std::vector<double> p(fields * n_lat * n_lon), t(p.size());
  std::normal_distribution<double> n;
  for (auto& v : p) v = n(rng);
  for (auto& v : t) v = n(rng);
  const double got = weighted_loss<double>(p, t, n_lat, n_lon, L);
  CHECK(testutil::rel_err(got, loss_oracle(p, t, fields, n_lat, n_lon, L)) <= 1e-12);

  std::vector<double> g(p.size(), 0.0);
  const double rsum = weighted_loss_backward<double>(p, t, n_lat, n_lon, L, 1.0 / fields, g);
  CHECK(rsum / fields == doctest::Approx(got).epsilon(1e-12));
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t k = std::uniform_int_distribution<std::size_t>(0, p.size() - 1)(rng);
    auto a = p, b = p;
    a[k] += 1e-6;
    b[k] -= 1e-6;
    const double fd = (loss_oracle(a, t, fields, n_lat, n_lon, L) - loss_oracle(b, t, fields, n_lat, n_lon, L)) / 2e-6;
    CHECK(g[k] == doctest::Approx(fd).epsilon(1e-5));
  }
  // A perfect field contributes no gradient (and no NaN).
  std::vector<double> g0(p.size(), 0.0);
  weighted_loss_backward<double>(t, t, n_lat, n_lon, L, 1.0, g0);
  for (double v : g0) CHECK(v == 0.0);
}

TEST_CASE("cosine schedule") {
  const CosineSchedule s{1e-3, 225, LrHold::last_nonzero};
  CHECK(s.lr_at(0) == 1e-3);
  CHECK(s.lr_at(113) == doctest::Approx(0.5 * 1e-3 * (1 + std::cos(113 * M_PI / 225))).epsilon(1e-12));
  for (int e = 0; e < 225; ++e) CHECK(std::abs(s.lr_at(e) - 0.5e-3 * (1 + std::cos(e * M_PI / 225))) <= 1e-12);
  CHECK(s.lr_at(225) == s.lr_at(224));
  CHECK(s.lr_at(400) == s.lr_at(224));
  CHECK(s.lr_at(224) > 0);

  const CosineSchedule f{1e-3, 225, LrHold::floor};
  CHECK(std::abs(f.lr_at(225)) <= 1e-18);
  CHECK(f.lr_at(300) == f.lr_at(225));
  CHECK(f.lr_at(100) == s.lr_at(100));
  CHECK(parse_lr_hold("floor") == LrHold::floor);
  CHECK_THROWS_AS(parse_lr_hold("sometimes"), UsageError);
}

TEST_CASE("training learns the identity task") {
  const int n_lat = 8, n_lon = 16;
  auto train_s = identity_samples(24, n_lat, n_lon, 1, 1990);
  auto val_s = identity_samples(8, n_lat, n_lon, 2, 2000);
  nn::DuneNet<float> net(tiny_model(n_lat, n_lon));
  net.init_kaiming(4);
  TrainConfig cfg;
  cfg.max_epochs = 50;
  cfg.patience = 50;
  cfg.learning_rate = 3e-3;
  cfg.cosine_period = 50;
  Trainer tr(net, cfg, latitude_weights(GridSpec::regular(n_lat, n_lon)));
  const auto r = tr.fit(train_s, val_s);
  CHECK(r.best_val_loss < 0.1 * r.initial_val_loss);
  CHECK(tr.evaluate(val_s) == doctest::Approx(r.best_val_loss).epsilon(1e-9));
  // Every gradient step read only training stamps.
  for (const auto& s : r.audit) CHECK(s.year < 2000);
}

TEST_CASE("seeded training is repeatable") {
  const int n_lat = 8, n_lon = 16;
  const auto train_s = identity_samples(8, n_lat, n_lon, 1, 1990);
  const auto val_s = identity_samples(4, n_lat, n_lon, 2, 2000);
  TrainConfig cfg;
  cfg.max_epochs = 4;
  cfg.patience = 4;
  cfg.seed = 17;
  std::vector<double> curves[2];
  std::vector<float> params[2];
  for (int run = 0; run < 2; ++run) {
    nn::DuneNet<float> net(tiny_model(n_lat, n_lon));
    net.init_kaiming(4);
    Trainer tr(net, cfg, latitude_weights(GridSpec::regular(n_lat, n_lon)));
    for (const auto& h : tr.fit(train_s, val_s).history) {
      curves[run].push_back(h.train_loss);
      curves[run].push_back(h.val_loss);
    }
    params[run].assign(net.params().begin(), net.params().end());
  }
  CHECK(curves[0] == curves[1]);
  CHECK(params[0] == params[1]);
}

TEST_CASE("early stopping on a frozen learning rate") {
  const int n_lat = 8, n_lon = 16;
  const auto train_s = identity_samples(4, n_lat, n_lon, 1, 1990);
  const auto val_s = identity_samples(4, n_lat, n_lon, 2, 2000);
  for (int patience : {1, 3}) {
    nn::DuneNet<float> net(tiny_model(n_lat, n_lon));
    net.init_kaiming(4);
    const std::vector<float> before(net.params().begin(), net.params().end());
    TrainConfig cfg;
    cfg.learning_rate = 0;
    cfg.max_epochs = 20;
    cfg.patience = patience;
    Trainer tr(net, cfg, latitude_weights(GridSpec::regular(n_lat, n_lon)));
    int callbacks = 0;
    const auto r = tr.fit(train_s, val_s, [&](const nn::EpochRecord&, const std::vector<float>&) { ++callbacks; });
    CHECK(r.history.size() == std::size_t(1 + patience));
    CHECK(callbacks == 1 + patience);
    CHECK(r.best_epoch == 1);
    CHECK(r.stopped_early);
    CHECK(std::equal(before.begin(), before.end(), net.params().begin()));
  }
}

TEST_CASE("training restores the minimum-validation parameters") {
  const int n_lat = 8, n_lon = 16;
  const auto train_s = identity_samples(8, n_lat, n_lon, 1, 1990);
  const auto val_s = identity_samples(4, n_lat, n_lon, 2, 2000);
  nn::DuneNet<float> net(tiny_model(n_lat, n_lon));
  net.init_kaiming(4);
  TrainConfig cfg;
  cfg.learning_rate = 0.05;  // large enough to oscillate
  cfg.max_epochs = 12;
  cfg.patience = 12;
  std::vector<std::vector<float>> snapshots;
  Trainer tr(net, cfg, latitude_weights(GridSpec::regular(n_lat, n_lon)));
  const auto r = tr.fit(train_s, val_s, [&](const nn::EpochRecord& rec, const std::vector<float>& best) {
    if (rec.is_best) snapshots.push_back(best);
  });
  double min_val = 1e300;
  int argmin = 0;
  for (const auto& h : r.history)
    if (h.val_loss < min_val) min_val = h.val_loss, argmin = h.epoch;
  CHECK(r.best_epoch == argmin);
  CHECK(r.best_val_loss == min_val);
  CHECK(std::equal(snapshots.back().begin(), snapshots.back().end(), net.params().begin()));
  CHECK(tr.evaluate(val_s) == doctest::Approx(min_val).epsilon(1e-9));
}

TEST_CASE("non-finite loss aborts with a numeric error") {
  const int n_lat = 8, n_lon = 16;
  auto train_s = identity_samples(4, n_lat, n_lon, 1, 1990);
  train_s[2].target.data[5] = std::numeric_limits<float>::quiet_NaN();
  const auto val_s = identity_samples(2, n_lat, n_lon, 2, 2000);
  nn::DuneNet<float> net(tiny_model(n_lat, n_lon));
  net.init_kaiming(4);
  TrainConfig cfg;
  cfg.max_epochs = 2;
  Trainer tr(net, cfg, latitude_weights(GridSpec::regular(n_lat, n_lon)));
  CHECK_THROWS_AS(tr.fit(train_s, val_s), NumericError);
}

TEST_CASE("sample building over a synthetic corpus") {
  ingest::SyntheticOptions o;
  o.n_lat = 8;
  o.n_lon = 16;
  o.years = 6;
  o.last_year = 1990;
  const auto c = ingest::generate_synthetic_corpus(o);
  std::vector<Field> k;
  for (const Field* f : c.constants.ordered()) k.push_back(*f);
  const auto stats = fit_norm_stats(c.t2m, c.constants.tisr_cycle, k);
  CHECK(stats.size() == norm_channel_names().size());
  for (int w : {1, 3, 12}) {
    CAPTURE(w);
    const auto b = make_bundle(c.t2m, c.constants.tisr_cycle, k, stats, PeriodKind::monthly, w,
                               ingest::TisrAlignment::target);
    const auto range = StampRange::parse("1987-01:1988-12");
    const auto s = build_samples(b, range);
    CHECK(s.size() == std::size_t(24 - w + 1));
    CHECK(s.front().input.c == 2 * w + 5);
    CHECK(s.front().target.c == w);
    CHECK(s.front().stamps.front() == Stamp::month(1987, 1).prev(w));
    CHECK(s.front().stamps.back() == Stamp::month(1987, 1).next(w - 1));
    const auto tiled = build_samples(b, range, w);
    CHECK(tiled.size() == std::size_t(24 / w));
    // TISR channels follow the target months.
    const auto& tisr0 = b.tisr_for(Stamp::month(1987, 1));
    CHECK(std::equal(tisr0.values.begin(), tisr0.values.end(), s.front().input.channel(w)));
  }
}
