// SPDX-License-Identifier: Apache-2.0
// Acceptance suite: one PASS/FAIL line per criterion. Arguments, if given,
// select criterion numbers to run. DUNE_ACCEPT_EPOCHS overrides the epoch
// budget of the synthetic training runs (default 15).
#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dune/app/pipeline.hpp"
#include "dune/common/config.hpp"
#include "dune/forecast/ensemble.hpp"
#include "dune/forecast/forecaster.hpp"
#include "dune/grid/climatology.hpp"
#include "dune/grid/normalize.hpp"
#include "dune/ingest/grid_file.hpp"
#include "dune/ingest/input_stack.hpp"
#include "dune/ingest/splits.hpp"
#include "dune/ingest/synthetic.hpp"
#include "dune/nn/dune_net.hpp"
#include "dune/train/samples.hpp"
#include "dune/train/schedule.hpp"
#include "dune/train/trainer.hpp"
#include "dune/verify/metrics.hpp"
#include "dune/verify/regions.hpp"

namespace fs = std::filesystem;
using namespace dune;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v, int precision = 4) {
  std::ostringstream os;
  os.precision(precision);
  os << v;
  return os.str();
}

double rel(double a, double b) {
  const double s = std::max(std::abs(a), std::abs(b));
  return s == 0 ? 0 : std::abs(a - b) / s;
}

template <class T>
std::int64_t ulps(T a, T b) {
  using I = std::conditional_t<sizeof(T) == 8, std::int64_t, std::int32_t>;
  auto key = [](T x) -> std::int64_t {
    const I i = std::bit_cast<I>(x);
    return i < 0 ? std::int64_t(std::numeric_limits<I>::min()) - i : std::int64_t(i);
  };
  const auto d = key(a) - key(b);
  return d < 0 ? -d : d;
}

GridPtr regular(std::size_t n_lat, std::size_t n_lon) { return make_grid(GridSpec::regular(n_lat, n_lon)); }

int epoch_budget() {
  if (const char* e = std::getenv("DUNE_ACCEPT_EPOCHS")) return std::max(1, std::atoi(e));
  return 15;
}

// ---- 1 -------------------------------------------------------------------

Outcome metric_oracles() {
  const auto t0 = Clock::now();
  const auto g = regular(8, 16);
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-4, 4);
  std::uniform_int_distribution<int> cat(0, 2);
  double worst_rmse = 0, worst_acc = 0, worst_l = 0, worst_hss = 0;

  // Latitude weights: cos(lat) normalised to sum to one.
  std::vector<double> c;
  double csum = 0;
  for (double lat : g->lat()) c.push_back(std::max(0.0, std::cos(lat * std::numbers::pi / 180))), csum += c.back();
  const auto L = latitude_weights(*g);
  for (std::size_t j = 0; j < c.size(); ++j) worst_l = std::max(worst_l, rel(L[j], c[j] / csum));

  for (int trial = 0; trial < 200; ++trial) {
    std::vector<float> f(g->size()), t(g->size());
    for (auto& x : f) x = static_cast<float>(u(rng));
    for (auto& x : t) x = static_cast<float>(u(rng));
    // Random box region, never empty.
    verify::RegionMask mask = verify::RegionMask::everywhere(g);
    if (trial % 2) {
      const std::size_t r0 = trial % 4, r1 = 4 + trial % 4;
      for (std::size_t i = 0; i < 8; ++i)
        for (std::size_t k = 0; k < 16; ++k) mask.cells[i * 16 + k] = i >= r0 && i <= r1;
    }
    long double se = 0, sw = 0, ft = 0, ff = 0, tt = 0;
    for (std::size_t i = 0; i < 8; ++i)
      for (std::size_t k = 0; k < 16; ++k) {
        const std::size_t q = i * 16 + k;
        if (!mask.contains(q)) continue;
        const long double w = c[i], a = f[q], b = t[q];
        se += w * (a - b) * (a - b);
        sw += w;
        ft += w * a * b;
        ff += w * a * a;
        tt += w * b * b;
      }
    worst_rmse = std::max(worst_rmse, rel(verify::rmse(f, t, *g, mask), double(std::sqrt(se / sw))));
    worst_acc = std::max(worst_acc, rel(verify::acc(f, t, *g, mask), double(ft / std::sqrt(ff * tt))));

    std::vector<verify::Category> fc(g->size()), ob(g->size());
    long matches = 0;
    for (std::size_t q = 0; q < fc.size(); ++q) {
      fc[q] = static_cast<verify::Category>(cat(rng));
      ob[q] = static_cast<verify::Category>(cat(rng));
      matches += fc[q] == ob[q];
    }
    const double T = static_cast<double>(fc.size()), E = T / 3;
    const double oracle = 100.0 * (static_cast<double>(matches) - E) / (T - E);
    worst_hss = std::max(worst_hss, rel(verify::hss(verify::contingency(fc, ob)), oracle));
  }
  const double secs = seconds_since(t0);
  const double worst = std::max({worst_rmse, worst_acc, worst_l, worst_hss});
  return {worst <= 1e-12 && secs < 10,
          "max rel err RMSE " + fmt(worst_rmse) + ", L " + fmt(worst_l) + ", ACC " + fmt(worst_acc) + ", HSS " +
              fmt(worst_hss) + " (tol 1e-12); " + fmt(secs, 3) + " s (limit 10)"};
}

// ---- 2 -------------------------------------------------------------------

Outcome hss_extremes() {
  auto with = [](long matches, long total) {
    verify::Contingency c;
    c.matches = matches;
    c.total = total;
    return verify::hss(c);
  };
  using C = verify::Category;
  const std::vector<C> obs{C::below, C::near, C::above, C::above, C::near, C::below};
  std::vector<C> wrong;
  for (C c : obs) wrong.push_back(c == C::near ? C::above : C::near);
  const double perfect = verify::hss(verify::contingency(obs, obs));
  const double worst = verify::hss(verify::contingency(wrong, obs));
  // matches == E == T/3 is 0 exactly: 3 * 40 - 120 == 0 in integers.
  const double chance = with(40, 120);
  return {perfect == 100.0 && worst == -50.0 && chance == 0.0 && with(7, 7) == 100.0 && with(0, 9) == -50.0,
          "perfect " + fmt(perfect) + ", all wrong " + fmt(worst) + ", H = E " + fmt(chance)};
}

// ---- 3 -------------------------------------------------------------------

Outcome channel_contract() {
  ingest::SyntheticOptions o;
  o.n_lat = 8;
  o.n_lon = 16;
  o.years = 2;
  const auto corpus = ingest::generate_synthetic_corpus(o);
  std::vector<Field> k;
  for (const Field* f : corpus.constants.ordered()) k.push_back(*f);
  const std::pair<int, int> table[] = {{1, 7}, {2, 9}, {3, 11}, {4, 13}, {6, 17}, {12, 29}};
  bool ok = true;
  std::string got;
  for (auto [w, expect] : table) {
    std::vector<Field> an(corpus.t2m.begin(), corpus.t2m.begin() + w);
    std::vector<Field> ti(corpus.constants.tisr_cycle.begin(), corpus.constants.tisr_cycle.begin() + w);
    const auto st = ingest::assemble_input_stack(an, ti, k, *corpus.t2m.front().grid);
    ok = ok && st.channels() == expect && ingest::input_channels_for(w) == expect;
    got += (got.empty() ? "" : ", ") + std::to_string(w) + ":" + std::to_string(st.channels());
  }
  return {ok, "W:channels " + got};
}

// ---- 4 -------------------------------------------------------------------

Outcome network_shapes() {
  bool ok = true;
  std::string detail;
  long head_mismatch = 0, roll_mismatch = 0;
  for (auto [h, w] : {std::pair{16, 32}, std::pair{32, 64}})
    for (int depth : {2, 4}) {
      nn::ModelConfig m = nn::ModelConfig::for_window(1, h, w);
      m.depth = depth;
      m.channels = depth == 2 ? std::vector<int>{4, 8, 16} : std::vector<int>{4, 8, 16, 32, 64};
      nn::DuneNet<float> net(m);
      net.init_kaiming(static_cast<std::uint64_t>(h + depth));
      std::mt19937_64 rng(static_cast<std::uint64_t>(w * depth));
      std::normal_distribution<double> n;
      nn::Tensor<float> x(7, h, w);
      for (auto& v : x.data) v = static_cast<float>(n(rng));
      const auto y = net.forward(x);
      ok = ok && y.mean.c == 1 && y.mean.h == h && y.mean.w == w;
      for (std::size_t q = 0; q < y.mean.data.size(); ++q) {
        double s = 0;
        for (const auto& head : y.heads) s += head.data[q];
        head_mismatch += y.mean.data[q] != static_cast<float>(s / nn::kHeadCount);
      }
      const int shift = 1 << depth;
      nn::Tensor<float> xr(x.c, x.h, x.w);
      for (int c = 0; c < x.c; ++c)
        for (int i = 0; i < h; ++i)
          for (int j = 0; j < w; ++j) xr.at(c, i, (j + shift) % w) = x.at(c, i, j);
      const auto yr = net.forward(xr);
      for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j)
          roll_mismatch += std::bit_cast<std::uint32_t>(y.mean.at(0, i, j)) !=
                           std::bit_cast<std::uint32_t>(yr.mean.at(0, i, (j + shift) % w));
      detail += (detail.empty() ? "" : ", ") + std::to_string(h) + "x" + std::to_string(w) + "/d" +
                std::to_string(depth) + " -> " + std::to_string(y.mean.h) + "x" + std::to_string(y.mean.w);
    }
  return {ok && head_mismatch == 0 && roll_mismatch == 0,
          detail + "; head-mean mismatches " + std::to_string(head_mismatch) + ", roll mismatches " +
              std::to_string(roll_mismatch)};
}

// ---- 5 -------------------------------------------------------------------

Outcome gradient_check() {
  const auto t0 = Clock::now();
  nn::ModelConfig m;
  m.depth = 2;
  m.channels = {2, 4, 8};
  m.in_channels = 3;
  nn::DuneNet<double> net(m);
  net.init_kaiming(5);
  std::mt19937_64 rng(10);
  std::normal_distribution<double> n;
  nn::Tensor<double> x(3, 8, 8), r(1, 8, 8);
  for (auto& v : x.data) v = n(rng);
  for (auto& v : r.data) v = n(rng);
  auto loss = [&] {
    const auto y = net.forward(x);
    double s = 0;
    for (std::size_t q = 0; q < r.data.size(); ++q) s += y.mean.data[q] * r.data[q];
    return s;
  };
  nn::DuneNet<double>::Activations acts;
  net.forward(x, &acts);
  std::vector<double> g(net.parameter_count(), 0.0);
  net.backward(acts, r, g);
  std::uniform_int_distribution<std::size_t> pick(0, net.parameter_count() - 1);
  double worst = 0;
  const int samples = 64;
  for (int t = 0; t < samples; ++t) {
    const std::size_t k = pick(rng);
    const double keep = net.params()[k], h = 1e-6;
    net.params()[k] = keep + h;
    const double up = loss();
    net.params()[k] = keep - h;
    const double dn = loss();
    net.params()[k] = keep;
    const double fd = (up - dn) / (2 * h);
    worst = std::max(worst, std::abs(fd - g[k]) / std::max(1e-6, std::max(std::abs(fd), std::abs(g[k]))));
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-3 && secs < 120, std::to_string(samples) + " weights, max rel err " + fmt(worst) +
                                          " (tol 1e-3); " + fmt(secs, 3) + " s (limit 120)"};
}

// ---- 6 -------------------------------------------------------------------

Outcome round_trips() {
  const std::size_t n_lat = 250, n_lon = 400;  // 10^5 cells
  const auto g = regular(n_lat, n_lon);
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> temp(200, 330);
  std::vector<Field> means;
  for (int m = 1; m <= 12; ++m) {
    Field f(Variable::blended_t, Stamp::month(2001, m), g);
    for (auto& v : f.values) v = static_cast<float>(temp(rng));
    means.push_back(std::move(f));
  }
  const ClimatologyTable clim(PeriodKind::monthly, 2001, 2001, means, {}, {});
  Field x(Variable::blended_t, Stamp::month(2030, 7), g);
  for (auto& v : x.values) v = static_cast<float>(temp(rng));
  const Field back = deanomalize(anomalize(x, clim), clim);
  std::int64_t worst_anom = 0;
  for (std::size_t k = 0; k < x.size(); ++k) worst_anom = std::max(worst_anom, ulps(back.values[k], x.values[k]));

  std::vector<double> vals(x.size());
  for (auto& v : vals) v = temp(rng);
  const auto [lo, hi] = std::minmax_element(vals.begin(), vals.end());
  const NormStats st("t", *lo, *hi);
  std::int64_t worst_norm = 0;
  for (double v : vals) worst_norm = std::max(worst_norm, ulps(denormalize(normalize(v, st), st), v));
  return {worst_anom <= 4 && worst_norm <= 4, std::to_string(x.size()) + " values; anomaly round trip max " +
                                                  std::to_string(worst_anom) + " ulp, normalize round trip max " +
                                                  std::to_string(worst_norm) + " ulp (tol 4)"};
}

// ---- 7 -------------------------------------------------------------------

Outcome split_counts() {
  const auto plan = ingest::SplitPlan::from_config(Config::defaults());
  const auto m = ingest::count_periods(plan, PeriodKind::monthly);
  const auto s = ingest::count_pairs(plan, PeriodKind::seasonal);
  const auto y = ingest::count_periods(plan, PeriodKind::annual);
  auto triple = [](const ingest::SplitCounts& c) {
    return std::to_string(c.train) + "/" + std::to_string(c.val) + "/" + std::to_string(c.test);
  };
  const bool ok = m.train == 444 && m.val == 24 && m.test == 60 && s.train == 142 && s.val == 6 && s.test == 18 &&
                  y.train == 37 && y.val == 2 && y.test == 5;
  return {ok, "months " + triple(m) + " (want 444/24/60), seasons " + triple(s) + " (want 142/6/18), years " +
                  triple(y) + " (want 37/2/5)"};
}

// ---- 8, 9, 10: synthetic end-to-end ------------------------------------

struct SyntheticRun {
  fs::path root;
  std::unique_ptr<app::Context> ctx;
  nlohmann::json train_w1, train_w12, score;
  double seconds_w1 = 0;
  std::string error;
};

SyntheticRun& synthetic_run() {
  static SyntheticRun run = [] {
    SyntheticRun r;
    r.root = fs::current_path() / "acceptance_work";
    fs::remove_all(r.root);
    r.ctx = std::make_unique<app::Context>(r.root);
    r.ctx->layers.environment = false;
    const int epochs = epoch_budget();
    r.ctx->layers.overrides = {{"train.max_epochs", std::to_string(epochs)},
                               {"train.patience", std::to_string(epochs)},
                               {"model.seed", "7"},
                               {"log.level", "warn"},
                               {"train.seed", "7"}};
    r.ctx->resolve();
    try {
      const auto t0 = Clock::now();
      ingest::SyntheticOptions o;
      o.n_lat = 32;
      o.n_lon = 64;
      o.years = 42;
      o.seed = 7;
      std::cerr << "synthesizing the 32x64, 42-year corpus\n";
      app::run_synth(*r.ctx, o);
      std::cerr << "training W=1 for up to " << epochs << " epochs\n";
      r.train_w1 = app::run_train(*r.ctx);
      app::run_forecast(*r.ctx, std::nullopt);
      r.seconds_w1 = seconds_since(t0);
      std::cerr << "training W=12 for up to " << epochs << " epochs\n";
      r.ctx->layers.overrides.emplace_back("model.window", "12");
      r.ctx->resolve();
      r.train_w12 = app::run_train(*r.ctx);
      app::run_forecast(*r.ctx, std::nullopt);
      r.ctx->layers.overrides.pop_back();
      r.ctx->resolve();
      r.score = app::run_score(*r.ctx, {});
    } catch (const std::exception& e) {
      r.error = e.what();
    }
    return r;
  }();
  return run;
}

double metric(const nlohmann::json& score, const std::string& source, const char* what) {
  const auto& v = score.at("aggregate").at(source).at("global").at(what);
  return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
}

Outcome synthetic_skill() {
  auto& r = synthetic_run();
  if (!r.error.empty()) return {false, "pipeline failed: " + r.error};
  const double d_rmse = metric(r.score, "dune_w1", "rmse"), d_acc = metric(r.score, "dune_w1", "acc");
  const double c_rmse = metric(r.score, "climatology", "rmse"), c_acc = metric(r.score, "climatology", "acc");
  const double p_rmse = metric(r.score, "persistence_prior_year", "rmse");
  const double p_acc = metric(r.score, "persistence_prior_year", "acc");
  const bool ok = d_rmse <= 0.9 * c_rmse && d_rmse <= 0.9 * p_rmse && d_acc > c_acc && d_acc > p_acc &&
                  r.seconds_w1 < 1800;
  return {ok, "test RMSE dune " + fmt(d_rmse) + " vs climatology " + fmt(c_rmse) + ", prior-year " + fmt(p_rmse) +
                  " (need <= 0.9x); ACC dune " + fmt(d_acc) + " vs " + fmt(c_acc) + ", " + fmt(p_acc) + "; " +
                  std::to_string(r.train_w1.at("epochs").get<int>()) + " epochs, best " +
                  std::to_string(r.train_w1.at("best_epoch").get<int>()) + ", " + fmt(r.seconds_w1, 4) +
                  " s (limit 1800)"};
}

Outcome window_trend() {
  auto& r = synthetic_run();
  if (!r.error.empty()) return {false, "pipeline failed: " + r.error};
  const double w1 = metric(r.score, "dune_w1", "rmse"), w12 = metric(r.score, "dune_w12", "rmse");
  return {w12 >= w1 * (1 - 0.05), "mean test RMSE W=1 " + fmt(w1) + ", W=12 " + fmt(w12) + " (need W=12 >= 0.95 x W=1)"};
}

Outcome ensemble_inference() {
  // Identity on a fresh network over a small corpus: an inference property.
  ingest::SyntheticOptions o;
  o.n_lat = 16;
  o.n_lon = 32;
  o.years = 8;
  const auto corpus = ingest::generate_synthetic_corpus(o);
  const auto clim = build_climatology(corpus.t2m, 2016, 2021, false);
  std::vector<Field> anomalies, constants;
  for (const auto& f : corpus.t2m) anomalies.push_back(anomalize(f, clim));
  for (const Field* f : corpus.constants.ordered()) constants.push_back(*f);
  nn::Checkpoint ck;
  ck.model = nn::ModelConfig::for_window(1, 16, 32);
  ck.model.depth = 2;
  ck.model.channels = {4, 8, 16};
  ck.grid = corpus.t2m.front().grid;
  ck.norm = train::fit_norm_stats(anomalies, corpus.constants.tisr_cycle, constants);
  nn::DuneNet<float> net(ck.model);
  net.init_kaiming(3);
  ck.params.assign(net.params().begin(), net.params().end());
  const forecast::Forecaster f(ck);
  const auto range = StampRange::parse("2019-01:2023-12");
  const auto single_b = f.bundle(anomalies, corpus.constants.tisr_cycle, constants);
  const auto single = f.evaluate_blocks(single_b, range);
  const std::vector<train::SeriesBundle> same(10, single_b);
  const auto e = forecast::ensemble_inference(f, same, range);
  long nonzero_std = 0, mean_diff = 0;
  for (std::size_t t = 0; t < e.mean.size(); ++t)
    for (std::size_t k = 0; k < e.mean[t].size(); ++k) {
      nonzero_std += e.std[t].values[k] != 0.0f;
      mean_diff += e.mean[t].values[k] != single[t].anomaly.values[k];
    }
  const bool identity_ok = e.sample_count == 600 && nonzero_std == 0 && mean_diff == 0;

  // Perturbed members through the pipeline on the trained synthetic model.
  auto& r = synthetic_run();
  if (!r.error.empty()) return {false, "pipeline failed: " + r.error};
  nlohmann::json ens;
  try {
    ens = app::run_ensemble(*r.ctx, std::nullopt, 0);
  } catch (const std::exception& ex) {
    return {false, std::string("ensemble run failed: ") + ex.what()};
  }
  const auto std_fields = ingest::read_grid_file(r.root / "ensemble" / "monthly" / "std.dgf");
  double max_std = 0, sum_std = 0;
  bool finite = true;
  std::size_t cells = 0;
  for (const auto& sd : std_fields)
    for (float v : sd.values) {
      finite = finite && std::isfinite(v);
      max_std = std::max(max_std, double(v));
      sum_std += v;
      ++cells;
    }
  const long samples = ens.at("samples").get<long>();
  const bool spread_ok = finite && max_std > 0 && samples == 600;
  return {identity_ok && spread_ok, "identical members: std nonzero at " + std::to_string(nonzero_std) +
                                        " cells, mean differs at " + std::to_string(mean_diff) + ", " +
                                        std::to_string(e.sample_count) + " samples; perturbed: " +
                                        std::to_string(samples) + " samples, mean spread " +
                                        fmt(sum_std / std::max<std::size_t>(1, cells)) + " K, max " + fmt(max_std) + " K"};
}

// ---- 11 ------------------------------------------------------------------

std::vector<train::Sample> plateau_samples(int count, std::uint64_t seed, int first_year) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  std::vector<train::Sample> out;
  for (int s = 0; s < count; ++s) {
    train::Sample x{Stamp::month(first_year, 1).next(s), nn::Tensor<float>(7, 8, 16), nn::Tensor<float>(1, 8, 16), {}};
    for (auto& v : x.input.data) v = static_cast<float>(0.5 + 0.1 * n(rng));
    for (std::size_t q = 0; q < x.target.data.size(); ++q) x.target.data[q] = x.input.data[q];
    x.stamps = {x.first_target.prev(), x.first_target};
    out.push_back(std::move(x));
  }
  return out;
}

Outcome schedule_and_stopping() {
  const train::CosineSchedule s{1e-3, 225, train::LrHold::last_nonzero};
  double worst = 0;
  for (int e = 0; e < 225; ++e)
    worst = std::max(worst, std::abs(s.lr_at(e) - 0.5e-3 * (1 + std::cos(e * std::numbers::pi / 225))));
  const bool sched_ok = s.lr_at(0) == 1e-3 && worst <= 1e-12;

  nn::ModelConfig m = nn::ModelConfig::for_window(1, 8, 16);
  m.depth = 2;
  m.channels = {4, 8, 16};
  const auto train_s = plateau_samples(6, 1, 1990), val_s = plateau_samples(4, 2, 2000);
  const auto L = latitude_weights(GridSpec::regular(8, 16));

  // Frozen learning rate: the validation loss never improves after epoch 1.
  const int patience = 5;
  nn::DuneNet<float> frozen(m);
  frozen.init_kaiming(4);
  const std::vector<float> before(frozen.params().begin(), frozen.params().end());
  train::TrainConfig cfg;
  cfg.learning_rate = 0;
  cfg.max_epochs = 50;
  cfg.patience = patience;
  const auto r = train::Trainer(frozen, cfg, L).fit(train_s, val_s);
  const bool stop_ok = r.history.size() == std::size_t(1 + patience) && r.best_epoch == 1 && r.stopped_early &&
                       std::equal(before.begin(), before.end(), frozen.params().begin());

  // Noisy run: the restored parameters reproduce the minimum validation loss.
  nn::DuneNet<float> noisy(m);
  noisy.init_kaiming(4);
  cfg.learning_rate = 0.05;
  cfg.max_epochs = 10;
  cfg.patience = 3;
  train::Trainer tr(noisy, cfg, L);
  const auto r2 = tr.fit(train_s, val_s);
  double min_val = 1e300;
  for (const auto& h : r2.history) min_val = std::min(min_val, h.val_loss);
  const double restored = tr.evaluate(val_s);
  const bool restore_ok = r2.best_val_loss == min_val && rel(restored, min_val) < 1e-9;
  return {sched_ok && stop_ok && restore_ok,
          "lr_at(0) " + fmt(s.lr_at(0)) + ", cosine max abs err " + fmt(worst) + "; plateau run " +
              std::to_string(r.history.size()) + " epochs with patience " + std::to_string(patience) +
              " (best epoch " + std::to_string(r.best_epoch) + "); restored val loss " + fmt(restored, 8) +
              " vs minimum " + fmt(min_val, 8)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"metric oracle equivalence", metric_oracles},
      {"HSS extremes", hss_extremes},
      {"channel-count contract", channel_contract},
      {"network shape and head averaging", network_shapes},
      {"gradient correctness", gradient_check},
      {"round trips", round_trips},
      {"split counts", split_counts},
      {"synthetic end-to-end skill", synthetic_skill},
      {"moving-window degradation", window_trend},
      {"ensemble inference", ensemble_inference},
      {"early stopping and scheduler", schedule_and_stopping},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!only.empty() && !only.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << id << ". " << criteria[i].first << ": " << o.detail
              << std::endl;
  }
  std::cout << (failed ? std::to_string(failed) + " criteria failed" : std::string("all criteria passed")) << std::endl;
  return failed ? 1 : 0;
}
