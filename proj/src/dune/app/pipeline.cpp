// SPDX-License-Identifier: Apache-2.0
#include "dune/app/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "dune/app/plot.hpp"
#include "dune/common/error.hpp"
#include "dune/common/hash.hpp"
#include "dune/forecast/aggregate.hpp"
#include "dune/forecast/ensemble.hpp"
#include "dune/forecast/forecaster.hpp"
#include "dune/forecast/regrid.hpp"
#include "dune/ingest/blend.hpp"
#include "dune/ingest/dataset.hpp"
#include "dune/ingest/grid_file.hpp"
#include "dune/ingest/splits.hpp"
#include "dune/train/trainer.hpp"
#include "dune/verify/score.hpp"

namespace dune::app {

namespace fs = std::filesystem;
using nlohmann::json;

void Context::resolve() {
  Config c = Config::defaults();
  if (fs::exists(ws.data_config())) c.merge_file(ws.data_config());
  for (const auto& f : layers.files) c.merge_file(f);
  if (layers.environment) c.merge_environment();
  for (const auto& [k, v] : layers.overrides) c.set(k, v);
  config = std::move(c);
  level = parse_log_level(config.get("log.level"));
}

void Context::log(LogLevel lvl, const std::string& msg) const {
  if (static_cast<int>(lvl) > static_cast<int>(level)) return;
  if (sink) {
    sink(lvl, msg);
    return;
  }
  static const char* const names[] = {"error", "warn", "info", "debug"};
  std::cerr << "[" << names[static_cast<int>(lvl)] << "] " << msg << '\n';
}

namespace {

void write_text(const fs::path& p, const std::string& text) { ingest::write_file_atomic(p, text); }

std::pair<int, int> parse_years(const std::string& text) {
  const auto r = StampRange::parse(text);
  return {r.first.year, r.last.year};
}

PeriodKind mode_of(const Config& cfg) { return parse_period_kind(cfg.get("forecast.mode")); }
int window_of(const Config& cfg) { return static_cast<int>(cfg.get_int("model.window")); }

std::string dune_source(int window) { return "dune_w" + std::to_string(window); }

nn::ModelConfig model_config(const Config& cfg, const GridSpec& grid) {
  nn::ModelConfig m = nn::ModelConfig::for_window(window_of(cfg), static_cast<int>(grid.n_lat()),
                                                  static_cast<int>(grid.n_lon()));
  m.depth = static_cast<int>(cfg.get_int("model.depth"));
  m.channels = cfg.get_int_list("model.channels");
  m.validate();
  return m;
}

ClimatologyPair build_climatology_pair(const Config& cfg, const PreparedData& d, PeriodKind kind) {
  const auto periods = forecast::aggregate_periods(d.monthly, kind);
  const auto [m0, m1] = parse_years(cfg.get("climatology.mean_base"));
  const auto [p0, p1] = parse_years(cfg.get("climatology.percentile_base"));
  return {build_climatology(periods, m0, m1, false), build_climatology(periods, p0, p1, true)};
}

/// Everything a mode-specific command needs.
struct ModeData {
  PeriodKind kind;
  ClimatologyPair clim;
  std::vector<Field> anomalies;
  std::map<Stamp, Field> anomaly_map;
  std::vector<Field> tisr_cycle;
  ingest::SplitPlan plan;
};

ModeData load_mode(Context& ctx, const PreparedData& d, PeriodKind kind) {
  ModeData m;
  m.kind = kind;
  if (has_climatology(ctx.ws, kind)) {
    m.clim = load_climatology(ctx.ws, kind);
  } else {
    ctx.log(LogLevel::info, "building " + std::string(to_string(kind)) + " climatology");
    m.clim = build_climatology_pair(ctx.config, d, kind);
    save_climatology(ctx.ws, m.clim);
  }
  for (const auto& p : forecast::aggregate_periods(d.monthly, kind)) {
    Field a = anomalize(p, m.clim.mean);
    m.anomaly_map.emplace(*a.stamp, a);
    m.anomalies.push_back(std::move(a));
  }
  m.tisr_cycle = forecast::cycle_for_kind(d.tisr_cycle, kind);
  m.plan = ingest::SplitPlan::from_config(ctx.config);
  return m;
}

std::vector<Stamp> test_periods(const ModeData& m) { return ingest::periods_inside(m.plan.test, m.kind); }

std::vector<Field> tisr_from_series(const std::vector<Field>& monthly) {
  std::vector<Field> cycle;
  std::vector<int> count(12, 0);
  for (int mth = 1; mth <= 12; ++mth) cycle.emplace_back(Variable::tisr, std::nullopt, monthly.front().grid, 0.0f);
  std::vector<std::vector<double>> acc(12, std::vector<double>(monthly.front().size(), 0.0));
  for (const auto& f : monthly) {
    const int s = f.stamp->slot - 1;
    for (std::size_t k = 0; k < f.size(); ++k) acc[s][k] += f.values[k];
    ++count[s];
  }
  for (int s = 0; s < 12; ++s) {
    if (count[s] == 0) throw DataError("TISR series has no data for calendar month " + std::to_string(s + 1));
    for (std::size_t k = 0; k < cycle[s].size(); ++k) cycle[s].values[k] = static_cast<float>(acc[s][k] / count[s]);
  }
  return cycle;
}

json stamps_json(const std::vector<Field>& fs_) {
  json a = json::array();
  for (const auto& f : fs_) a.push_back(f.stamp->str());
  return a;
}

}  // namespace

// ---- synth ----

Summary run_synth(Context& ctx, const ingest::SyntheticOptions& opt) {
  if (opt.years < 11) throw UsageError("synthetic corpus needs at least 11 years (3 history, 1 train, 2 val, 5 test)");
  ctx.log(LogLevel::info, "generating synthetic corpus " + std::to_string(opt.n_lat) + "x" + std::to_string(opt.n_lon) +
                              ", " + std::to_string(opt.years) + " years, seed " + std::to_string(opt.seed));
  auto corpus = ingest::generate_synthetic_corpus(opt);
  const auto raw = ctx.ws.data_dir() / "raw";
  ingest::write_grid_file(raw / "t2m.dgf", corpus.t2m);
  ingest::write_grid_file(raw / "sst.dgf", corpus.sst);
  const auto& cc = corpus.constants;
  for (const Field* f : cc.ordered()) ingest::write_grid_file(raw / (std::string(to_string(f->variable)) + ".dgf"), std::span(f, 1));
  std::vector<Field> tisr_series;
  for (const auto& t : corpus.t2m) {
    Field f = cc.tisr_for(*t.stamp);
    f.stamp = t.stamp;
    tisr_series.push_back(std::move(f));
  }
  ingest::write_grid_file(raw / "tisr.dgf", tisr_series);

  const int first = opt.last_year - opt.years + 1;
  const int train0 = first + 3, val0 = opt.last_year - 6, test0 = opt.last_year - 4;
  std::ostringstream cfg;
  cfg << "# written by synth\n"
      << "split.train = " << train0 << "-01:" << val0 - 1 << "-12\n"
      << "split.val = " << val0 << "-01:" << test0 - 1 << "-12\n"
      << "split.test = " << test0 << "-01:" << opt.last_year << "-12\n"
      << "climatology.mean_base = " << train0 << ":" << val0 - 1 << "\n"
      << "climatology.percentile_base = " << train0 << ":" << val0 - 1 << "\n";
  write_text(ctx.ws.data_config(), cfg.str());
  ctx.resolve();
  fs::remove_all(ctx.ws.climatology_dir());

  auto summary = run_ingest(ctx, {raw}, std::nullopt);
  summary["command"] = "synth";
  summary["seed"] = opt.seed;
  summary["splits"] = {{"train", ctx.config.get("split.train")},
                       {"val", ctx.config.get("split.val")},
                       {"test", ctx.config.get("split.test")}};
  Manifest{"synth", {}, {ctx.ws.data_dir().string()}, {{"seed", std::to_string(opt.seed)}}}.write(
      ctx.ws.data_dir() / "manifest.json", ctx.config);
  return summary;
}

// ---- ingest ----

Summary run_ingest(Context& ctx, const std::vector<fs::path>& sources, const std::optional<StampRange>& range) {
  if (sources.empty()) throw UsageError("ingest needs at least one --source");
  std::map<Variable, std::vector<Field>> found;
  const Variable wanted[] = {Variable::t2m,       Variable::sst, Variable::lsm, Variable::slt,
                             Variable::orography, Variable::cvh, Variable::cvl, Variable::tisr};
  for (Variable v : wanted) {
    for (const auto& src : sources) {
      if (found.count(v)) break;
      try {
        auto got = ingest::read_monthly_dataset(src, std::span(&v, 1), ingest::is_constant(v) ? std::nullopt : range);
        found[v] = std::move(got.at(v));
      } catch (const DataError& e) {
        const std::string what = e.what();
        if (what.find("not present") == std::string::npos && what.find("no variable") == std::string::npos) throw;
      }
    }
  }
  for (Variable v : wanted)
    if (v != Variable::sst && !found.count(v))
      throw DataError("variable '" + std::string(to_string(v)) + "' not found in any source");

  const double threshold = ctx.config.get_double("ingest.lsm_threshold");
  const PoleRow drop = parse_pole_row(ctx.config.get("grid.drop_pole_row"));
  const auto& data_grid = *found[Variable::t2m].front().grid;
  const GridPtr model_grid = ingest::model_grid_for(data_grid, drop);
  auto to_model = [&](const Field& f) { return ingest::to_model_grid(f, drop, model_grid); };

  PreparedData d;
  d.grid = model_grid;
  const Field lsm_data = found[Variable::lsm].front();
  std::size_t fallback = 0;
  const auto& t2m = found[Variable::t2m];
  std::map<Stamp, const Field*> sst;
  if (found.count(Variable::sst))
    for (const auto& f : found[Variable::sst]) sst[*f.stamp] = &f;
  else
    ctx.log(LogLevel::warn, "no SST found; the blended temperature is T2m everywhere");
  for (const auto& t : t2m) {
    Field blended;
    if (auto it = sst.find(*t.stamp); it != sst.end()) {
      auto r = ingest::blend_sst_t2m(t, *it->second, lsm_data, threshold);
      fallback += r.fallback_count;
      blended = std::move(r.field);
    } else {
      if (!sst.empty()) throw DataError("SST is missing for " + t.stamp->str());
      blended = t;
      blended.variable = Variable::blended_t;
    }
    d.monthly.push_back(to_model(blended));
  }
  for (Variable v : {Variable::lsm, Variable::slt, Variable::orography, Variable::cvh, Variable::cvl})
    d.constants.push_back(to_model(found[v].front()));
  std::vector<Field> tisr_model;
  for (const auto& f : found[Variable::tisr]) tisr_model.push_back(to_model(f));
  d.tisr_cycle = tisr_from_series(tisr_model);
  save_prepared(ctx.ws, d);

  const int depth = static_cast<int>(ctx.config.get_int("model.depth"));
  if (!model_grid->divisible_by(std::size_t(1) << depth))
    ctx.log(LogLevel::warn, "model grid " + model_grid->describe() + " is not divisible by 2^" + std::to_string(depth));
  if (fallback) ctx.log(LogLevel::warn, std::to_string(fallback) + " ocean cells had no SST; T2m used there");

  std::vector<std::string> ins;
  for (const auto& s : sources) ins.push_back(s.string());
  Manifest{"ingest", ins, {ctx.ws.data_dir().string()}, {{"sst_fallback_cells", std::to_string(fallback)}}}.write(
      ctx.ws.data_dir() / "ingest_manifest.json", ctx.config);
  ctx.log(LogLevel::info, "prepared " + std::to_string(d.monthly.size()) + " months on " + model_grid->describe());
  return {{"command", "ingest"},
          {"months", d.monthly.size()},
          {"first", d.monthly.front().stamp->str()},
          {"last", d.monthly.back().stamp->str()},
          {"grid", model_grid->describe()},
          {"sst_fallback_cells", fallback}};
}

// ---- climatology ----

Summary run_climatology(Context& ctx) {
  const auto d = load_prepared(ctx.ws);
  json out = {{"command", "climatology"}};
  std::vector<std::string> outputs;
  for (PeriodKind k : {PeriodKind::monthly, PeriodKind::seasonal, PeriodKind::annual}) {
    const auto pair = build_climatology_pair(ctx.config, d, k);
    save_climatology(ctx.ws, pair);
    out[std::string(to_string(k))] = {{"hash", climatology_hash(pair.mean)}, {"slots", pair.mean.means().size()}};
    outputs.push_back((ctx.ws.climatology_dir() / (std::string(to_string(k)) + "_mean.dgf")).string());
  }
  Manifest{"climatology", {ctx.ws.data_dir().string()}, outputs, {}}.write(ctx.ws.climatology_dir() / "manifest.json",
                                                                         ctx.config);
  ctx.log(LogLevel::info, "climatologies written to " + ctx.ws.climatology_dir().string());
  return out;
}

// ---- train ----

Summary run_train(Context& ctx) {
  const auto t_start = std::chrono::steady_clock::now();
  const auto d = load_prepared(ctx.ws);
  const PeriodKind kind = mode_of(ctx.config);
  const int window = window_of(ctx.config);
  auto m = load_mode(ctx, d, kind);
  const auto tcfg = train::TrainConfig::from_config(ctx.config);
  const auto alignment = ingest::parse_tisr_alignment(ctx.config.get("stack.tisr_alignment"));

  std::vector<Field> train_anoms;
  for (const auto& a : m.anomalies)
    if (a.stamp->months().front() >= m.plan.train.first && a.stamp->months().back() <= m.plan.train.last)
      train_anoms.push_back(a);
  const auto stats = train::fit_norm_stats(train_anoms, m.tisr_cycle, d.constants);
  const auto bundle = train::make_bundle(m.anomalies, m.tisr_cycle, d.constants, stats, kind, window, alignment);
  const auto train_s = train::build_samples(bundle, m.plan.train);
  const auto val_s = train::build_samples(bundle, m.plan.val);
  const auto test_s = train::build_samples(bundle, m.plan.test, window);
  ctx.log(LogLevel::info, std::string(to_string(kind)) + " W=" + std::to_string(window) + ": " +
                              std::to_string(train_s.size()) + " train / " + std::to_string(val_s.size()) + " val / " +
                              std::to_string(test_s.size()) + " test samples");

  nn::Checkpoint ckpt;
  ckpt.model = model_config(ctx.config, *d.grid);
  ckpt.mode = kind;
  ckpt.window = window;
  ckpt.tisr_alignment = alignment;
  ckpt.seed = static_cast<std::uint64_t>(ctx.config.get_int("model.seed"));
  ckpt.grid = d.grid;
  ckpt.norm = stats;
  ckpt.climatology_hash = climatology_hash(m.clim.mean);
  for (const auto& [k, v] : ctx.config.entries()) ckpt.config.emplace_back(k, v);

  nn::DuneNet<float> net(ckpt.model);
  net.init_kaiming(ckpt.seed);
  ctx.log(LogLevel::info, "model parameters: " + std::to_string(net.parameter_count()));

  const auto dir = ctx.ws.model_dir(kind, window);
  fs::create_directories(dir);
  const auto ckpt_path = dir / "checkpoint.dck";
  std::ofstream log_file(dir / "train_log.jsonl", std::ios::trunc);
  train::Trainer trainer(net, tcfg, latitude_weights(*d.grid));
  auto on_epoch = [&](const nn::EpochRecord& r, const std::vector<float>& best) {
    json line = {{"epoch", r.epoch}, {"lr", r.learning_rate}, {"train_loss", r.train_loss},
                 {"val_loss", r.val_loss}, {"is_best", r.is_best}};
    if (!std::isnan(r.test_loss)) line["test_loss"] = r.test_loss;
    log_file << line.dump() << '\n' << std::flush;
    ckpt.history.push_back(r);
    if (r.is_best) {
      for (auto& h : ckpt.history) h.is_best = h.epoch == r.epoch;
      ckpt.best_epoch = r.epoch;
      ckpt.params = best;
      nn::save_checkpoint(ckpt_path, ckpt);
    }
    char buf[160];
    std::snprintf(buf, sizeof buf, "epoch %d lr %.3g train %.5f val %.5f%s", r.epoch, r.learning_rate, r.train_loss,
                  r.val_loss, r.is_best ? " *" : "");
    ctx.log(LogLevel::info, buf);
  };
  const auto result = trainer.fit(train_s, val_s, on_epoch, &test_s);

  // No gradient step may have touched a validation or test period.
  for (const auto& s : result.audit)
    for (const auto& month : s.months()) {
      const auto split = m.plan.split_of(month);
      if (split && *split != ingest::Split::train)
        throw Error("internal: gradient step read " + s.str() + " from the " + std::string(to_string(*split)) + " split");
    }

  ckpt.params.assign(net.params().begin(), net.params().end());
  nn::save_checkpoint(ckpt_path, ckpt);
  std::ostringstream csv;
  csv << "epoch,lr,train_loss,val_loss,test_loss,is_best\n";
  csv.precision(10);
  for (const auto& r : ckpt.history)
    csv << r.epoch << ',' << r.learning_rate << ',' << r.train_loss << ',' << r.val_loss << ','
        << (std::isnan(r.test_loss) ? std::string() : std::to_string(r.test_loss)) << ',' << (r.is_best ? 1 : 0) << '\n';
  write_text(dir / "loss_history.csv", csv.str());
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  Manifest{"train",
           {ctx.ws.data_dir().string(), ctx.ws.climatology_dir().string()},
           {ckpt_path.string(), (dir / "train_log.jsonl").string(), (dir / "loss_history.csv").string()},
           {{"checkpoint_id", ckpt.id()}, {"stats_hash", ckpt.stats_hash()}}}
      .write(dir / "manifest.json", ctx.config);
  ctx.log(LogLevel::info, "best epoch " + std::to_string(result.best_epoch) + ", checkpoint " + ckpt_path.string());
  return {{"command", "train"},
          {"mode", to_string(kind)},
          {"window", window},
          {"epochs", result.history.size()},
          {"best_epoch", result.best_epoch},
          {"best_val_loss", result.best_val_loss},
          {"initial_val_loss", result.initial_val_loss},
          {"stopped_early", result.stopped_early},
          {"train_samples", train_s.size()},
          {"val_samples", val_s.size()},
          {"parameters", net.parameter_count()},
          {"checkpoint", ckpt_path.string()},
          {"checkpoint_id", ckpt.id()},
          {"seconds", secs}};
}

// ---- forecast / rollout ----

namespace {

forecast::Forecaster load_forecaster(Context& ctx, PeriodKind kind, int window, const ModeData& m) {
  const auto path = ctx.ws.model_dir(kind, window) / "checkpoint.dck";
  if (!fs::exists(path)) throw DataError("no checkpoint at " + path.string() + " (run `train` first)");
  forecast::Forecaster f(nn::load_checkpoint(path));
  f.check_climatology(m.clim.mean);
  return f;
}

void write_results(const fs::path& dir, const std::vector<forecast::ForecastResult>& results, const ModeData& m,
                   const std::string& ckpt_id, const std::string& command, const Config& cfg) {
  std::vector<Field> anom, absolute;
  json leads = json::object();
  for (auto r : results) {
    forecast::attach_absolute(r, m.clim.mean);
    leads[r.stamp.str()] = r.lead;
    anom.push_back(r.anomaly);
    absolute.push_back(*r.absolute);
  }
  save_forecasts(dir, anom, &absolute);
  write_text(dir / "leads.json", leads.dump(2));
  Manifest{command,
           {},
           {(dir / "anomaly.dgf").string(), (dir / "absolute.dgf").string()},
           {{"checkpoint_id", ckpt_id},
            {"mode", std::string(to_string(m.kind))},
            {"stamps", stamps_json(anom).dump()}}}
      .write(dir / "manifest.json", cfg);
}

}  // namespace

Summary run_forecast(Context& ctx, const std::optional<StampRange>& range) {
  const auto d = load_prepared(ctx.ws);
  const PeriodKind kind = mode_of(ctx.config);
  const int window = window_of(ctx.config);
  const auto m = load_mode(ctx, d, kind);
  const auto f = load_forecaster(ctx, kind, window, m);
  const auto bundle = f.bundle(m.anomalies, m.tisr_cycle, d.constants);
  const auto months = range.value_or(m.plan.test);
  const auto t0 = std::chrono::steady_clock::now();
  const auto results = f.evaluate_blocks(bundle, months);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (results.empty()) throw DataError("no forecast periods inside " + months.str());
  const auto dir = ctx.ws.forecast_dir(dune_source(window), kind);
  write_results(dir, results, m, f.checkpoint().id(), "forecast", ctx.config);
  ctx.log(LogLevel::info, std::to_string(results.size()) + " forecasts written to " + dir.string());
  return {{"command", "forecast"}, {"source", dune_source(window)}, {"count", results.size()},
          {"first", results.front().stamp.str()}, {"last", results.back().stamp.str()},
          {"inference_seconds", secs}, {"output", dir.string()}};
}

Summary run_rollout(Context& ctx, const Stamp& start, int horizon, bool truth_feedback) {
  const auto d = load_prepared(ctx.ws);
  const PeriodKind kind = mode_of(ctx.config);
  const int window = window_of(ctx.config);
  const auto m = load_mode(ctx, d, kind);
  const auto f = load_forecaster(ctx, kind, window, m);
  const Stamp first = start.kind == kind ? start : start.containing(kind);
  const auto bundle = f.bundle(m.anomalies, m.tisr_cycle, d.constants);
  const auto results = f.rollout(bundle, first, horizon,
                                 truth_feedback ? forecast::Feedback::truth : forecast::Feedback::forecast);
  const auto dir = ctx.ws.root() / "rollouts" / (std::string(to_string(kind)) + "_w" + std::to_string(window) + "_" +
                                                  first.str() + "_h" + std::to_string(horizon));
  write_results(dir, results, m, f.checkpoint().id(), "rollout", ctx.config);
  json stamps = json::array();
  for (const auto& r : results) stamps.push_back(r.stamp.str());
  ctx.log(LogLevel::info, "rollout of " + std::to_string(results.size()) + " periods written to " + dir.string());
  return {{"command", "rollout"}, {"stamps", stamps}, {"network_calls", (horizon + window - 1) / window},
          {"output", dir.string()}};
}

// ---- baselines ----

Summary run_baseline(Context& ctx, const std::vector<baselines::BaselineKind>& kinds_in) {
  using baselines::BaselineKind;
  const auto d = load_prepared(ctx.ws);
  const PeriodKind kind = mode_of(ctx.config);
  const auto m = load_mode(ctx, d, kind);
  auto kinds = kinds_in;
  if (kinds.empty())
    kinds = {BaselineKind::persist_prior_step, BaselineKind::persist_prior_year, BaselineKind::climatology,
             BaselineKind::mlr};
  const auto targets = test_periods(m);
  if (targets.empty()) throw DataError("test split holds no complete " + std::string(to_string(kind)) + " periods");
  json out = {{"command", "baseline"}, {"mode", to_string(kind)}};
  for (auto bk : kinds) {
    std::vector<forecast::ForecastResult> results;
    std::vector<std::pair<std::string, std::string>> notes;
    if (bk == BaselineKind::mlr) {
      const auto train_targets = ingest::periods_inside(m.plan.train, kind);
      const int factor = baselines::coarse_factor(*d.grid);
      const auto mlr = baselines::CoarseMlr::fit(m.anomaly_map, train_targets, factor);
      for (const auto& t : targets) results.push_back({t, 1, mlr.forecast(m.anomaly_map, t), std::nullopt, {}});
      notes = {{"coarse_factor", std::to_string(factor)},
               {"rank_deficient_fallbacks", std::to_string(mlr.model.fallback_count())}};
      out["mlr_fallbacks"] = mlr.model.fallback_count();
      if (mlr.model.fallback_count())
        ctx.log(LogLevel::warn, std::to_string(mlr.model.fallback_count()) +
                                    " MLR gridpoints were rank deficient and forecast zero anomaly");
    } else {
      for (const auto& t : targets) {
        Field f = bk == BaselineKind::climatology ? baselines::climatology_forecast(d.grid, t)
                                                  : baselines::persistence_forecast(bk, m.anomaly_map, t);
        const int lead = bk == BaselineKind::persist_prior_year ? slots_per_year(kind) : 1;
        results.push_back({t, lead, std::move(f), std::nullopt, {}});
      }
    }
    const std::string name(to_string(bk));
    write_results(ctx.ws.forecast_dir(name, kind), results, m, "baseline:" + name, "baseline", ctx.config);
    out["sources"].push_back(name);
  }
  ctx.log(LogLevel::info, "baseline forecasts written for " + std::to_string(targets.size()) + " periods");
  return out;
}

// ---- score ----

Summary run_score(Context& ctx, const std::vector<fs::path>& category_files) {
  const auto d = load_prepared(ctx.ws);
  const PeriodKind kind = mode_of(ctx.config);
  const int window = window_of(ctx.config);
  auto m = load_mode(ctx, d, kind);
  const std::string ks(to_string(kind));

  if (!fs::exists(ctx.ws.forecast_dir(dune_source(window), kind) / "anomaly.dgf") &&
      fs::exists(ctx.ws.model_dir(kind, window) / "checkpoint.dck"))
    run_forecast(ctx, std::nullopt);
  bool have_baselines = true;
  for (const char* b : {"persistence_prior_step", "persistence_prior_year", "climatology", "mlr"})
    have_baselines = have_baselines && fs::exists(ctx.ws.forecast_dir(b, kind) / "anomaly.dgf");
  if (!have_baselines) run_baseline(ctx, {});

  const auto targets = test_periods(m);
  std::set<Stamp> wanted(targets.begin(), targets.end());
  std::map<Stamp, Field> truth;
  for (const auto& s : targets) truth.emplace(s, m.anomaly_map.at(s));

  std::vector<verify::ForecastSet> sources;
  std::vector<std::string> inputs;
  const auto fc_root = ctx.ws.root() / "forecasts";
  if (fs::exists(fc_root)) {
    std::vector<fs::path> dirs;
    for (const auto& e : fs::directory_iterator(fc_root))
      if (fs::exists(e.path() / ks / "anomaly.dgf")) dirs.push_back(e.path());
    std::sort(dirs.begin(), dirs.end());
    // DUNE sources first, then baselines in table order.
    auto rank = [](const std::string& n) {
      if (n.rfind("dune", 0) == 0) return 0;
      if (n == "persistence_prior_step") return 1;
      if (n == "persistence_prior_year") return 2;
      if (n == "climatology") return 3;
      if (n == "mlr") return 4;
      return 5;
    };
    std::stable_sort(dirs.begin(), dirs.end(), [&](const fs::path& a, const fs::path& b) {
      return rank(a.filename().string()) < rank(b.filename().string());
    });
    for (const auto& dir : dirs) {
      verify::ForecastSet set;
      set.name = dir.filename().string();
      for (auto& f : load_forecast_anomalies(dir / ks))
        if (wanted.count(*f.stamp)) set.anomaly.emplace(*f.stamp, std::move(f));
      if (fs::exists(dir / ks / "leads.json")) {
        std::ifstream in(dir / ks / "leads.json");
        const json leads = json::parse(in);
        for (const auto& [s, l] : leads.items())
          if (wanted.count(Stamp::parse(s))) set.lead[Stamp::parse(s)] = l.get<int>();
      }
      inputs.push_back((dir / ks).string());
      sources.push_back(std::move(set));
    }
  }
  for (const auto& file : category_files) {
    verify::ForecastSet set;
    set.name = file.stem().string();
    for (const auto& f : ingest::read_grid_file(file)) {
      if (f.variable != Variable::category) throw DataError(file.string() + " does not hold category grids");
      if (!f.stamp) throw DataError(file.string() + ": category grids must be stamped");
      require_same_grid(f, d.monthly.front(), "category grid");
      if (wanted.count(*f.stamp)) set.categories.emplace(*f.stamp, verify::categories_from_field(f));
    }
    inputs.push_back(file.string());
    sources.push_back(std::move(set));
  }
  if (sources.empty()) throw DataError("no forecasts to score for mode " + ks);

  std::vector<verify::RegionMask> masks;
  const double threshold = ctx.config.get_double("ingest.lsm_threshold");
  for (const auto& def : verify::regions_from_config(ctx.config)) masks.push_back(verify::build_mask(def, d.lsm(), threshold));
  const auto report = verify::score_run(sources, truth, m.clim.mean, m.clim.percentile, masks,
                                        verify::parse_acc_reference(ctx.config.get("verify.acc_climatology")));
  const auto dir = ctx.ws.reports_dir();
  write_text(dir / ("score_" + ks + ".csv"), report.to_csv());
  write_text(dir / ("score_" + ks + ".json"), report.to_json());
  write_text(dir / ("table_" + ks + ".csv"), report.wide_table());
  Manifest{"score", inputs,
           {(dir / ("score_" + ks + ".csv")).string(), (dir / ("score_" + ks + ".json")).string(),
            (dir / ("table_" + ks + ".csv")).string()},
           {{"periods", std::to_string(targets.size())}}}
      .write(dir / ("score_" + ks + "_manifest.json"), ctx.config);

  json agg = json::object();
  for (const auto& s : report.sources)
    for (const auto& [rn, rd] : report.regions) {
      const auto& a = report.aggregate(s, rn);
      agg[s][rn] = {{"rmse", std::isnan(a.rmse) ? json(nullptr) : json(a.rmse)},
                    {"acc", std::isnan(a.acc) ? json(nullptr) : json(a.acc)},
                    {"hss", std::isnan(a.hss) ? json(nullptr) : json(a.hss)}};
    }
  ctx.log(LogLevel::info, "report written to " + (dir / ("table_" + ks + ".csv")).string());
  return {{"command", "score"}, {"mode", ks}, {"periods", targets.size()}, {"table", report.wide_table()},
          {"aggregate", agg}, {"report", (dir / ("table_" + ks + ".csv")).string()}};
}

// ---- ensemble ----

Summary run_ensemble(Context& ctx, const std::optional<fs::path>& members_dir, int coarsen) {
  const auto d = load_prepared(ctx.ws);
  const PeriodKind kind = mode_of(ctx.config);
  const int window = window_of(ctx.config);
  const auto m = load_mode(ctx, d, kind);
  const auto f = load_forecaster(ctx, kind, window, m);

  std::vector<std::vector<Field>> member_months;
  std::vector<std::string> labels;
  if (members_dir) {
    std::vector<fs::path> dirs;
    for (const auto& e : fs::directory_iterator(*members_dir))
      if (fs::exists(e.path() / "blended_t.dgf")) dirs.push_back(e.path());
    std::sort(dirs.begin(), dirs.end());
    if (dirs.empty()) throw DataError("no member directories with blended_t.dgf under " + members_dir->string());
    for (const auto& dir : dirs) {
      auto fields = ingest::read_grid_file(dir / "blended_t.dgf");
      if (!(*fields.front().grid == *d.grid)) fields = forecast::upsample_all(fields, d.grid);
      member_months.push_back(std::move(fields));
      labels.push_back(dir.filename().string());
    }
  } else {
    const int count = static_cast<int>(ctx.config.get_int("ensemble.members"));
    const double noise = ctx.config.get_double("ensemble.noise");
    const auto seed = static_cast<std::uint64_t>(ctx.config.get_int("train.seed"));
    std::vector<Field> base = d.monthly;
    if (coarsen > 1) {
      const auto coarse = make_grid(d.grid->coarsened(static_cast<std::size_t>(coarsen)));
      for (auto& fld : base) fld = forecast::block_mean(fld, coarsen, coarse);
    }
    member_months = forecast::perturbed_members(base, count, noise, seed);
    for (auto& mm : member_months)
      if (!(*mm.front().grid == *d.grid)) mm = forecast::upsample_all(mm, d.grid);
    for (int i = 0; i < count; ++i) labels.push_back("member" + std::to_string(i));
  }

  std::vector<train::SeriesBundle> bundles;
  for (const auto& mm : member_months) {
    std::vector<Field> anoms;
    for (const auto& p : forecast::aggregate_periods(mm, kind)) anoms.push_back(anomalize(p, m.clim.mean));
    bundles.push_back(f.bundle(anoms, m.tisr_cycle, d.constants));
  }
  const auto res = forecast::ensemble_inference(f, bundles, m.plan.test);

  const auto global = verify::RegionMask::everywhere(d.grid);
  std::ostringstream per, summ;
  per.precision(10);
  summ.precision(10);
  per << "stamp,member,rmse,acc\n";
  summ << "stamp,rmse_mean,rmse_std,acc_mean,acc_std,spread\n";
  const auto L = latitude_weights(*d.grid);
  for (std::size_t t = 0; t < res.mean.size(); ++t) {
    const Stamp s = *res.mean[t].stamp;
    const Field& truth = m.anomaly_map.at(s);
    std::vector<double> rm, ac;
    for (std::size_t k = 0; k < res.members.size(); ++k) {
      const auto& fa = res.members[k][t].anomaly;
      rm.push_back(verify::rmse(fa.values, truth.values, *d.grid, global));
      ac.push_back(verify::acc(fa.values, truth.values, *d.grid, global));
      per << s.str() << ',' << labels[k] << ',' << rm.back() << ',' << ac.back() << '\n';
    }
    const auto r = forecast::mean_std(rm), a = forecast::mean_std(ac);
    double spread = 0, wsum = 0;
    for (std::size_t i = 0; i < d.grid->n_lat(); ++i)
      for (std::size_t k = 0; k < d.grid->n_lon(); ++k) {
        spread += L[i] * res.std[t].values[i * d.grid->n_lon() + k];
        wsum += L[i];
      }
    summ << s.str() << ',' << r.mean << ',' << r.std << ',' << a.mean << ',' << a.std << ',' << spread / wsum << '\n';
  }
  const std::string ks(to_string(kind));
  const auto dir = ctx.ws.reports_dir();
  write_text(dir / ("ensemble_" + ks + "_members.csv"), per.str());
  write_text(dir / ("ensemble_" + ks + "_summary.csv"), summ.str());
  const auto fdir = ctx.ws.forecast_dir("ensemble_mean", kind);
  ingest::write_grid_file(ctx.ws.root() / "ensemble" / ks / "mean.dgf", res.mean);
  ingest::write_grid_file(ctx.ws.root() / "ensemble" / ks / "std.dgf", res.std);
  Manifest{"ensemble", {},
           {(dir / ("ensemble_" + ks + "_summary.csv")).string(), (ctx.ws.root() / "ensemble" / ks).string()},
           {{"members", std::to_string(res.members.size())}, {"samples", std::to_string(res.sample_count)}}}
      .write(dir / ("ensemble_" + ks + "_manifest.json"), ctx.config);
  (void)fdir;
  ctx.log(LogLevel::info, std::to_string(res.members.size()) + " members x " + std::to_string(res.mean.size()) +
                              " periods = " + std::to_string(res.sample_count) + " samples");
  return {{"command", "ensemble"}, {"members", res.members.size()}, {"periods", res.mean.size()},
          {"samples", res.sample_count}, {"summary", (dir / ("ensemble_" + ks + "_summary.csv")).string()}};
}

// ---- plot ----

namespace {

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw DataError("cannot read " + p.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) rows.push_back(split(line, ','));
  return rows;
}

double to_num(const std::string& s) { return s.empty() ? std::nan("") : std::stod(s); }

double stamp_x(const Stamp& s) {
  const auto months = s.months();
  const auto& mid = months[months.size() / 2];
  return mid.year + (mid.slot - 0.5) / 12.0;
}

}  // namespace

Summary run_plot(Context& ctx, const std::string& what, const std::optional<Stamp>& map_stamp) {
  const PeriodKind kind = mode_of(ctx.config);
  const int window = window_of(ctx.config);
  const std::string ks(to_string(kind));
  const auto out = ctx.ws.plots_dir();
  json written = json::array();
  const bool all = what == "all";
  if (!all && what != "loss" && what != "metrics" && what != "maps" && what != "hss" && what != "global_mean")
    throw UsageError("plot kind must be all, loss, metrics, maps, hss or global_mean");
  auto emit = [&](const std::string& name, const std::string& svg) {
    write_text(out / name, svg);
    written.push_back((out / name).string());
  };

  if (all || what == "loss") {
    const auto path = ctx.ws.model_dir(kind, window) / "loss_history.csv";
    if (fs::exists(path) || !all) {
      const auto rows = read_csv(path);
      plot::Series tr{"train", {}, {}}, va{"validation", {}, {}}, te{"test", {}, {}};
      for (std::size_t r = 1; r < rows.size(); ++r) {
        const double e = to_num(rows[r].at(0));
        tr.x.push_back(e), tr.y.push_back(to_num(rows[r].at(2)));
        va.x.push_back(e), va.y.push_back(to_num(rows[r].at(3)));
        te.x.push_back(e), te.y.push_back(rows[r].size() > 4 ? to_num(rows[r][4]) : std::nan(""));
      }
      emit("loss_" + ks + "_w" + std::to_string(window) + ".svg",
           plot::line_panels("Training, validation and test loss", "epoch", "weighted RMSE loss",
                             {{ks + " W=" + std::to_string(window), {tr, va, te}}}));
    }
  }

  const auto score_csv = ctx.ws.reports_dir() / ("score_" + ks + ".csv");
  if (all || what == "metrics" || what == "hss") {
    if (!fs::exists(score_csv) && !all) throw DataError("missing " + score_csv.string() + " (run `score` first)");
  }
  if (fs::exists(score_csv) && (all || what == "metrics")) {
    const auto rows = read_csv(score_csv);
    std::vector<std::string> methods;
    std::map<std::string, plot::Series> rmse_s, acc_s;
    for (std::size_t r = 1; r < rows.size(); ++r) {
      const auto& row = rows[r];
      if (row.at(1) != "global" || row.at(2) == "mean") continue;
      const auto& src = row[0];
      if (!rmse_s.count(src)) {
        methods.push_back(src);
        rmse_s[src].label = src;
        acc_s[src].label = src;
      }
      const double x = stamp_x(Stamp::parse(row[2]));
      rmse_s[src].x.push_back(x), rmse_s[src].y.push_back(to_num(row[4]));
      acc_s[src].x.push_back(x), acc_s[src].y.push_back(to_num(row[5]));
    }
    std::vector<plot::Panel> rp, ap;
    for (const auto& s : methods) {
      rp.push_back({s, {rmse_s[s]}});
      ap.push_back({s, {acc_s[s]}});
    }
    if (!rp.empty()) {
      emit("rmse_" + ks + ".svg", plot::line_panels("Global RMSE per " + ks + " period", "year", "RMSE (K)", rp));
      emit("acc_" + ks + ".svg", plot::line_panels("Global ACC per " + ks + " period", "year", "ACC", ap));
    }
  }
  if (fs::exists(score_csv) && (all || what == "hss")) {
    const auto rows = read_csv(score_csv);
    std::vector<std::string> methods, regions;
    std::map<std::pair<std::string, std::string>, double> v;
    for (std::size_t r = 1; r < rows.size(); ++r) {
      const auto& row = rows[r];
      if (row.at(2) != "mean") continue;
      if (std::find(methods.begin(), methods.end(), row[0]) == methods.end()) methods.push_back(row[0]);
      if (std::find(regions.begin(), regions.end(), row[1]) == regions.end()) regions.push_back(row[1]);
      v[{row[0], row[1]}] = to_num(row[6]);
    }
    std::vector<std::vector<double>> grid;
    for (const auto& mth : methods) {
      grid.emplace_back();
      for (const auto& rg : regions) grid.back().push_back(v.count({mth, rg}) ? v[{mth, rg}] : std::nan(""));
    }
    if (!methods.empty()) emit("hss_" + ks + ".svg", plot::heatmap("HSS (%) by method and region", methods, regions, grid));
  }

  if (all || what == "maps" || what == "global_mean") {
    const auto d = load_prepared(ctx.ws);
    if (all || what == "global_mean") {
      std::map<int, std::vector<double>> yearly;
      plot::Series monthly{"monthly", {}, {}};
      for (const auto& f : d.monthly) {
        const double gm = plot::cosine_weighted_mean(f);
        monthly.x.push_back(f.stamp->year + (f.stamp->slot - 0.5) / 12.0);
        monthly.y.push_back(gm);
        yearly[f.stamp->year].push_back(gm);
      }
      plot::Series annual{"annual mean", {}, {}};
      for (const auto& [y, v] : yearly)
        if (v.size() == 12) {
          annual.x.push_back(y + 0.5);
          annual.y.push_back(forecast::mean_std(v).mean);
        }
      emit("global_mean.svg", plot::line_panels("Cosine-weighted global mean temperature", "year", "temperature (K)",
                                                {{"blended temperature", {monthly, annual}}}));
    }
    if (all || what == "maps") {
      const auto m = load_mode(ctx, d, kind);
      const auto fc_root = ctx.ws.root() / "forecasts";
      if (fs::exists(fc_root)) {
        const auto global = verify::RegionMask::everywhere(d.grid);
        for (const auto& e : fs::directory_iterator(fc_root)) {
          if (!fs::exists(e.path() / ks / "anomaly.dgf")) continue;
          const auto fcs = load_forecast_anomalies(e.path() / ks);
          const Field* pick = &fcs.front();
          if (map_stamp)
            for (const auto& fc : fcs)
              if (*fc.stamp == *map_stamp) pick = &fc;
          const Field& truth = m.anomaly_map.at(*pick->stamp);
          Field err = *pick;
          for (std::size_t k = 0; k < err.size(); ++k) err.values[k] -= truth.values[k];
          char cap[160];
          std::snprintf(cap, sizeof cap, "%s %s: RMSE %.3f K, ACC %.3f", e.path().filename().string().c_str(),
                        pick->stamp->str().c_str(), verify::rmse(pick->values, truth.values, *d.grid, global),
                        verify::acc(pick->values, truth.values, *d.grid, global));
          emit("error_" + e.path().filename().string() + "_" + pick->stamp->str() + ".svg",
               plot::field_map("Forecast error (forecast - observed)", cap, err));
        }
      }
    }
  }
  if (written.empty()) throw DataError("nothing to plot; run train/score first");
  ctx.log(LogLevel::info, std::to_string(written.size()) + " plots written to " + out.string());
  Manifest man{"plot", {}, {}, {}};
  for (const auto& w : written) man.outputs.push_back(w.get<std::string>());
  man.write(out / "manifest.json", ctx.config);
  return {{"command", "plot"}, {"files", written}};
}

// ---- model summary ----

Summary run_model_summary(Context& ctx) {
  const PeriodKind kind = mode_of(ctx.config);
  const int window = window_of(ctx.config);
  nn::ModelConfig mc;
  std::string origin;
  const auto ckpt_path = ctx.ws.model_dir(kind, window) / "checkpoint.dck";
  if (fs::exists(ckpt_path)) {
    mc = nn::load_checkpoint(ckpt_path).model;
    origin = ckpt_path.string();
  } else {
    mc = nn::ModelConfig::for_window(window, 0, 0);
    mc.depth = static_cast<int>(ctx.config.get_int("model.depth"));
    mc.channels = ctx.config.get_int_list("model.channels");
    mc.validate();
    origin = "configuration";
  }
  const nn::DuneNet<float> net(mc);
  const nn::DuneNet<float> full(nn::ModelConfig::full_scale(window));
  std::ostringstream os;
  os << "model from " << origin << "\n"
     << "depth " << mc.depth << ", in_channels " << mc.in_channels << ", out_channels " << mc.out_channels
     << ", heads 4\n\n";
  os << "layer                          kind       in   out    params\n";
  for (const auto& l : net.layers()) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-30s %-9s %4d %5d %9zu\n", l.name.c_str(), l.kind.c_str(), l.in_channels,
                  l.out_channels, l.weight_count + static_cast<std::size_t>(l.out_channels));
    os << buf;
  }
  os << "\ntotal parameters: " << net.parameter_count() << "\n"
     << "full-scale configuration (64,128,256,512,1024), W=" << window << ": " << full.parameter_count()
     << " parameters (published figure: approximately 45,843,720)\n";
  const auto path = ctx.ws.reports_dir() / ("model_summary_" + std::string(to_string(kind)) + "_w" +
                                            std::to_string(window) + ".txt");
  write_text(path, os.str());
  return {{"command", "model-summary"}, {"parameters", net.parameter_count()},
          {"full_scale_parameters", full.parameter_count()}, {"layers", net.layers().size()},
          {"text", os.str()}, {"output", path.string()}};
}

}  // namespace dune::app
