// SPDX-License-Identifier: Apache-2.0
// Command-line front end. Talks to the library only through dune/dune.h.
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "dune/dune.h"

namespace {

struct Globals {
  std::vector<std::string> configs;
  std::optional<std::uint64_t> seed;
  std::string out = "dune_out";
  std::string log_level;
  std::vector<std::string> sets;
  bool no_env = false;
  bool json = false;
};

int exit_code(dune_status s) {
  switch (s) {
    case DUNE_OK: return 0;
    case DUNE_E_USAGE: return 1;
    case DUNE_E_DATA: return 2;
    default: return 3;  // numeric and internal failures
  }
}

void log_to_stderr(dune_log_level level, const char* msg, void*) {
  static const char* const names[] = {"error", "warn", "info", "debug"};
  std::fprintf(stderr, "[%s] %s\n", names[level], msg);
}

/// Wraps a context so every early return destroys it.
class Session {
 public:
  ~Session() { dune_context_destroy(ctx_); }

  dune_status open(const Globals& g, const std::vector<std::pair<std::string, std::string>>& extra) {
    dune_status s = dune_context_create(g.out.c_str(), &ctx_);
    if (s != DUNE_OK) {
      std::fprintf(stderr, "error: cannot use output directory %s\n", g.out.c_str());
      return s;
    }
    dune_context_set_log_callback(ctx_, log_to_stderr, nullptr);
    if (g.no_env && (s = dune_context_use_environment(ctx_, 0)) != DUNE_OK) return fail(s);
    for (const auto& f : g.configs)
      if ((s = dune_context_add_config_file(ctx_, f.c_str())) != DUNE_OK) return fail(s);
    std::vector<std::pair<std::string, std::string>> kv;
    if (g.seed) {
      kv.emplace_back("model.seed", std::to_string(*g.seed));
      kv.emplace_back("train.seed", std::to_string(*g.seed));
    }
    for (const auto& s2 : g.sets) {
      const auto eq = s2.find('=');
      if (eq == std::string::npos) {
        std::fprintf(stderr, "error: --set expects KEY=VALUE, got '%s'\n", s2.c_str());
        return DUNE_E_USAGE;
      }
      kv.emplace_back(s2.substr(0, eq), s2.substr(eq + 1));
    }
    kv.insert(kv.end(), extra.begin(), extra.end());
    if (!g.log_level.empty()) kv.emplace_back("log.level", g.log_level);
    for (const auto& [k, v] : kv)
      if ((s = dune_context_set(ctx_, k.c_str(), v.c_str())) != DUNE_OK) return fail(s);
    return DUNE_OK;
  }

  dune_status fail(dune_status s) const {
    std::fprintf(stderr, "error (%s): %s\n", dune_status_name(s), dune_context_last_error(ctx_));
    return s;
  }

  dune_context* get() const { return ctx_; }

 private:
  dune_context* ctx_ = nullptr;
};

std::optional<std::pair<int, int>> parse_grid(const std::string& text) {
  int a = 0, b = 0;
  char x = 0, tail = 0;
  if (std::sscanf(text.c_str(), "%d%c%d%c", &a, &x, &b, &tail) != 3 || (x != 'x' && x != 'X') || a <= 0 || b <= 0)
    return std::nullopt;
  return std::make_pair(a, b);
}

const char* or_null(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DUNE: UNet++ internal-ensemble temperature forecasting (monthly, seasonal, annual)", "dune-cli"};
  app.set_version_flag("--version", std::string(dune_version()));
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--config", g.configs, "Configuration file(s), later ones win")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Seed for initialisation, batch order and synthetic data");
  app.add_option("--out", g.out, "Output directory")->capture_default_str();
  app.add_option("--log-level", g.log_level, "error|warn|info|debug")
      ->check(CLI::IsMember({"error", "warn", "info", "debug"}));
  app.add_option("--set", g.sets, "Override a configuration key (KEY=VALUE), repeatable");
  app.add_flag("--no-env", g.no_env, "Ignore DUNE_* environment overrides");
  app.add_flag("--json", g.json, "Print the command summary as JSON on stdout");

  // Mode-related flags shared by several subcommands.
  std::string mode;
  int window = 0;
  auto add_mode = [&](CLI::App* sc) {
    sc->add_option("--mode", mode, "monthly|seasonal|annual")->check(CLI::IsMember({"monthly", "seasonal", "annual"}));
    sc->add_option("--window", window, "Moving-window length W")->check(CLI::IsMember({1, 2, 3, 4, 6, 12}));
  };

  auto* synth = app.add_subcommand("synth", "Generate a seeded synthetic corpus and prepare it");
  std::string grid = "32x64";
  int years = 42, last_year = 2023;
  double noise = 1.0;
  synth->add_option("--grid", grid, "NLATxNLON")->capture_default_str();
  synth->add_option("--years", years, "Number of years")->capture_default_str();
  synth->add_option("--last-year", last_year, "Final calendar year")->capture_default_str();
  synth->add_option("--noise", noise, "Noise amplitude multiplier")->capture_default_str();

  auto* ingest = app.add_subcommand("ingest", "Read netCDF or grid-file sources onto the model grid");
  std::vector<std::string> sources;
  std::string range;
  ingest->add_option("--source", sources, "netCDF file or grid-file directory, repeatable")->required();
  ingest->add_option("--range", range, "YYYY-MM:YYYY-MM");

  auto* clim = app.add_subcommand("climatology", "Build mean and percentile climatologies for every mode");

  auto* train = app.add_subcommand("train", "Train DUNE for one mode and window");
  add_mode(train);
  int epochs = 0, patience = 0;
  train->add_option("--epochs", epochs, "Epoch limit")->check(CLI::PositiveNumber);
  train->add_option("--patience", patience, "Early-stopping patience")->check(CLI::PositiveNumber);

  auto* fcst = app.add_subcommand("forecast", "Block forecasts over the test split (or --range)");
  add_mode(fcst);
  std::string fc_range;
  fcst->add_option("--range", fc_range, "YYYY-MM:YYYY-MM");

  auto* roll = app.add_subcommand("rollout", "Autoregressive rollout from a start period");
  add_mode(roll);
  std::string start;
  int horizon = 0;
  bool truth = false;
  roll->add_option("--start", start, "First target stamp (YYYY-MM, YYYY-DJF, YYYY)")->required();
  roll->add_option("--horizon", horizon, "Number of periods")->required();
  roll->add_flag("--truth-feedback", truth, "Feed observed values instead of forecasts");

  auto* base = app.add_subcommand("baseline", "Persistence, climatology and MLR reference forecasts");
  add_mode(base);
  std::vector<std::string> kinds;
  base->add_option("--kind", kinds, "persistence_prior_step|persistence_prior_year|climatology|mlr, repeatable")
      ->check(CLI::IsMember({"persistence_prior_step", "persistence_prior_year", "climatology", "mlr"}));

  auto* score = app.add_subcommand("score", "Score every forecast source and write the report tables");
  add_mode(score);
  std::vector<std::string> cat_files;
  score->add_option("--categories", cat_files, "Extra category-grid sources (HSS only)")->check(CLI::ExistingFile);

  auto* ens = app.add_subcommand("ensemble", "Ensemble inference over perturbed or supplied members");
  add_mode(ens);
  std::string members;
  int coarsen = 1;
  ens->add_option("--members", members, "Directory of member sub-directories with blended_t.dgf")
      ->check(CLI::ExistingDirectory);
  ens->add_option("--coarsen", coarsen, "Block-mean factor applied before upsampling")->check(CLI::PositiveNumber);

  auto* plot = app.add_subcommand("plot", "Write SVG figures");
  add_mode(plot);
  std::string what = "all", map_stamp;
  plot->add_option("--what", what, "all|loss|metrics|maps|hss|global_mean")
      ->check(CLI::IsMember({"all", "loss", "metrics", "maps", "hss", "global_mean"}));
  plot->add_option("--stamp", map_stamp, "Stamp for the error maps");

  auto* summary = app.add_subcommand("model-summary", "Layer table and parameter count");
  add_mode(summary);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  std::vector<std::pair<std::string, std::string>> extra;
  if (!mode.empty()) extra.emplace_back("forecast.mode", mode);
  if (window) extra.emplace_back("model.window", std::to_string(window));
  if (epochs) extra.emplace_back("train.max_epochs", std::to_string(epochs));
  if (patience) extra.emplace_back("train.patience", std::to_string(patience));

  Session session;
  if (dune_status s = session.open(g, extra); s != DUNE_OK) return exit_code(s);
  dune_context* ctx = session.get();

  dune_status st = DUNE_OK;
  if (synth->parsed()) {
    const auto dims = parse_grid(grid);
    if (!dims) {
      std::fprintf(stderr, "error: --grid expects NLATxNLON, got '%s'\n", grid.c_str());
      return 1;
    }
    st = dune_synth(ctx, dims->first, dims->second, years, last_year, g.seed.value_or(7), noise);
  } else if (ingest->parsed()) {
    std::vector<const char*> p;
    for (const auto& s : sources) p.push_back(s.c_str());
    st = dune_ingest(ctx, p.data(), p.size(), or_null(range));
  } else if (clim->parsed()) {
    st = dune_climatology(ctx);
  } else if (train->parsed()) {
    st = dune_train(ctx);
  } else if (fcst->parsed()) {
    st = dune_forecast(ctx, or_null(fc_range));
  } else if (roll->parsed()) {
    st = dune_rollout(ctx, start.c_str(), horizon, truth ? 1 : 0);
  } else if (base->parsed()) {
    std::string joined;
    for (const auto& k : kinds) joined += (joined.empty() ? "" : ",") + k;
    st = dune_baseline(ctx, or_null(joined));
  } else if (score->parsed()) {
    std::vector<const char*> p;
    for (const auto& s : cat_files) p.push_back(s.c_str());
    st = dune_score(ctx, p.data(), p.size());
  } else if (ens->parsed()) {
    st = dune_ensemble(ctx, or_null(members), coarsen);
  } else if (plot->parsed()) {
    st = dune_plot(ctx, what.c_str(), or_null(map_stamp));
  } else if (summary->parsed()) {
    st = dune_model_summary(ctx);
  }
  if (st != DUNE_OK) return exit_code(session.fail(st));
  if (g.json) {
    std::cout << dune_context_result_json(ctx) << '\n';
  } else if (score->parsed() || summary->parsed()) {
    // These two carry a human-readable table worth printing.
    const auto js = nlohmann::json::parse(dune_context_result_json(ctx));
    std::cout << js.value(score->parsed() ? "table" : "text", std::string());
  }
  return 0;
}
