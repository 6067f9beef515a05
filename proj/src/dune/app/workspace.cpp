// SPDX-License-Identifier: Apache-2.0
#include "dune/app/workspace.hpp"

#include <chrono>
#include <ctime>
#include <fstream>

#include "dune/common/error.hpp"
#include "dune/common/hash.hpp"
#include "dune/ingest/grid_file.hpp"
#include "json.hpp"

namespace dune::app {

namespace fs = std::filesystem;

namespace {

const char* const kConstantFiles[] = {"lsm", "slt", "orography", "cvh", "cvl"};

fs::path existing(const fs::path& p, const std::string& hint) {
  if (!fs::exists(p)) throw DataError("missing " + p.string() + (hint.empty() ? "" : " (" + hint + ")"));
  return p;
}

}  // namespace

LogLevel parse_log_level(const std::string& t) {
  if (t == "error") return LogLevel::error;
  if (t == "warn") return LogLevel::warn;
  if (t == "info") return LogLevel::info;
  if (t == "debug") return LogLevel::debug;
  throw UsageError("log level must be error, warn, info or debug, got '" + t + "'");
}

fs::path Workspace::model_dir(PeriodKind kind, int window) const {
  return root_ / "models" / (std::string(to_string(kind)) + "_w" + std::to_string(window));
}

fs::path Workspace::forecast_dir(const std::string& source, PeriodKind kind) const {
  return root_ / "forecasts" / source / std::string(to_string(kind));
}

void save_prepared(const Workspace& ws, const PreparedData& d) {
  const auto dir = ws.data_dir();
  ingest::write_grid_file(dir / "blended_t.dgf", d.monthly);
  for (std::size_t c = 0; c < 5; ++c)
    ingest::write_grid_file(dir / (std::string(kConstantFiles[c]) + ".dgf"), std::span(&d.constants[c], 1));
  ingest::write_grid_file(dir / "tisr_cycle.dgf", d.tisr_cycle);
}

PreparedData load_prepared(const Workspace& ws) {
  const auto dir = ws.data_dir();
  const std::string hint = "run `ingest` or `synth` first";
  PreparedData d;
  d.monthly = ingest::read_grid_file(existing(dir / "blended_t.dgf", hint));
  if (d.monthly.empty()) throw DataError("no monthly data in " + dir.string());
  d.grid = d.monthly.front().grid;
  for (const char* name : kConstantFiles) {
    auto f = ingest::read_grid_file(existing(dir / (std::string(name) + ".dgf"), hint));
    if (f.size() != 1) throw DataError(std::string(name) + ".dgf must hold exactly one field");
    require_same_grid(d.monthly.front(), f.front(), name);
    d.constants.push_back(std::move(f.front()));
  }
  d.tisr_cycle = ingest::read_grid_file(existing(dir / "tisr_cycle.dgf", hint));
  if (d.tisr_cycle.size() != 12) throw DataError("tisr_cycle.dgf must hold 12 monthly fields");
  return d;
}

void save_climatology(const Workspace& ws, const ClimatologyPair& c) {
  const auto dir = ws.climatology_dir();
  const std::string k(to_string(c.mean.kind()));
  ingest::write_grid_file(dir / (k + "_mean.dgf"), c.mean.means());
  ingest::write_grid_file(dir / (k + "_pctmean.dgf"), c.percentile.means());
  ingest::write_grid_file(dir / (k + "_p33.dgf"), c.percentile.p33());
  ingest::write_grid_file(dir / (k + "_p66.dgf"), c.percentile.p66());
  nlohmann::json j = {{"kind", k},
                      {"mean_base", {c.mean.first_year(), c.mean.last_year()}},
                      {"percentile_base", {c.percentile.first_year(), c.percentile.last_year()}},
                      {"hash", climatology_hash(c.mean)}};
  ingest::write_file_atomic(dir / (k + ".json"), j.dump(2));
}

bool has_climatology(const Workspace& ws, PeriodKind kind) {
  return fs::exists(ws.climatology_dir() / (std::string(to_string(kind)) + ".json"));
}

ClimatologyPair load_climatology(const Workspace& ws, PeriodKind kind) {
  const auto dir = ws.climatology_dir();
  const std::string k(to_string(kind));
  std::ifstream in(existing(dir / (k + ".json"), "run `climatology` first"));
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("corrupt climatology metadata: " + std::string(e.what()));
  }
  auto read = [&](const std::string& suffix) { return ingest::read_grid_file(existing(dir / (k + suffix), "")); };
  const auto mb = j.at("mean_base"), pb = j.at("percentile_base");
  ClimatologyPair c{ClimatologyTable(kind, mb[0], mb[1], read("_mean.dgf"), {}, {}),
                    ClimatologyTable(kind, pb[0], pb[1], read("_pctmean.dgf"), read("_p33.dgf"), read("_p66.dgf"))};
  return c;
}

void Manifest::write(const fs::path& path, const Config& cfg) const {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char when[32];
  std::strftime(when, sizeof when, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  nlohmann::json j = {{"command", command},   {"version", kVersion}, {"created", when},
                      {"inputs", inputs},     {"outputs", outputs},  {"config_hash", hex64(cfg.hash())},
                      {"config", cfg.entries()}};
  for (const auto& [k, v] : extra) j["notes"][k] = v;
  ingest::write_file_atomic(path, j.dump(2));
}

void save_forecasts(const fs::path& dir, const std::vector<Field>& anomaly, const std::vector<Field>* absolute) {
  ingest::write_grid_file(dir / "anomaly.dgf", anomaly);
  if (absolute) ingest::write_grid_file(dir / "absolute.dgf", *absolute);
}

std::vector<Field> load_forecast_anomalies(const fs::path& dir) {
  return ingest::read_grid_file(existing(dir / "anomaly.dgf", "no forecast here"));
}

}  // namespace dune::app
