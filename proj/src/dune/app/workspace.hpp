// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "dune/common/config.hpp"
#include "dune/common/stamp.hpp"
#include "dune/grid/climatology.hpp"
#include "dune/grid/field.hpp"

namespace dune::app {

inline constexpr const char* kVersion = "0.1.0";

enum class LogLevel { error = 0, warn = 1, info = 2, debug = 3 };
LogLevel parse_log_level(const std::string& text);

/// Sink for human-readable progress lines.
using LogSink = std::function<void(LogLevel, const std::string&)>;

/// Directory layout under one output root:
///   data/          prepared inputs on the model grid (+ dune.cfg from synth)
///   climatology/   <kind>_mean.dgf, <kind>_p33.dgf, <kind>_p66.dgf
///   models/        <kind>_w<W>/checkpoint.dck, train_log.jsonl, loss_history.csv
///   forecasts/     <source>/<kind>/anomaly.dgf (+ absolute.dgf, manifest.json)
///   reports/       score and ensemble tables
///   plots/         SVG figures
class Workspace {
 public:
  explicit Workspace(std::filesystem::path root) : root_(std::move(root)) {}

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path data_dir() const { return root_ / "data"; }
  std::filesystem::path climatology_dir() const { return root_ / "climatology"; }
  std::filesystem::path model_dir(PeriodKind kind, int window) const;
  std::filesystem::path forecast_dir(const std::string& source, PeriodKind kind) const;
  std::filesystem::path reports_dir() const { return root_ / "reports"; }
  std::filesystem::path plots_dir() const { return root_ / "plots"; }
  std::filesystem::path data_config() const { return data_dir() / "dune.cfg"; }

 private:
  std::filesystem::path root_;
};

/// Monthly inputs on the model grid.
struct PreparedData {
  GridPtr grid;
  std::vector<Field> monthly;     // blended temperature, contiguous
  std::vector<Field> constants;   // lsm, slt, orography, cvh, cvl
  std::vector<Field> tisr_cycle;  // 12 calendar months

  const Field& lsm() const { return constants.at(0); }
};

void save_prepared(const Workspace& ws, const PreparedData& d);
PreparedData load_prepared(const Workspace& ws);

struct ClimatologyPair {
  ClimatologyTable mean;        // anomaly reference
  ClimatologyTable percentile;  // category thresholds
};

void save_climatology(const Workspace& ws, const ClimatologyPair& c);
bool has_climatology(const Workspace& ws, PeriodKind kind);
ClimatologyPair load_climatology(const Workspace& ws, PeriodKind kind);

/// Run record written next to the outputs of every command.
struct Manifest {
  std::string command;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::vector<std::pair<std::string, std::string>> extra;  // free-form key/value notes
  void write(const std::filesystem::path& path, const Config& cfg) const;
};

/// Reads and writes forecast directories.
void save_forecasts(const std::filesystem::path& dir, const std::vector<Field>& anomaly,
                    const std::vector<Field>* absolute);
std::vector<Field> load_forecast_anomalies(const std::filesystem::path& dir);

}  // namespace dune::app
