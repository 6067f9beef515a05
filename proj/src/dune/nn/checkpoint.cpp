// SPDX-License-Identifier: Apache-2.0
#include "dune/nn/checkpoint.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "dune/common/error.hpp"
#include "dune/common/hash.hpp"
#include "dune/ingest/grid_file.hpp"
#include "json.hpp"

namespace dune::nn {

namespace {

constexpr char kMagic[8] = {'D', 'U', 'N', 'E', 'C', 'K', 'P', '1'};

using nlohmann::json;

json header_json(const Checkpoint& c) {
  json j;
  j["format"] = "dune-checkpoint";
  j["version"] = 1;
  j["model"] = {{"depth", c.model.depth},
                {"channels", c.model.channels},
                {"in_channels", c.model.in_channels},
                {"out_channels", c.model.out_channels},
                {"n_lat", c.model.n_lat},
                {"n_lon", c.model.n_lon},
                {"filter_size", 3},
                {"head_count", kHeadCount},
                {"padding", {{"longitude", "circular"}, {"latitude", "replicate"}}},
                {"precision", "float32"}};
  j["mode"] = to_string(c.mode);
  j["window"] = c.window;
  j["tisr_alignment"] = c.tisr_alignment == ingest::TisrAlignment::target ? "target" : "input";
  j["seed"] = c.seed;
  if (c.grid) j["grid"] = {{"lat", c.grid->lat()}, {"lon", c.grid->lon()}};
  json norm = json::array();
  for (const auto& s : c.norm) norm.push_back({{"channel", s.channel()}, {"x_min", s.x_min()}, {"x_max", s.x_max()}});
  j["norm_stats"] = norm;
  j["stats_hash"] = c.stats_hash();
  j["climatology_hash"] = c.climatology_hash;
  j["loss_space"] = c.loss_space;
  json hist = json::array();
  for (const auto& e : c.history)
    hist.push_back({{"epoch", e.epoch},
                    {"lr", e.learning_rate},
                    {"train_loss", e.train_loss},
                    {"val_loss", e.val_loss},
                    {"test_loss", std::isnan(e.test_loss) ? json(nullptr) : json(e.test_loss)},
                    {"is_best", e.is_best}});
  j["history"] = hist;
  j["best_epoch"] = c.best_epoch;
  json cfg = json::object();
  for (const auto& [k, v] : c.config) cfg[k] = v;
  j["config"] = cfg;
  j["param_count"] = c.params.size();
  return j;
}

}  // namespace

const NormStats& Checkpoint::stats(const std::string& channel) const {
  for (const auto& s : norm)
    if (s.channel() == channel) return s;
  throw DataError("checkpoint has no normalization statistics for channel '" + channel + "'");
}

std::string norm_stats_hash(const std::vector<NormStats>& norm) {
  std::ostringstream os;
  os.precision(17);
  for (const auto& s : norm) os << s.channel() << ':' << s.x_min() << ':' << s.x_max() << ';';
  return hex64(fnv1a(os.str()));
}

std::string Checkpoint::stats_hash() const { return norm_stats_hash(norm); }

std::string Checkpoint::id() const {
  auto h = fnv1a(header_json(*this).dump());
  h = fnv1a(std::string_view(reinterpret_cast<const char*>(params.data()), params.size() * sizeof(float)), h);
  return hex64(h);
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c) {
  static_assert(std::endian::native == std::endian::little, "checkpoint writer assumes a little-endian host");
  const std::string header = header_json(c).dump();
  std::string bytes(kMagic, sizeof kMagic);
  const auto n = static_cast<std::uint32_t>(header.size());
  bytes.append(reinterpret_cast<const char*>(&n), 4);
  bytes += header;
  bytes.append(reinterpret_cast<const char*>(c.params.data()), c.params.size() * sizeof(float));
  ingest::write_file_atomic(path, bytes);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), kMagic, 8) != 0)
    throw DataError(path.string() + " is not a checkpoint file");
  std::uint32_t n = 0;
  std::memcpy(&n, bytes.data() + 8, 4);
  if (bytes.size() < 12 + std::size_t(n)) throw DataError("checkpoint header is truncated: " + path.string());
  json j;
  try {
    j = json::parse(bytes.substr(12, n));
  } catch (const json::exception& e) {
    throw DataError("checkpoint header is corrupt: " + std::string(e.what()));
  }
  Checkpoint c;
  try {
    const auto& m = j.at("model");
    c.model.depth = m.at("depth");
    c.model.channels = m.at("channels").get<std::vector<int>>();
    c.model.in_channels = m.at("in_channels");
    c.model.out_channels = m.at("out_channels");
    c.model.n_lat = m.at("n_lat");
    c.model.n_lon = m.at("n_lon");
    c.mode = parse_period_kind(j.at("mode").get<std::string>());
    c.window = j.at("window");
    c.tisr_alignment = ingest::parse_tisr_alignment(j.at("tisr_alignment").get<std::string>());
    c.seed = j.at("seed");
    if (j.contains("grid"))
      c.grid = make_grid(GridSpec(j["grid"].at("lat").get<std::vector<double>>(),
                                  j["grid"].at("lon").get<std::vector<double>>()));
    for (const auto& s : j.at("norm_stats")) c.norm.emplace_back(s.at("channel"), s.at("x_min"), s.at("x_max"));
    c.climatology_hash = j.at("climatology_hash");
    c.loss_space = j.at("loss_space");
    for (const auto& e : j.at("history")) {
      EpochRecord r;
      r.epoch = e.at("epoch");
      r.learning_rate = e.at("lr");
      r.train_loss = e.at("train_loss");
      r.val_loss = e.at("val_loss");
      if (e.contains("test_loss") && !e["test_loss"].is_null()) r.test_loss = e["test_loss"];
      r.is_best = e.at("is_best");
      c.history.push_back(r);
    }
    c.best_epoch = j.at("best_epoch");
    for (const auto& [k, v] : j.at("config").items()) c.config.emplace_back(k, v.get<std::string>());
    const std::size_t count = j.at("param_count");
    if (bytes.size() != 12 + std::size_t(n) + count * sizeof(float))
      throw DataError("checkpoint parameter block has the wrong size: " + path.string());
    c.params.resize(count);
    std::memcpy(c.params.data(), bytes.data() + 12 + n, count * sizeof(float));
    if (j.at("stats_hash") != c.stats_hash()) throw DataError("checkpoint stats hash does not match its statistics");
  } catch (const json::exception& e) {
    throw DataError("checkpoint header is incomplete: " + std::string(e.what()));
  }
  c.model.validate();
  if (DuneNet<float>(c.model).parameter_count() != c.params.size())
    throw DataError("checkpoint parameter count does not match its model configuration");
  return c;
}

}  // namespace dune::nn
