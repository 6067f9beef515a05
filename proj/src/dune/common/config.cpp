// SPDX-License-Identifier: Apache-2.0
#include "dune/common/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "dune/common/error.hpp"

namespace dune {

namespace {

struct KeyDef {
  const char* key;
  const char* value;
  const char* doc;
};

// clang-format off
constexpr KeyDef kKeys[] = {
  {"split.train", "1980-01:2016-12", "training months (FIRST:LAST)"},
  {"split.val", "2017-01:2018-12", "validation months"},
  {"split.test", "2019-01:2023-12", "test months"},
  {"grid.drop_pole_row", "south", "pole row dropped when an odd-row data grid is mapped to the model grid: south|north|none"},
  {"ingest.lsm_threshold", "0.5", "land-sea mask value at or above which T2m is used instead of SST"},
  {"climatology.mean_base", "1950:1979", "years averaged into the mean climatology used for anomalies"},
  {"climatology.percentile_base", "1991:2020", "years used for the 33rd/66th percentile category thresholds"},
  {"stack.tisr_alignment", "target", "TISR channels follow the target months (target) or the input months (input)"},
  {"forecast.mode", "monthly", "monthly|seasonal|annual"},
  {"model.window", "1", "moving-window length W (1,2,3,4,6,12); input channels = 2W+5"},
  {"model.depth", "4", "number of 2x downsamplings"},
  {"model.channels", "8,16,32,64,128", "channel width per level (depth+1 entries, strictly increasing)"},
  {"model.seed", "0", "parameter initialisation seed"},
  {"train.learning_rate", "0.001", "peak learning rate"},
  {"train.batch_size", "4", "samples per optimizer step"},
  {"train.weight_decay", "0.0001", "L2 weight decay folded into the Adam gradient"},
  {"train.cosine_period", "225", "cosine-annealing period in epochs"},
  {"train.lr_hold", "last_nonzero", "rate used after the cosine period: last_nonzero|floor"},
  {"train.max_epochs", "500", "epoch limit"},
  {"train.patience", "100", "early-stopping patience in epochs"},
  {"train.seed", "0", "batch-order seed"},
  {"verify.regions", "global,global_land,global_ocean,us,australia,boreal_forests", "regions scored by default"},
  {"verify.acc_climatology", "mean_base", "reference for ACC anomalies: mean_base|test_period"},
  {"verify.region.us", "24:50:235:294:land", "LAT0:LAT1:LON0:LON1:land|ocean|all"},
  {"verify.region.australia", "-45:-10:112:155:land", "LAT0:LAT1:LON0:LON1:land|ocean|all"},
  {"verify.region.boreal_forests", "50:70:0:360:land", "LAT0:LAT1:LON0:LON1:land|ocean|all"},
  {"ensemble.members", "10", "ensemble size for synthetic member generation"},
  {"ensemble.noise", "0.1", "perturbation amplitude in K for synthetic members"},
  {"log.level", "info", "error|warn|info|debug"},
};
// clang-format on

bool known_key(std::string_view key) {
  // custom regions: verify.region.NAME
  constexpr std::string_view region_prefix = "verify.region.";
  if (key.size() > region_prefix.size() && key.substr(0, region_prefix.size()) == region_prefix) return true;
  return std::any_of(std::begin(kKeys), std::end(kKeys), [&](const KeyDef& d) { return key == d.key; });
}

std::string env_name(std::string_view key) {
  std::string name = "DUNE_";
  for (char c : key) name += c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return name;
}

}  // namespace

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

Config Config::defaults() {
  Config c;
  for (const auto& d : kKeys) c.values_[d.key] = d.value;
  return c;
}

const std::vector<std::pair<std::string, std::string>>& Config::schema() {
  static const auto table = [] {
    std::vector<std::pair<std::string, std::string>> t;
    for (const auto& d : kKeys) t.emplace_back(d.key, d.doc);
    return t;
  }();
  return table;
}

void Config::merge_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  merge_text(ss.str(), path.string());
}

void Config::merge_text(std::string_view text, std::string_view origin) {
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw UsageError(std::string(origin) + ":" + std::to_string(lineno) + ": expected key = value");
    set(trim(std::string_view(t).substr(0, eq)), trim(std::string_view(t).substr(eq + 1)));
  }
}

void Config::merge_environment() {
  for (const auto& d : kKeys)
    if (const char* v = std::getenv(env_name(d.key).c_str())) values_[d.key] = v;
}

void Config::set(std::string_view key, std::string_view value) {
  if (!known_key(key)) throw UsageError("unknown config key '" + std::string(key) + "'");
  values_[std::string(key)] = std::string(value);
}

bool Config::has(std::string_view key) const { return values_.find(key) != values_.end(); }

const std::string& Config::get(std::string_view key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw UsageError("config key '" + std::string(key) + "' is not set");
  return it->second;
}

double Config::get_double(std::string_view key) const {
  const std::string& v = get(key);
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0')
    throw UsageError("config key '" + std::string(key) + "' is not a number: '" + v + "'");
  return d;
}

long Config::get_int(std::string_view key) const {
  const std::string& v = get(key);
  long out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size())
    throw UsageError("config key '" + std::string(key) + "' is not an integer: '" + v + "'");
  return out;
}

bool Config::get_bool(std::string_view key) const {
  const std::string& v = get(key);
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw UsageError("config key '" + std::string(key) + "' is not a boolean: '" + v + "'");
}

std::vector<std::string> Config::get_list(std::string_view key) const {
  std::vector<std::string> out;
  for (auto& s : split(get(key), ','))
    if (!s.empty()) out.push_back(std::move(s));
  return out;
}

std::vector<int> Config::get_int_list(std::string_view key) const {
  std::vector<int> out;
  for (const auto& s : get_list(key)) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
      throw UsageError("config key '" + std::string(key) + "' has a non-integer entry '" + s + "'");
    out.push_back(v);
  }
  return out;
}

std::uint64_t Config::hash() const {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ull;
    }
    h ^= 0xff;
    h *= 1099511628211ull;
  };
  for (const auto& [k, v] : values_) {
    mix(k);
    mix(v);
  }
  return h;
}

std::string Config::dump() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
  return out;
}

}  // namespace dune
