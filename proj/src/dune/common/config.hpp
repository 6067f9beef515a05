// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dune {

/// Flat `key = value` configuration with layered overrides.
///
/// Layers are applied in this order, later layers winning:
///   built-in defaults < data-directory dune.cfg < --config file
///   < DUNE_* environment variables < explicit set() calls (CLI flags).
/// Environment names are the key upper-cased with '.' replaced by '_',
/// e.g. train.max_epochs -> DUNE_TRAIN_MAX_EPOCHS.
class Config {
 public:
  /// Config populated with the documented defaults.
  static Config defaults();

  /// Parses `key = value` lines; '#' starts a comment. Unknown keys are rejected.
  void merge_file(const std::filesystem::path& path);
  void merge_text(std::string_view text, std::string_view origin = "<text>");
  void merge_environment();
  void set(std::string_view key, std::string_view value);

  bool has(std::string_view key) const;
  const std::string& get(std::string_view key) const;
  double get_double(std::string_view key) const;
  long get_int(std::string_view key) const;
  bool get_bool(std::string_view key) const;
  std::vector<std::string> get_list(std::string_view key) const;
  std::vector<int> get_int_list(std::string_view key) const;

  /// Stable FNV-1a hash of the resolved key/value set (manifests, provenance).
  std::uint64_t hash() const;
  std::string dump() const;

  const std::map<std::string, std::string, std::less<>>& entries() const { return values_; }

  /// Every recognised key with its one-line description.
  static const std::vector<std::pair<std::string, std::string>>& schema();

 private:
  std::map<std::string, std::string, std::less<>> values_;
};

std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

}  // namespace dune
