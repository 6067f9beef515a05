// SPDX-License-Identifier: Apache-2.0
#include "dune/ingest/grid_file.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

#include "dune/common/error.hpp"

namespace dune::ingest {

namespace {

constexpr char kMagic[8] = {'D', 'U', 'N', 'E', 'G', 'R', 'D', '1'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f32(std::string& out, float f) { put_u32(out, std::bit_cast<std::uint32_t>(f)); }

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

void write_file_atomic(const std::filesystem::path& path, const std::string& bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_grid_file(const std::filesystem::path& path, std::span<const Field> fields) {
  if (fields.empty()) throw DataError("refusing to write an empty grid file " + path.string());
  const Field& first = fields.front();
  nlohmann::json stamps = nlohmann::json::array();
  for (const auto& f : fields) {
    require_same_grid(f, first, "grid file records");
    if (f.variable != first.variable) throw DataError("grid file records mix variables");
    if (f.stamp.has_value() != first.stamp.has_value()) throw DataError("grid file records mix stamped and constant fields");
    if (f.stamp) {
      if (f.stamp->kind != first.stamp->kind) throw DataError("grid file records mix period kinds");
      stamps.push_back(f.stamp->str());
    }
  }
  nlohmann::json header = {
      {"format", "dune-grid"},
      {"version", 1},
      {"variable", to_string(first.variable)},
      {"units", units_of(first.variable)},
      {"kind", first.stamp ? nlohmann::json(to_string(first.stamp->kind)) : nlohmann::json(nullptr)},
      {"stamps", stamps},
      {"count", fields.size()},
      {"grid", {{"lat", first.grid->lat()}, {"lon", first.grid->lon()}}},
      {"layout", "time-major records of n_lat*n_lon float32 little-endian, row-major (lat, lon), NaN = missing"},
  };
  const std::string h = header.dump();
  std::string out(kMagic, sizeof kMagic);
  put_u32(out, static_cast<std::uint32_t>(h.size()));
  out += h;
  out.reserve(out.size() + fields.size() * first.size() * 4);
  for (const auto& f : fields)
    for (std::size_t k = 0; k < f.values.size(); ++k)
      put_f32(out, f.is_missing(k) ? std::numeric_limits<float>::quiet_NaN() : f.values[k]);
  write_file_atomic(path, out);
}

std::vector<Field> read_grid_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open grid file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string bytes = ss.str();
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0)
    throw DataError(path.string() + " is not a dune grid file");
  const std::uint32_t hlen = get_u32(p + 8);
  if (bytes.size() < 12 + static_cast<std::size_t>(hlen)) throw DataError(path.string() + ": truncated header");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(12, hlen));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": corrupt header: " + e.what());
  }
  try {
    const Variable var = parse_variable(header.at("variable").get<std::string>());
    auto grid = make_grid(GridSpec(header.at("grid").at("lat").get<std::vector<double>>(),
                                   header.at("grid").at("lon").get<std::vector<double>>()));
    const auto count = header.at("count").get<std::size_t>();
    const auto& stamps = header.at("stamps");
    if (!stamps.empty() && stamps.size() != count) throw DataError(path.string() + ": stamp count mismatch");
    const std::size_t cells = grid->size();
    if (bytes.size() != 12 + hlen + count * cells * 4)
      throw DataError(path.string() + ": payload size does not match header (corrupt or truncated file)");

    std::vector<Field> out;
    out.reserve(count);
    const unsigned char* data = p + 12 + hlen;
    for (std::size_t t = 0; t < count; ++t) {
      std::optional<Stamp> st;
      if (!stamps.empty()) st = Stamp::parse(stamps[t].get<std::string>());
      Field f(var, st, grid);
      for (std::size_t k = 0; k < cells; ++k) {
        const float v = std::bit_cast<float>(get_u32(data + (t * cells + k) * 4));
        f.values[k] = v;
        if (std::isnan(v)) {
          if (f.missing.empty()) f.missing.assign(cells, 0);
          f.missing[k] = 1;
        }
      }
      out.push_back(std::move(f));
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": malformed header: " + e.what());
  } catch (const UsageError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace dune::ingest
