// SPDX-License-Identifier: Apache-2.0
#include "dune/ingest/netcdf_classic.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "dune/common/error.hpp"

namespace dune::ingest {

namespace {

constexpr std::uint32_t kAbsent = 0x00;
constexpr std::uint32_t kDimension = 0x0A;
constexpr std::uint32_t kVariable = 0x0B;
constexpr std::uint32_t kAttribute = 0x0C;

// Big-endian cursor over the header.
class Cursor {
 public:
  Cursor(const std::string& bytes, std::string where) : b_(bytes), where_(std::move(where)) {}

  std::uint64_t be(std::size_t n) {
    need(n);
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < n; ++i) v = (v << 8) | static_cast<unsigned char>(b_[pos_ + i]);
    pos_ += n;
    return v;
  }
  std::uint32_t u32() { return static_cast<std::uint32_t>(be(4)); }
  std::string chars(std::size_t n) {
    need(n);
    std::string s = b_.substr(pos_, n);
    pos_ += n;
    pos_ += (4 - n % 4) % 4;  // padded to 4 bytes
    return s;
  }
  void skip(std::size_t n) {
    need(n);
    pos_ += n;
  }
  std::size_t pos() const { return pos_; }
  void need(std::size_t n) const {
    if (pos_ + n > b_.size()) throw DataError(where_ + ": truncated netCDF header");
  }

 private:
  const std::string& b_;
  std::string where_;
  std::size_t pos_ = 0;
};

double decode(const unsigned char* p, NetcdfFile::Type t) {
  auto be = [p](int n) {
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v = (v << 8) | p[i];
    return v;
  };
  using T = NetcdfFile::Type;
  switch (t) {
    case T::byte_: return static_cast<double>(static_cast<std::int8_t>(p[0]));
    case T::char_: return static_cast<double>(p[0]);
    case T::ubyte_: return static_cast<double>(p[0]);
    case T::short_: return static_cast<double>(static_cast<std::int16_t>(be(2)));
    case T::ushort_: return static_cast<double>(static_cast<std::uint16_t>(be(2)));
    case T::int_: return static_cast<double>(static_cast<std::int32_t>(be(4)));
    case T::uint_: return static_cast<double>(static_cast<std::uint32_t>(be(4)));
    case T::float_: return static_cast<double>(std::bit_cast<float>(static_cast<std::uint32_t>(be(4))));
    case T::double_: return std::bit_cast<double>(be(8));
    case T::int64_: return static_cast<double>(static_cast<std::int64_t>(be(8)));
    case T::uint64_: return static_cast<double>(be(8));
  }
  return 0.0;
}

}  // namespace

std::size_t type_size(NetcdfFile::Type t) {
  using T = NetcdfFile::Type;
  switch (t) {
    case T::byte_: case T::char_: case T::ubyte_: return 1;
    case T::short_: case T::ushort_: return 2;
    case T::int_: case T::uint_: case T::float_: return 4;
    case T::double_: case T::int64_: case T::uint64_: return 8;
  }
  return 0;
}

std::optional<double> NetcdfFile::Variable::number(const std::string& attr) const {
  auto it = attributes.find(attr);
  if (it == attributes.end() || it->second.values.empty()) return std::nullopt;
  return it->second.values.front();
}

std::optional<std::string> NetcdfFile::Variable::text(const std::string& attr) const {
  auto it = attributes.find(attr);
  if (it == attributes.end() || it->second.type != Type::char_) return std::nullopt;
  return it->second.text;
}

NetcdfFile::NetcdfFile(const std::filesystem::path& path) : path_(path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open netCDF file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  bytes_ = ss.str();
  const std::string where = path.string();
  if (bytes_.size() >= 8 && bytes_.compare(1, 3, "HDF") == 0)
    throw DataError(where + " is netCDF-4/HDF5; convert it with `nccopy -k classic` first");
  if (bytes_.size() < 4 || bytes_.compare(0, 3, "CDF") != 0) throw DataError(where + " is not a netCDF classic file");
  version_ = static_cast<unsigned char>(bytes_[3]);
  if (version_ != 1 && version_ != 2 && version_ != 5)
    throw DataError(where + ": unsupported netCDF version byte " + std::to_string(version_));

  Cursor c(bytes_, where);
  c.skip(4);
  const std::size_t count_width = version_ == 5 ? 8 : 4;
  const std::size_t offset_width = version_ == 1 ? 4 : 8;
  numrecs_ = c.be(count_width);
  if (numrecs_ == (count_width == 4 ? 0xffffffffull : ~0ull)) numrecs_ = 0;  // streaming: computed below

  auto read_name = [&] { return c.chars(static_cast<std::size_t>(c.be(count_width))); };

  auto read_attrs = [&](std::map<std::string, Attribute>& out) {
    const std::uint32_t tag = c.u32();
    const std::uint64_t n = c.be(count_width);
    if (tag == kAbsent) return;
    if (tag != kAttribute) throw DataError(where + ": bad attribute list tag");
    for (std::uint64_t i = 0; i < n; ++i) {
      std::string name = read_name();
      Attribute a;
      a.type = static_cast<Type>(c.u32());
      const std::uint64_t nel = c.be(count_width);
      const std::size_t sz = type_size(a.type);
      if (sz == 0) throw DataError(where + ": bad attribute type");
      if (a.type == Type::char_) {
        a.text = c.chars(static_cast<std::size_t>(nel));
        while (!a.text.empty() && a.text.back() == '\0') a.text.pop_back();
      } else {
        const std::size_t bytes = static_cast<std::size_t>(nel) * sz;
        c.need(bytes);
        const auto* p = reinterpret_cast<const unsigned char*>(bytes_.data()) + c.pos();
        for (std::uint64_t k = 0; k < nel; ++k) a.values.push_back(decode(p + k * sz, a.type));
        c.skip(bytes + (4 - bytes % 4) % 4);
      }
      out.emplace(std::move(name), std::move(a));
    }
  };

  {
    const std::uint32_t tag = c.u32();
    const std::uint64_t n = c.be(count_width);
    if (tag != kAbsent && tag != kDimension) throw DataError(where + ": bad dimension list tag");
    for (std::uint64_t i = 0; tag == kDimension && i < n; ++i) {
      Dimension d;
      d.name = read_name();
      d.length = c.be(count_width);
      d.unlimited = d.length == 0;
      dims_.push_back(std::move(d));
    }
  }
  read_attrs(gatts_);
  {
    const std::uint32_t tag = c.u32();
    const std::uint64_t n = c.be(count_width);
    if (tag != kAbsent && tag != kVariable) throw DataError(where + ": bad variable list tag");
    for (std::uint64_t i = 0; tag == kVariable && i < n; ++i) {
      Variable v;
      v.name = read_name();
      const std::uint64_t nd = c.be(count_width);
      for (std::uint64_t k = 0; k < nd; ++k) {
        const auto id = static_cast<std::size_t>(c.be(count_width));
        if (id >= dims_.size()) throw DataError(where + ": variable " + v.name + " references a bad dimension");
        v.dims.push_back(id);
      }
      read_attrs(v.attributes);
      v.type = static_cast<Type>(c.u32());
      if (type_size(v.type) == 0) throw DataError(where + ": variable " + v.name + " has a bad type");
      v.vsize = c.be(count_width);
      v.begin = c.be(offset_width);
      v.is_record = !v.dims.empty() && dims_[v.dims.front()].unlimited;
      vars_.push_back(std::move(v));
    }
  }

  std::size_t n_record_vars = 0;
  for (const auto& v : vars_) {
    if (!v.is_record) continue;
    ++n_record_vars;
    recsize_ += v.vsize;
  }
  if (n_record_vars == 1) {
    // A lone record variable is stored without per-record padding.
    for (const auto& v : vars_)
      if (v.is_record) {
        std::uint64_t n = type_size(v.type);
        for (std::size_t k = 1; k < v.dims.size(); ++k) n *= dims_[v.dims[k]].length;
        recsize_ = n;
      }
  }
  if (numrecs_ == 0 && recsize_ > 0) {
    for (const auto& v : vars_)
      if (v.is_record) {
        numrecs_ = (bytes_.size() - v.begin) / recsize_;
        break;
      }
  }
  for (auto& d : dims_)
    if (d.unlimited) d.length = numrecs_;

  // Every variable's data must lie inside the file.
  for (const auto& v : vars_) {
    std::uint64_t n = type_size(v.type);
    for (std::size_t k = v.is_record ? 1 : 0; k < v.dims.size(); ++k) n *= dims_[v.dims[k]].length;
    std::uint64_t end = v.begin + n;
    if (v.is_record) end = numrecs_ == 0 ? v.begin : v.begin + (numrecs_ - 1) * recsize_ + n;
    if (end > bytes_.size()) throw DataError(where + ": variable " + v.name + " is truncated");
  }
}

const NetcdfFile::Variable* NetcdfFile::find(const std::string& name) const {
  for (const auto& v : vars_)
    if (v.name == name) return &v;
  return nullptr;
}

const NetcdfFile::Variable& NetcdfFile::variable(const std::string& name) const {
  if (const auto* v = find(name)) return *v;
  throw DataError(path_.string() + ": variable '" + name + "' not found");
}

std::vector<std::uint64_t> NetcdfFile::shape(const Variable& v) const {
  std::vector<std::uint64_t> s;
  for (auto id : v.dims) s.push_back(dims_[id].length);
  return s;
}

std::vector<double> NetcdfFile::read_raw(const Variable& v) const {
  const std::size_t sz = type_size(v.type);
  const auto sh = shape(v);
  std::uint64_t per_record = 1;
  for (std::size_t k = v.is_record ? 1 : 0; k < sh.size(); ++k) per_record *= sh[k];
  const std::uint64_t records = v.is_record ? numrecs_ : 1;
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(per_record * records));
  const auto* base = reinterpret_cast<const unsigned char*>(bytes_.data());
  for (std::uint64_t r = 0; r < records; ++r) {
    const std::uint64_t off = v.begin + r * (v.is_record ? recsize_ : 0);
    if (off + per_record * sz > bytes_.size())
      throw DataError(path_.string() + ": data of variable " + v.name + " is truncated");
    for (std::uint64_t k = 0; k < per_record; ++k) out.push_back(decode(base + off + k * sz, v.type));
  }
  return out;
}

std::vector<double> NetcdfFile::read_unpacked(const Variable& v) const {
  std::vector<double> x = read_raw(v);
  const auto fill = v.number("_FillValue");
  const auto missing = v.number("missing_value");
  const double scale = v.number("scale_factor").value_or(1.0);
  const double offset = v.number("add_offset").value_or(0.0);
  for (double& d : x) {
    if ((fill && d == *fill) || (missing && d == *missing) || std::isnan(d)) {
      d = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    d = d * scale + offset;
  }
  return x;
}

}  // namespace dune::ingest
