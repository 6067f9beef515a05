// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace dune::ingest {

/// Reader for the netCDF classic on-disk formats (CDF-1, CDF-2 64-bit
/// offset, CDF-5 64-bit data). netCDF-4/HDF5 files are rejected with a hint
/// to convert them (`nccopy -k classic in.nc out.nc`).
class NetcdfFile {
 public:
  enum class Type : int { byte_ = 1, char_ = 2, short_ = 3, int_ = 4, float_ = 5, double_ = 6,
                          ubyte_ = 7, ushort_ = 8, uint_ = 9, int64_ = 10, uint64_ = 11 };

  struct Dimension {
    std::string name;
    std::uint64_t length = 0;  ///< current record count for the unlimited dimension
    bool unlimited = false;
  };

  struct Attribute {
    Type type = Type::char_;
    std::string text;            ///< for char attributes
    std::vector<double> values;  ///< numeric attributes
  };

  struct Variable {
    std::string name;
    std::vector<std::size_t> dims;  ///< indices into dimensions()
    std::map<std::string, Attribute> attributes;
    Type type = Type::float_;
    std::uint64_t vsize = 0;
    std::uint64_t begin = 0;
    bool is_record = false;

    std::optional<double> number(const std::string& attr) const;
    std::optional<std::string> text(const std::string& attr) const;
  };

  explicit NetcdfFile(const std::filesystem::path& path);

  const std::vector<Dimension>& dimensions() const { return dims_; }
  const std::vector<Variable>& variables() const { return vars_; }
  const std::map<std::string, Attribute>& global_attributes() const { return gatts_; }

  const Variable* find(const std::string& name) const;
  const Variable& variable(const std::string& name) const;
  std::vector<std::uint64_t> shape(const Variable& v) const;

  /// Raw values converted to double (no scale/offset applied).
  std::vector<double> read_raw(const Variable& v) const;

  /// Values with scale_factor/add_offset applied; _FillValue and
  /// missing_value become NaN.
  std::vector<double> read_unpacked(const Variable& v) const;

 private:
  std::filesystem::path path_;
  std::string bytes_;
  int version_ = 1;
  std::uint64_t numrecs_ = 0;
  std::uint64_t recsize_ = 0;
  std::vector<Dimension> dims_;
  std::map<std::string, Attribute> gatts_;
  std::vector<Variable> vars_;
};

std::size_t type_size(NetcdfFile::Type t);

}  // namespace dune::ingest
