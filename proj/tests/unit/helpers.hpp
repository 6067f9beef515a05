// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "dune/grid/field.hpp"
#include "dune/grid/grid_spec.hpp"

namespace testutil {

inline dune::GridPtr grid(std::size_t n_lat, std::size_t n_lon) {
  return dune::make_grid(dune::GridSpec::regular(n_lat, n_lon));
}

inline dune::Field field(const dune::GridPtr& g, const dune::Stamp& s, float fill = 0.0f,
                         dune::Variable v = dune::Variable::blended_t) {
  return dune::Field(v, s, g, fill);
}

inline dune::Field random_field(const dune::GridPtr& g, std::optional<dune::Stamp> s, std::mt19937_64& rng,
                                double lo = -3.0, double hi = 3.0, dune::Variable v = dune::Variable::blended_t) {
  dune::Field f(v, s, g);
  std::uniform_real_distribution<double> u(lo, hi);
  for (auto& x : f.values) x = static_cast<float>(u(rng));
  return f;
}

/// Distance in units in the last place between two finite doubles.
inline std::uint64_t ulp_distance(double a, double b) {
  if (a == b) return 0;
  auto key = [](double x) {
    std::int64_t i;
    std::memcpy(&i, &x, sizeof i);
    return i < 0 ? std::int64_t(0x8000000000000000ULL) - i : i;
  };
  const auto d = key(a) - key(b);
  return static_cast<std::uint64_t>(d < 0 ? -d : d);
}

inline std::uint64_t ulp_distance(float a, float b) {
  if (a == b) return 0;
  auto key = [](float x) {
    std::int32_t i;
    std::memcpy(&i, &x, sizeof i);
    return i < 0 ? std::int64_t(0x80000000LL) - i : std::int64_t(i);
  };
  const auto d = key(a) - key(b);
  return static_cast<std::uint64_t>(d < 0 ? -d : d);
}

inline double rel_err(double a, double b) {
  const double s = std::max(std::abs(a), std::abs(b));
  return s == 0 ? 0 : std::abs(a - b) / s;
}

/// Fresh empty directory under the build tree's temp area.
inline std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("dune_test_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace testutil
