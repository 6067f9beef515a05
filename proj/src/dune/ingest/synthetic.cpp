// SPDX-License-Identifier: Apache-2.0
#include "dune/ingest/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "dune/common/error.hpp"

namespace dune::ingest {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSolarConstant = 1361.0;

double deg2rad(double d) { return d * kPi / 180.0; }

// Angular distance in degrees between two lat/lon points.
double arc_deg(double lat1, double lon1, double lat2, double lon2) {
  const double a = std::sin(deg2rad(lat1)) * std::sin(deg2rad(lat2)) +
                   std::cos(deg2rad(lat1)) * std::cos(deg2rad(lat2)) * std::cos(deg2rad(lon1 - lon2));
  return std::acos(std::clamp(a, -1.0, 1.0)) * 180.0 / kPi;
}

struct Blob {
  double lat, lon, radius;
};

// Rough continents so the named verification regions contain land.
constexpr Blob kContinents[] = {
    {45, 255, 22}, {60, 270, 18}, {35, 280, 10},   // North America
    {-12, 300, 18}, {-35, 292, 10},                // South America
    {50, 40, 25}, {55, 95, 28}, {35, 100, 18},     // Eurasia
    {5, 20, 22}, {-20, 25, 14},                    // Africa
    {-25, 135, 16},                                // Australia
};

// Separable smoothing: two passes of a 5-wide box in each direction,
// circular in longitude and clamped in latitude.
void smooth(std::vector<double>& f, std::size_t n_lat, std::size_t n_lon) {
  std::vector<double> tmp(f.size());
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t i = 0; i < n_lat; ++i)
      for (std::size_t j = 0; j < n_lon; ++j) {
        double s = 0;
        for (int d = -2; d <= 2; ++d) s += f[i * n_lon + (j + n_lon + static_cast<std::size_t>(d + 2) - 2) % n_lon];
        tmp[i * n_lon + j] = s / 5.0;
      }
    for (std::size_t i = 0; i < n_lat; ++i)
      for (std::size_t j = 0; j < n_lon; ++j) {
        double s = 0;
        for (int d = -2; d <= 2; ++d) {
          const long ii = std::clamp<long>(static_cast<long>(i) + d, 0, static_cast<long>(n_lat) - 1);
          s += tmp[static_cast<std::size_t>(ii) * n_lon + j];
        }
        f[i * n_lon + j] = s / 5.0;
      }
  }
}

// Standard deviation left after smooth() applied to unit white noise
// (interior cells): sum of squared weights of the 9-tap triangular kernel, squared.
double smooth_gain() {
  const double w[9] = {1, 2, 3, 4, 5, 4, 3, 2, 1};
  double s = 0;
  for (double x : w) s += (x / 25.0) * (x / 25.0);
  return std::sqrt(s * s);
}

}  // namespace

double monthly_insolation(double lat_deg, int month) {
  const double doy = 30.4375 * (month - 1) + 15.0;
  const double decl = -deg2rad(23.44) * std::cos(2.0 * kPi * (doy + 10.0) / 365.25);
  const double phi = deg2rad(std::clamp(lat_deg, -89.999, 89.999));
  const double x = -std::tan(phi) * std::tan(decl);
  const double h0 = x >= 1.0 ? 0.0 : (x <= -1.0 ? kPi : std::acos(x));
  const double q = kSolarConstant / kPi *
                   (h0 * std::sin(phi) * std::sin(decl) + std::cos(phi) * std::cos(decl) * std::sin(h0));
  return std::max(0.0, q);
}

SyntheticCorpus generate_synthetic_corpus(const SyntheticOptions& opt) {
  if (opt.n_lat < 4 || opt.n_lon < 4) throw UsageError("synthetic grid needs at least 4x4 cells");
  if (opt.years <= 0) throw UsageError("synthetic corpus needs at least one year");
  const std::size_t n_lat = opt.n_lat, n_lon = opt.n_lon, cells = n_lat * n_lon;
  auto grid = make_grid(GridSpec::regular(n_lat, n_lon, PoleRow::south));
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  // Seeded low-frequency perturbation of the continent field.
  std::vector<double> wobble(cells);
  for (auto& w : wobble) w = normal(rng);
  smooth(wobble, n_lat, n_lon);
  smooth(wobble, n_lat, n_lon);

  SyntheticCorpus c;
  auto& k = c.constants;
  k.lsm = Field(Variable::lsm, std::nullopt, grid);
  k.slt = Field(Variable::slt, std::nullopt, grid);
  k.orography = Field(Variable::orography, std::nullopt, grid);
  k.cvh = Field(Variable::cvh, std::nullopt, grid);
  k.cvl = Field(Variable::cvl, std::nullopt, grid);

  std::vector<double> base(cells), amplitude(cells), sigma(cells), phi_ar(cells);
  for (std::size_t i = 0; i < n_lat; ++i) {
    const double lat = grid->lat()[i];
    for (std::size_t j = 0; j < n_lon; ++j) {
      const double lon = grid->lon()[j];
      const std::size_t q = i * n_lon + j;
      double land = 0.0;
      for (const auto& b : kContinents) {
        const double d = arc_deg(lat, lon, b.lat, b.lon) / b.radius;
        land = std::max(land, std::exp(-d * d));
      }
      if (lat < -70.0) land = 1.0;
      land += 2.0 * wobble[q];
      const double lsm = 1.0 / (1.0 + std::exp(-12.0 * (land - 0.45)));
      const double hill = 0.5 + 0.5 * std::sin(deg2rad(3.0 * lon)) * std::cos(deg2rad(2.0 * lat));
      k.lsm.values[q] = static_cast<float>(lsm);
      k.orography.values[q] = static_cast<float>(lsm > 0.5 ? 200.0 + 1800.0 * hill * lsm : 0.0);
      k.slt.values[q] = static_cast<float>(lsm > 0.5 ? 1.0 + std::floor(5.999 * hill) : 0.0);
      const double forest = std::exp(-std::pow(lat / 12.0, 2)) + std::exp(-std::pow((std::abs(lat) - 58.0) / 8.0, 2));
      const double cvh = std::clamp(lsm * 0.9 * forest, 0.0, 1.0);
      k.cvh.values[q] = static_cast<float>(cvh);
      k.cvl.values[q] = static_cast<float>(std::clamp(lsm * 0.6 * (1.0 - cvh), 0.0, 1.0));

      const double s = std::sin(deg2rad(lat));
      base[q] = 301.0 - 42.0 * s * s - 0.0065 * k.orography.values[q] - 4.0 * lsm * std::abs(s);
      amplitude[q] = (3.0 + 15.0 * lsm) * s;
      sigma[q] = opt.noise_scale * (0.5 + 1.3 * lsm);
      phi_ar[q] = 0.85 - 0.2 * lsm;
    }
  }
  for (int m = 1; m <= 12; ++m) {
    Field t(Variable::tisr, Stamp::month(2000, m), grid);
    t.stamp.reset();
    for (std::size_t i = 0; i < n_lat; ++i) {
      const float v = static_cast<float>(monthly_insolation(grid->lat()[i], m) * 3600.0);
      std::fill_n(t.values.begin() + static_cast<long>(i * n_lon), n_lon, v);
    }
    k.tisr_cycle.push_back(std::move(t));
  }

  const double gain = smooth_gain();
  std::vector<double> noise(cells, 0.0), eps(cells);
  auto draw = [&] {
    for (auto& e : eps) e = normal(rng);
    smooth(eps, n_lat, n_lon);
    for (auto& e : eps) e /= gain;
  };
  draw();
  for (std::size_t q = 0; q < cells; ++q) noise[q] = sigma[q] * eps[q];

  const int first_year = opt.last_year - opt.years + 1;
  const Stamp first = Stamp::month(first_year, 1);
  for (long t = 0; t < 12L * opt.years; ++t) {
    const Stamp st = first.next(t);
    if (t > 0) {
      draw();
      for (std::size_t q = 0; q < cells; ++q)
        noise[q] = phi_ar[q] * noise[q] + std::sqrt(1.0 - phi_ar[q] * phi_ar[q]) * sigma[q] * eps[q];
    }
    const double season = std::cos(2.0 * kPi * (st.slot - 1) / 12.0);
    const double trend = opt.trend_per_year * (static_cast<double>(st.year - first_year) + (st.slot - 1) / 12.0);
    Field t2m(Variable::t2m, st, grid), sst(Variable::sst, st, grid);
    sst.missing.assign(cells, 0);
    for (std::size_t q = 0; q < cells; ++q) {
      const double v = base[q] - amplitude[q] * season + trend + noise[q];
      t2m.values[q] = static_cast<float>(v);
      if (k.lsm.values[q] >= 0.5f) {
        sst.missing[q] = 1;
        sst.values[q] = std::numeric_limits<float>::quiet_NaN();
      } else {
        sst.values[q] = static_cast<float>(v + 0.8);
      }
    }
    c.t2m.push_back(std::move(t2m));
    c.sst.push_back(std::move(sst));
  }
  return c;
}

}  // namespace dune::ingest
