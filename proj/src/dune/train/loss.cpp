// SPDX-License-Identifier: Apache-2.0
#include "dune/train/loss.hpp"

#include <cmath>

#include "dune/common/error.hpp"

namespace dune::train {

namespace {

std::size_t check(std::size_t np, std::size_t nt, std::size_t n_lat, std::size_t n_lon, std::size_t nw) {
  const std::size_t plane = n_lat * n_lon;
  if (np != nt) throw DataError("loss: prediction and truth sizes differ");
  if (nw != n_lat) throw DataError("loss: latitude weight count does not match n_lat");
  if (plane == 0 || np % plane != 0 || np == 0) throw DataError("loss: size is not a whole number of grids");
  return np / plane;
}

template <class T>
double field_term(const T* p, const T* t, std::size_t n_lat, std::size_t n_lon, std::span<const double> L) {
  double acc = 0;
  for (std::size_t j = 0; j < n_lat; ++j) {
    double row = 0;
    for (std::size_t k = 0; k < n_lon; ++k) {
      const double d = static_cast<double>(p[j * n_lon + k]) - static_cast<double>(t[j * n_lon + k]);
      row += d * d;
    }
    acc += L[j] * row;
  }
  return std::sqrt(acc / static_cast<double>(n_lat * n_lon));
}

}  // namespace

template <class T>
double weighted_loss(std::span<const T> pred, std::span<const T> truth, std::size_t n_lat, std::size_t n_lon,
                     std::span<const double> L) {
  const std::size_t n = check(pred.size(), truth.size(), n_lat, n_lon, L.size());
  const std::size_t plane = n_lat * n_lon;
  double sum = 0;
  for (std::size_t f = 0; f < n; ++f) sum += field_term(pred.data() + f * plane, truth.data() + f * plane, n_lat, n_lon, L);
  return sum / static_cast<double>(n);
}

template <class T>
double weighted_loss_backward(std::span<const T> pred, std::span<const T> truth, std::size_t n_lat,
                              std::size_t n_lon, std::span<const double> L, double scale, std::span<T> grad) {
  const std::size_t n = check(pred.size(), truth.size(), n_lat, n_lon, L.size());
  if (grad.size() != pred.size()) throw DataError("loss: gradient buffer size differs");
  const std::size_t plane = n_lat * n_lon;
  double sum = 0;
  for (std::size_t f = 0; f < n; ++f) {
    const T* p = pred.data() + f * plane;
    const T* t = truth.data() + f * plane;
    const double r = field_term(p, t, n_lat, n_lon, L);
    sum += r;
    if (r == 0) continue;
    const double c = scale / (r * static_cast<double>(plane));
    T* g = grad.data() + f * plane;
    for (std::size_t j = 0; j < n_lat; ++j)
      for (std::size_t k = 0; k < n_lon; ++k) {
        const std::size_t q = j * n_lon + k;
        g[q] += static_cast<T>(c * L[j] * (static_cast<double>(p[q]) - static_cast<double>(t[q])));
      }
  }
  return sum;
}

template double weighted_loss<float>(std::span<const float>, std::span<const float>, std::size_t, std::size_t,
                                     std::span<const double>);
template double weighted_loss<double>(std::span<const double>, std::span<const double>, std::size_t, std::size_t,
                                      std::span<const double>);
template double weighted_loss_backward<float>(std::span<const float>, std::span<const float>, std::size_t,
                                              std::size_t, std::span<const double>, double, std::span<float>);
template double weighted_loss_backward<double>(std::span<const double>, std::span<const double>, std::size_t,
                                               std::size_t, std::span<const double>, double, std::span<double>);

}  // namespace dune::train
