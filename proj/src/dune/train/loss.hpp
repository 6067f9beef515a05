// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>

namespace dune::train {

/// Latitude-weighted RMSE loss over `n_fields` stacked n_lat x n_lon grids:
/// mean over fields of sqrt( sum_jk L(j) (p - t)^2 / (n_lat n_lon) ).
/// L(j) sits inside the per-cell mean, so a constant offset d gives
/// |d| sqrt(sum_j L(j) / n_lat).
template <class T>
double weighted_loss(std::span<const T> pred, std::span<const T> truth, std::size_t n_lat, std::size_t n_lon,
                     std::span<const double> lat_weights);

/// Per-field terms of the loss (summed, not averaged) and their gradient:
/// grad += scale * L(j) (p - t) / (r n_lat n_lon), with r the field's term.
/// A field with r == 0 contributes a zero gradient. Returns the sum of r.
template <class T>
double weighted_loss_backward(std::span<const T> pred, std::span<const T> truth, std::size_t n_lat,
                              std::size_t n_lon, std::span<const double> lat_weights, double scale,
                              std::span<T> grad);

}  // namespace dune::train
