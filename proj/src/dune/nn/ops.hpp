// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "dune/nn/tensor.hpp"

namespace dune::nn {

// All convolutions pad geographically: circular in longitude (width axis),
// edge-replicated in latitude (height axis). Backward functions accumulate
// into their gradient outputs.

/// k x k convolution (k odd), stride 1. Weights [cout][cin][k][k].
template <class T>
void conv2d_forward(const Tensor<T>& in, const T* weight, const T* bias, int cout, int k, Tensor<T>& out);

template <class T>
void conv2d_backward(const Tensor<T>& in, const Tensor<T>& grad_out, const T* weight, int k, T* grad_weight,
                     T* grad_bias, Tensor<T>* grad_in);

/// Transposed convolution, 2x2 kernel, stride 2. Weights [cin][cout][2][2].
template <class T>
void conv_transpose2x2_forward(const Tensor<T>& in, const T* weight, const T* bias, int cout, Tensor<T>& out);

template <class T>
void conv_transpose2x2_backward(const Tensor<T>& in, const Tensor<T>& grad_out, const T* weight, T* grad_weight,
                                T* grad_bias, Tensor<T>* grad_in);

/// Mean over non-overlapping factor x factor blocks.
template <class T>
Tensor<T> avg_pool(const Tensor<T>& in, int factor);

template <class T>
void avg_pool_backward(const Tensor<T>& grad_out, int factor, Tensor<T>& grad_in, int channel_offset = 0);

template <class T>
void relu_inplace(Tensor<T>& t);

/// grad *= (activated > 0)
template <class T>
void relu_backward(const Tensor<T>& activated, Tensor<T>& grad);

/// Concatenation along channels.
template <class T>
Tensor<T> concat(const std::vector<const Tensor<T>*>& parts);

}  // namespace dune::nn
