// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dune/nn/tensor.hpp"

namespace dune::nn {

inline constexpr int kHeadCount = 4;

struct ModelConfig {
  int depth = 4;
  std::vector<int> channels{8, 16, 32, 64, 128};
  int in_channels = 7;
  int out_channels = 1;  // equals the window W
  int n_lat = 0;         // 0 leaves the grid unchecked
  int n_lon = 0;

  /// Desk-scale defaults for a given window.
  static ModelConfig for_window(int window, int n_lat, int n_lon);
  /// The published full-scale depth-4 configuration at 0.5 degrees.
  static ModelConfig full_scale(int window);

  void validate() const;
  bool grid_ok(int h, int w) const;
  /// Top-row node column that feeds head h.
  int head_column(int h) const;
};

struct ResidualBlockSpec {
  int in_channels = 0;
  int out_channels = 0;

  bool has_shortcut() const { return in_channels != out_channels; }
  std::size_t conv1_weight() const { return 0; }
  std::size_t conv1_bias() const { return std::size_t(out_channels) * in_channels * 9; }
  std::size_t conv2_weight() const { return conv1_bias() + out_channels; }
  std::size_t conv2_bias() const { return conv2_weight() + std::size_t(out_channels) * out_channels * 9; }
  std::size_t shortcut_weight() const { return conv2_bias() + out_channels; }
  std::size_t shortcut_bias() const { return shortcut_weight() + std::size_t(out_channels) * in_channels; }
  std::size_t parameter_count() const {
    return has_shortcut() ? shortcut_bias() + out_channels : conv2_bias() + out_channels;
  }
};

template <class T>
struct ResidualBlockCache {
  Tensor<T> hidden;  // ReLU(conv1(x))
  Tensor<T> out;
};

/// out = ReLU(conv2(ReLU(conv1(x))) + shortcut(x)); params laid out as in ResidualBlockSpec.
template <class T>
void residual_block_forward(const ResidualBlockSpec& spec, const T* params, const Tensor<T>& x,
                            ResidualBlockCache<T>& cache);

/// Accumulates parameter gradients into grad_params and input gradient into grad_x.
template <class T>
void residual_block_backward(const ResidualBlockSpec& spec, const T* params, const Tensor<T>& x,
                             const ResidualBlockCache<T>& cache, Tensor<T> grad_out, T* grad_params,
                             Tensor<T>& grad_x);

struct LayerInfo {
  std::string name;
  std::string kind;  // conv3x3, conv1x1, convT2x2
  int in_channels = 0;
  int out_channels = 0;
  std::size_t weight_offset = 0;
  std::size_t weight_count = 0;
  std::size_t bias_offset = 0;
  int fan_in = 0;
  bool followed_by_relu = true;
};

struct NodeInfo {
  int level = 0;
  int column = 0;
  int in_channels = 0;
  int out_channels = 0;
  int residual_blocks = 2;
  std::size_t up_offset = 0;  // transposed conv params, column > 0 only
  std::size_t block_offset[2]{};
  ResidualBlockSpec blocks[2];
};

/// Nested UNet with residual nodes, pooled cross-scale skips and four averaged heads.
template <class T>
class DuneNet {
 public:
  struct Activations {
    std::vector<Tensor<T>> node_input;
    std::vector<Tensor<T>> up;
    std::vector<ResidualBlockCache<T>> block0;
    std::vector<ResidualBlockCache<T>> block1;
  };

  struct Output {
    Tensor<T> heads[kHeadCount];
    Tensor<T> mean;
  };

  explicit DuneNet(ModelConfig config);

  const ModelConfig& config() const { return config_; }
  std::size_t parameter_count() const { return params_.size(); }
  std::span<T> params() { return params_; }
  std::span<const T> params() const { return params_; }
  const std::vector<LayerInfo>& layers() const { return layers_; }
  const std::vector<NodeInfo>& nodes() const { return nodes_; }
  const NodeInfo& node(int level, int column) const;
  std::size_t head_offset(int h) const { return head_offset_[h]; }

  /// Kaiming-normal weights (std sqrt(2 / fan_in)), zero biases.
  void init_kaiming(std::uint64_t seed);

  /// Pass `keep` to retain what backward() needs. Const, so concurrent inference is safe.
  Output forward(const Tensor<T>& input, Activations* keep = nullptr) const;

  /// Gradient of a loss whose derivative w.r.t. the averaged output is grad_mean.
  void backward(const Activations& acts, const Tensor<T>& grad_mean, std::span<T> grads) const;

 private:
  int index(int level, int column) const { return level * (config_.depth + 1) + column; }

  ModelConfig config_;
  AlignedVector<T> params_;
  std::vector<LayerInfo> layers_;
  std::vector<NodeInfo> nodes_;  // forward order
  std::vector<int> slot_;        // (level, column) -> position in nodes_, -1 if absent
  std::size_t head_offset_[kHeadCount]{};
};

extern template class DuneNet<float>;
extern template class DuneNet<double>;

}  // namespace dune::nn
