// SPDX-License-Identifier: Apache-2.0
#include "dune/nn/dune_net.hpp"

#include <cmath>
#include <random>
#include <type_traits>

#include "dune/common/error.hpp"
#include "dune/nn/ops.hpp"

namespace dune::nn {

ModelConfig ModelConfig::for_window(int window, int n_lat, int n_lon) {
  ModelConfig c;
  c.in_channels = 2 * window + 5;
  c.out_channels = window;
  c.n_lat = n_lat;
  c.n_lon = n_lon;
  return c;
}

ModelConfig ModelConfig::full_scale(int window) {
  ModelConfig c = for_window(window, 0, 0);
  c.channels = {64, 128, 256, 512, 1024};
  return c;
}

void ModelConfig::validate() const {
  if (depth < 1 || depth > 8) throw UsageError("model depth must be in 1..8, got " + std::to_string(depth));
  if (static_cast<int>(channels.size()) != depth + 1)
    throw UsageError("model.channels needs depth+1 = " + std::to_string(depth + 1) + " entries, got " +
                     std::to_string(channels.size()));
  for (std::size_t i = 0; i < channels.size(); ++i) {
    if (channels[i] < 1) throw UsageError("model.channels entries must be positive");
    if (i > 0 && channels[i] <= channels[i - 1]) throw UsageError("model.channels must increase strictly with depth");
  }
  if (in_channels < 1 || out_channels < 1) throw UsageError("model in/out channel counts must be positive");
  if ((n_lat || n_lon) && !grid_ok(n_lat, n_lon))
    throw UsageError("grid " + std::to_string(n_lat) + "x" + std::to_string(n_lon) + " is not divisible by 2^" +
                     std::to_string(depth));
}

bool ModelConfig::grid_ok(int h, int w) const {
  const int f = 1 << depth;
  return h > 0 && w > 0 && h % f == 0 && w % f == 0;
}

int ModelConfig::head_column(int h) const { return 1 + (h * depth) / kHeadCount; }

// ---- residual block ----

template <class T>
void residual_block_forward(const ResidualBlockSpec& spec, const T* p, const Tensor<T>& x,
                            ResidualBlockCache<T>& cache) {
  if (x.c != spec.in_channels)
    throw DataError("residual block expects " + std::to_string(spec.in_channels) + " channels, got " +
                    std::to_string(x.c));
  const int co = spec.out_channels;
  conv2d_forward(x, p + spec.conv1_weight(), p + spec.conv1_bias(), co, 3, cache.hidden);
  relu_inplace(cache.hidden);
  conv2d_forward(cache.hidden, p + spec.conv2_weight(), p + spec.conv2_bias(), co, 3, cache.out);
  if (spec.has_shortcut()) {
    Tensor<T> s;
    conv2d_forward(x, p + spec.shortcut_weight(), p + spec.shortcut_bias(), co, 1, s);
    for (std::size_t i = 0; i < s.data.size(); ++i) cache.out.data[i] += s.data[i];
  } else {
    for (std::size_t i = 0; i < x.data.size(); ++i) cache.out.data[i] += x.data[i];
  }
  relu_inplace(cache.out);
}

template <class T>
void residual_block_backward(const ResidualBlockSpec& spec, const T* p, const Tensor<T>& x,
                             const ResidualBlockCache<T>& cache, Tensor<T> g, T* gp, Tensor<T>& gx) {
  relu_backward(cache.out, g);
  Tensor<T> gh(cache.hidden.c, cache.hidden.h, cache.hidden.w);
  conv2d_backward(cache.hidden, g, p + spec.conv2_weight(), 3, gp + spec.conv2_weight(), gp + spec.conv2_bias(), &gh);
  relu_backward(cache.hidden, gh);
  conv2d_backward(x, gh, p + spec.conv1_weight(), 3, gp + spec.conv1_weight(), gp + spec.conv1_bias(), &gx);
  if (spec.has_shortcut()) {
    conv2d_backward(x, g, p + spec.shortcut_weight(), 1, gp + spec.shortcut_weight(), gp + spec.shortcut_bias(),
                    &gx);
  } else {
    for (std::size_t i = 0; i < g.data.size(); ++i) gx.data[i] += g.data[i];
  }
}

// ---- network ----

template <class T>
DuneNet<T>::DuneNet(ModelConfig config) : config_(std::move(config)) {
  config_.validate();
  const int d = config_.depth;
  const auto& ch = config_.channels;
  slot_.assign(static_cast<std::size_t>((d + 1) * (d + 1)), -1);
  std::size_t offset = 0;

  auto add_layer = [&](std::string name, std::string kind, int cin, int cout, int taps, int fan_in, bool relu) {
    LayerInfo l;
    l.name = std::move(name);
    l.kind = std::move(kind);
    l.in_channels = cin;
    l.out_channels = cout;
    l.weight_offset = offset;
    l.weight_count = std::size_t(cin) * cout * taps;
    l.bias_offset = offset + l.weight_count;
    l.fan_in = fan_in;
    l.followed_by_relu = relu;
    offset = l.bias_offset + cout;
    layers_.push_back(l);
    return l.weight_offset;
  };

  for (int j = 0; j <= d; ++j)
    for (int i = 0; i + j <= d; ++i) {
      NodeInfo n;
      n.level = i;
      n.column = j;
      n.out_channels = ch[i];
      const std::string tag = "X" + std::to_string(i) + "," + std::to_string(j);
      if (j == 0) {
        n.in_channels = config_.in_channels;
        if (i > 0) {
          n.in_channels = 0;
          for (int s = 0; s < i; ++s) n.in_channels += ch[s];
        }
      } else {
        n.in_channels = (j + 1) * ch[i];
        n.up_offset = add_layer(tag + ".up", "convT2x2", ch[i + 1], ch[i], 4, ch[i + 1], true);
      }
      n.blocks[0] = {n.in_channels, ch[i]};
      n.blocks[1] = {ch[i], ch[i]};
      for (int b = 0; b < 2; ++b) {
        const auto& s = n.blocks[b];
        const std::string bt = tag + ".block" + std::to_string(b);
        n.block_offset[b] = add_layer(bt + ".conv1", "conv3x3", s.in_channels, s.out_channels, 9,
                                      s.in_channels * 9, true);
        add_layer(bt + ".conv2", "conv3x3", s.out_channels, s.out_channels, 9, s.out_channels * 9, true);
        if (s.has_shortcut())
          add_layer(bt + ".shortcut", "conv1x1", s.in_channels, s.out_channels, 1, s.in_channels, true);
      }
      slot_[index(i, j)] = static_cast<int>(nodes_.size());
      nodes_.push_back(n);
    }
  for (int h = 0; h < kHeadCount; ++h)
    head_offset_[h] = add_layer("head" + std::to_string(h), "conv1x1", ch[0], config_.out_channels, 1, ch[0], false);
  params_.assign(offset, T(0));
}

template <class T>
const NodeInfo& DuneNet<T>::node(int level, int column) const {
  if (level < 0 || column < 0 || level + column > config_.depth) throw UsageError("no such node");
  return nodes_[slot_[index(level, column)]];
}

template <class T>
void DuneNet<T>::init_kaiming(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::fill(params_.begin(), params_.end(), T(0));
  for (const auto& l : layers_) {
    const double sd = std::sqrt(2.0 / l.fan_in);
    for (std::size_t k = 0; k < l.weight_count; ++k) params_[l.weight_offset + k] = static_cast<T>(sd * normal(rng));
  }
}

template <class T>
typename DuneNet<T>::Output DuneNet<T>::forward(const Tensor<T>& input, Activations* keep) const {
  if (input.c != config_.in_channels)
    throw DataError("network expects " + std::to_string(config_.in_channels) + " input channels, got " +
                    std::to_string(input.c));
  if (!config_.grid_ok(input.h, input.w))
    throw DataError("input grid " + std::to_string(input.h) + "x" + std::to_string(input.w) +
                    " is not divisible by 2^" + std::to_string(config_.depth));
  if (config_.n_lat && (input.h != config_.n_lat || input.w != config_.n_lon))
    throw DataError("input grid " + std::to_string(input.h) + "x" + std::to_string(input.w) +
                    " does not match the model grid " + std::to_string(config_.n_lat) + "x" +
                    std::to_string(config_.n_lon));
  Activations local;
  Activations& a = keep ? *keep : local;
  const std::size_t n = nodes_.size();
  a.node_input.assign(n, {});
  a.up.assign(n, {});
  a.block0.assign(n, {});
  a.block1.assign(n, {});
  const T* p = params_.data();

  for (std::size_t k = 0; k < n; ++k) {
    const auto& nd = nodes_[k];
    const int i = nd.level, j = nd.column;
    if (j == 0) {
      if (i == 0) {
        a.node_input[k] = input;
      } else {
        std::vector<Tensor<T>> pooled;
        pooled.reserve(i);
        for (int s = 0; s < i; ++s) pooled.push_back(avg_pool(a.block1[slot_[index(s, 0)]].out, 1 << (i - s)));
        std::vector<const Tensor<T>*> parts;
        for (const auto& t : pooled) parts.push_back(&t);
        a.node_input[k] = concat(parts);
      }
    } else {
      const auto& below = a.block1[slot_[index(i + 1, j - 1)]].out;
      conv_transpose2x2_forward(below, p + nd.up_offset, p + nd.up_offset + std::size_t(below.c) * nd.out_channels * 4,
                                nd.out_channels, a.up[k]);
      relu_inplace(a.up[k]);
      std::vector<const Tensor<T>*> parts;
      for (int jj = 0; jj < j; ++jj) parts.push_back(&a.block1[slot_[index(i, jj)]].out);
      parts.push_back(&a.up[k]);
      a.node_input[k] = concat(parts);
    }
    residual_block_forward(nd.blocks[0], p + nd.block_offset[0], a.node_input[k], a.block0[k]);
    residual_block_forward(nd.blocks[1], p + nd.block_offset[1], a.block0[k].out, a.block1[k]);
  }

  Output out;
  const int c0 = config_.channels[0];
  for (int h = 0; h < kHeadCount; ++h) {
    const auto& src = a.block1[slot_[index(0, config_.head_column(h))]].out;
    conv2d_forward(src, p + head_offset_[h], p + head_offset_[h] + std::size_t(c0) * config_.out_channels,
                   config_.out_channels, 1, out.heads[h]);
  }
  // Summed in a wider type and rounded once, so the mean is the correctly
  // rounded average of the four heads.
  using Wide = std::conditional_t<std::is_same_v<T, float>, double, long double>;
  out.mean = out.heads[0];
  for (std::size_t q = 0; q < out.mean.data.size(); ++q)
    out.mean.data[q] = static_cast<T>((Wide(out.heads[0].data[q]) + Wide(out.heads[1].data[q]) +
                                       Wide(out.heads[2].data[q]) + Wide(out.heads[3].data[q])) /
                                      Wide(kHeadCount));
  return out;
}

template <class T>
void DuneNet<T>::backward(const Activations& a, const Tensor<T>& grad_mean, std::span<T> grads) const {
  if (grads.size() != params_.size()) throw UsageError("gradient buffer size does not match parameter count");
  if (a.block1.size() != nodes_.size()) throw UsageError("backward() needs activations kept by forward()");
  const T* p = params_.data();
  T* gp = grads.data();
  const std::size_t n = nodes_.size();
  std::vector<Tensor<T>> g_out(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& o = a.block1[k].out;
    g_out[k] = Tensor<T>(o.c, o.h, o.w);
  }

  Tensor<T> g_head = grad_mean;
  for (auto& v : g_head.data) v /= T(kHeadCount);
  const int c0 = config_.channels[0];
  for (int h = 0; h < kHeadCount; ++h) {
    const int k = slot_[index(0, config_.head_column(h))];
    conv2d_backward(a.block1[k].out, g_head, p + head_offset_[h], 1, gp + head_offset_[h],
                    gp + head_offset_[h] + std::size_t(c0) * config_.out_channels, &g_out[k]);
  }

  for (std::size_t r = n; r-- > 0;) {
    const auto& nd = nodes_[r];
    const int i = nd.level, j = nd.column;
    const auto& b0 = a.block0[r].out;
    Tensor<T> g_b0(b0.c, b0.h, b0.w);
    residual_block_backward(nd.blocks[1], p + nd.block_offset[1], b0, a.block1[r], std::move(g_out[r]),
                            gp + nd.block_offset[1], g_b0);
    const auto& x = a.node_input[r];
    if (i == 0 && j == 0) {
      Tensor<T> sink(x.c, x.h, x.w);
      residual_block_backward(nd.blocks[0], p + nd.block_offset[0], x, a.block0[r], std::move(g_b0),
                              gp + nd.block_offset[0], sink);
      continue;
    }
    Tensor<T> g_x(x.c, x.h, x.w);
    residual_block_backward(nd.blocks[0], p + nd.block_offset[0], x, a.block0[r], std::move(g_b0),
                            gp + nd.block_offset[0], g_x);
    if (j == 0) {
      int offset = 0;
      for (int s = 0; s < i; ++s) {
        auto& target = g_out[slot_[index(s, 0)]];
        avg_pool_backward(g_x, 1 << (i - s), target, offset);
        offset += target.c;
      }
      continue;
    }
    const std::size_t plane = g_x.plane();
    for (int jj = 0; jj < j; ++jj) {
      auto& target = g_out[slot_[index(i, jj)]];
      const T* src = g_x.data.data() + std::size_t(jj) * nd.out_channels * plane;
      for (std::size_t q = 0; q < target.data.size(); ++q) target.data[q] += src[q];
    }
    Tensor<T> g_up(nd.out_channels, g_x.h, g_x.w);
    std::copy_n(g_x.data.data() + std::size_t(j) * nd.out_channels * plane, g_up.data.size(), g_up.data.begin());
    relu_backward(a.up[r], g_up);
    const int below = slot_[index(i + 1, j - 1)];
    const auto& bx = a.block1[below].out;
    conv_transpose2x2_backward(bx, g_up, p + nd.up_offset, gp + nd.up_offset,
                               gp + nd.up_offset + std::size_t(bx.c) * nd.out_channels * 4, &g_out[below]);
  }
}

template void residual_block_forward<float>(const ResidualBlockSpec&, const float*, const Tensor<float>&,
                                            ResidualBlockCache<float>&);
template void residual_block_forward<double>(const ResidualBlockSpec&, const double*, const Tensor<double>&,
                                             ResidualBlockCache<double>&);
template void residual_block_backward<float>(const ResidualBlockSpec&, const float*, const Tensor<float>&,
                                             const ResidualBlockCache<float>&, Tensor<float>, float*,
                                             Tensor<float>&);
template void residual_block_backward<double>(const ResidualBlockSpec&, const double*, const Tensor<double>&,
                                              const ResidualBlockCache<double>&, Tensor<double>, double*,
                                              Tensor<double>&);

template class DuneNet<float>;
template class DuneNet<double>;

}  // namespace dune::nn
