// SPDX-License-Identifier: Apache-2.0
#include "dune/nn/ops.hpp"

#include <Eigen/Core>
#include <algorithm>

#include "dune/common/error.hpp"

namespace dune::nn {

namespace {

template <class T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class T>
using MapMat = Eigen::Map<RowMat<T>>;
template <class T>
using CMapMat = Eigen::Map<const RowMat<T>>;

template <class T>
AlignedVector<T>& scratch(int slot) {
  thread_local AlignedVector<T> buffers[2];
  return buffers[slot];
}

// Rows of the im2col matrix are (ci, ky, kx); columns are output pixels.
template <class T>
void im2col(const Tensor<T>& in, int k, T* col) {
  const int r = k / 2;
  const int H = in.h, W = in.w;
  std::size_t row = 0;
  for (int ci = 0; ci < in.c; ++ci) {
    const T* src = in.channel(ci);
    for (int ky = 0; ky < k; ++ky)
      for (int kx = 0; kx < k; ++kx, ++row) {
        T* dst = col + row * in.plane();
        const int dx = kx - r;
        for (int y = 0; y < H; ++y) {
          const int sy = std::clamp(y + ky - r, 0, H - 1);
          const T* srow = src + static_cast<std::size_t>(sy) * W;
          T* drow = dst + static_cast<std::size_t>(y) * W;
          for (int x = 0; x < W; ++x) {
            int sx = x + dx;
            sx += sx < 0 ? W : 0;
            sx -= sx >= W ? W : 0;
            drow[x] = srow[sx];
          }
        }
      }
  }
}

template <class T>
void col2im_add(const T* col, int k, Tensor<T>& out) {
  const int r = k / 2;
  const int H = out.h, W = out.w;
  std::size_t row = 0;
  for (int ci = 0; ci < out.c; ++ci) {
    T* dst = out.channel(ci);
    for (int ky = 0; ky < k; ++ky)
      for (int kx = 0; kx < k; ++kx, ++row) {
        const T* src = col + row * out.plane();
        const int dx = kx - r;
        for (int y = 0; y < H; ++y) {
          const int sy = std::clamp(y + ky - r, 0, H - 1);
          T* drow = dst + static_cast<std::size_t>(sy) * W;
          const T* srow = src + static_cast<std::size_t>(y) * W;
          for (int x = 0; x < W; ++x) {
            int sx = x + dx;
            sx += sx < 0 ? W : 0;
            sx -= sx >= W ? W : 0;
            drow[sx] += srow[x];
          }
        }
      }
  }
}

}  // namespace

template <class T>
void conv2d_forward(const Tensor<T>& in, const T* weight, const T* bias, int cout, int k, Tensor<T>& out) {
  if (k % 2 != 1) throw UsageError("conv2d kernel size must be odd");
  const auto hw = static_cast<Eigen::Index>(in.plane());
  const auto kk = static_cast<Eigen::Index>(in.c) * k * k;
  if (!(out.c == cout && out.h == in.h && out.w == in.w)) out = Tensor<T>(cout, in.h, in.w);
  MapMat<T> o(out.data.data(), cout, hw);
  CMapMat<T> wm(weight, cout, kk);
  if (k == 1) {
    o.noalias() = wm * CMapMat<T>(in.data.data(), in.c, hw);
  } else {
    auto& buf = scratch<T>(0);
    buf.resize(static_cast<std::size_t>(kk * hw));
    im2col(in, k, buf.data());
    o.noalias() = wm * CMapMat<T>(buf.data(), kk, hw);
  }
  for (int co = 0; co < cout; ++co) o.row(co).array() += bias[co];
}

template <class T>
void conv2d_backward(const Tensor<T>& in, const Tensor<T>& grad_out, const T* weight, int k, T* grad_weight,
                     T* grad_bias, Tensor<T>* grad_in) {
  const int cout = grad_out.c;
  const auto hw = static_cast<Eigen::Index>(in.plane());
  const auto kk = static_cast<Eigen::Index>(in.c) * k * k;
  CMapMat<T> go(grad_out.data.data(), cout, hw);
  CMapMat<T> wm(weight, cout, kk);
  MapMat<T> gw(grad_weight, cout, kk);
  for (int co = 0; co < cout; ++co) grad_bias[co] += go.row(co).sum();
  if (k == 1) {
    CMapMat<T> x(in.data.data(), in.c, hw);
    gw.noalias() += go * x.transpose();
    if (grad_in) {
      MapMat<T> gi(grad_in->data.data(), in.c, hw);
      gi.noalias() += wm.transpose() * go;
    }
    return;
  }
  auto& buf = scratch<T>(0);
  buf.resize(static_cast<std::size_t>(kk * hw));
  im2col(in, k, buf.data());
  gw.noalias() += go * CMapMat<T>(buf.data(), kk, hw).transpose();
  if (grad_in) {
    auto& gcol = scratch<T>(1);
    gcol.resize(static_cast<std::size_t>(kk * hw));
    MapMat<T>(gcol.data(), kk, hw).noalias() = wm.transpose() * go;
    col2im_add(gcol.data(), k, *grad_in);
  }
}

template <class T>
void conv_transpose2x2_forward(const Tensor<T>& in, const T* weight, const T* bias, int cout, Tensor<T>& out) {
  const int H = in.h, W = in.w;
  const auto hw = static_cast<Eigen::Index>(in.plane());
  if (!(out.c == cout && out.h == 2 * H && out.w == 2 * W)) out = Tensor<T>(cout, 2 * H, 2 * W);
  auto& buf = scratch<T>(0);
  buf.resize(static_cast<std::size_t>(cout) * 4 * hw);
  MapMat<T> cols(buf.data(), cout * 4, hw);
  cols.noalias() = CMapMat<T>(weight, in.c, cout * 4).transpose() * CMapMat<T>(in.data.data(), in.c, hw);
  for (int co = 0; co < cout; ++co) {
    T* dst = out.channel(co);
    for (int tap = 0; tap < 4; ++tap) {
      const int ky = tap / 2, kx = tap % 2;
      const T* src = buf.data() + static_cast<std::size_t>(co * 4 + tap) * hw;
      for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x)
          dst[static_cast<std::size_t>(2 * y + ky) * (2 * W) + 2 * x + kx] = src[y * W + x] + bias[co];
    }
  }
}

template <class T>
void conv_transpose2x2_backward(const Tensor<T>& in, const Tensor<T>& grad_out, const T* weight, T* grad_weight,
                                T* grad_bias, Tensor<T>* grad_in) {
  const int H = in.h, W = in.w, cout = grad_out.c;
  const auto hw = static_cast<Eigen::Index>(in.plane());
  auto& buf = scratch<T>(0);
  buf.resize(static_cast<std::size_t>(cout) * 4 * hw);
  for (int co = 0; co < cout; ++co) {
    const T* src = grad_out.channel(co);
    T sum = 0;
    for (std::size_t i = 0; i < grad_out.plane(); ++i) sum += src[i];
    grad_bias[co] += sum;
    for (int tap = 0; tap < 4; ++tap) {
      const int ky = tap / 2, kx = tap % 2;
      T* dst = buf.data() + static_cast<std::size_t>(co * 4 + tap) * hw;
      for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) dst[y * W + x] = src[static_cast<std::size_t>(2 * y + ky) * (2 * W) + 2 * x + kx];
    }
  }
  CMapMat<T> gcols(buf.data(), cout * 4, hw);
  CMapMat<T> x(in.data.data(), in.c, hw);
  MapMat<T>(grad_weight, in.c, cout * 4).noalias() += x * gcols.transpose();
  if (grad_in) MapMat<T>(grad_in->data.data(), in.c, hw).noalias() += CMapMat<T>(weight, in.c, cout * 4) * gcols;
}

template <class T>
Tensor<T> avg_pool(const Tensor<T>& in, int factor) {
  if (factor < 1 || in.h % factor != 0 || in.w % factor != 0)
    throw DataError("avg_pool: " + std::to_string(in.h) + "x" + std::to_string(in.w) + " is not divisible by " +
                    std::to_string(factor));
  if (factor == 1) return in;
  Tensor<T> out(in.c, in.h / factor, in.w / factor);
  const T scale = T(1) / static_cast<T>(factor * factor);
  for (int c = 0; c < in.c; ++c)
    for (int y = 0; y < out.h; ++y)
      for (int x = 0; x < out.w; ++x) {
        T s = 0;
        for (int dy = 0; dy < factor; ++dy)
          for (int dx = 0; dx < factor; ++dx) s += in.at(c, y * factor + dy, x * factor + dx);
        out.at(c, y, x) = s * scale;
      }
  return out;
}

template <class T>
void avg_pool_backward(const Tensor<T>& grad_out, int factor, Tensor<T>& grad_in, int channel_offset) {
  const T scale = T(1) / static_cast<T>(factor * factor);
  for (int c = 0; c < grad_in.c; ++c)
    for (int y = 0; y < grad_out.h; ++y)
      for (int x = 0; x < grad_out.w; ++x) {
        const T g = grad_out.at(c + channel_offset, y, x) * scale;
        for (int dy = 0; dy < factor; ++dy)
          for (int dx = 0; dx < factor; ++dx) grad_in.at(c, y * factor + dy, x * factor + dx) += g;
      }
}

template <class T>
void relu_inplace(Tensor<T>& t) {
  for (auto& v : t.data) v = v > T(0) ? v : T(0);
}

template <class T>
void relu_backward(const Tensor<T>& activated, Tensor<T>& grad) {
  for (std::size_t i = 0; i < grad.data.size(); ++i)
    if (!(activated.data[i] > T(0))) grad.data[i] = T(0);
}

template <class T>
Tensor<T> concat(const std::vector<const Tensor<T>*>& parts) {
  int channels = 0;
  for (const auto* p : parts) {
    if (p->h != parts.front()->h || p->w != parts.front()->w) throw DataError("concat: spatial size mismatch");
    channels += p->c;
  }
  Tensor<T> out(channels, parts.front()->h, parts.front()->w);
  auto it = out.data.begin();
  for (const auto* p : parts) it = std::copy(p->data.begin(), p->data.end(), it);
  return out;
}

#define DUNE_INSTANTIATE(T)                                                                                    \
  template void conv2d_forward<T>(const Tensor<T>&, const T*, const T*, int, int, Tensor<T>&);                \
  template void conv2d_backward<T>(const Tensor<T>&, const Tensor<T>&, const T*, int, T*, T*, Tensor<T>*);    \
  template void conv_transpose2x2_forward<T>(const Tensor<T>&, const T*, const T*, int, Tensor<T>&);          \
  template void conv_transpose2x2_backward<T>(const Tensor<T>&, const Tensor<T>&, const T*, T*, T*, Tensor<T>*); \
  template Tensor<T> avg_pool<T>(const Tensor<T>&, int);                                                      \
  template void avg_pool_backward<T>(const Tensor<T>&, int, Tensor<T>&, int);                                 \
  template void relu_inplace<T>(Tensor<T>&);                                                                  \
  template void relu_backward<T>(const Tensor<T>&, Tensor<T>&);                                               \
  template Tensor<T> concat<T>(const std::vector<const Tensor<T>*>&);

DUNE_INSTANTIATE(float)
DUNE_INSTANTIATE(double)

#undef DUNE_INSTANTIATE

}  // namespace dune::nn
