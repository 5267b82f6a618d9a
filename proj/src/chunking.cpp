// Copyright 2026 The tsep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "tsep/chunking.hpp"

#include <algorithm>
#include <string>
#include <vector>

namespace tsep {

ChunkLayout ChunkLayout::plan(std::size_t length, std::size_t chunk) {
  if (chunk < 2 || chunk % 2 != 0) {
    throw ConfigError("segment: chunk size " + std::to_string(chunk) + " must be even and >= 2");
  }
  if (length == 0) throw DimensionError("segment: empty sequence");
  ChunkLayout l;
  l.chunk = chunk;
  l.hop = chunk / 2;
  l.original_length = length;
  std::size_t padded = std::max(length, chunk);
  const std::size_t rem = (padded - chunk) % l.hop;
  if (rem) padded += l.hop - rem;
  l.padded_length = padded;
  l.num_chunks = (padded - chunk) / l.hop + 1;
  return l;
}

std::size_t ChunkLayout::coverage(std::size_t frame) const {
  std::size_t n = 0;
  // Only chunks floor(frame / hop) and the one before it can contain frame.
  const std::size_t last = frame / hop;
  for (std::size_t c = last > 0 ? last - 1 : 0; c <= last && c < num_chunks; ++c) {
    if (c * hop <= frame && frame < c * hop + chunk) ++n;
  }
  return n;
}

template <typename T>
ChunkTensor<T> segment(const Tensor<T>& frames, std::size_t chunk) {
  if (frames.rank() != 2) throw DimensionError("segment: expects [T, D], got " + shape_str(frames.shape()));
  const ChunkLayout layout = ChunkLayout::plan(frames.extent(0), chunk);
  const std::size_t len = frames.extent(0), width = frames.extent(1);
  const std::size_t hop = layout.hop, nc = layout.num_chunks;
  std::vector<T> y(nc * chunk * width, T{0});
  for (std::size_t c = 0; c < nc; ++c) {
    for (std::size_t s = 0; s < chunk; ++s) {
      const std::size_t f = c * hop + s;
      if (f >= len) break;
      std::copy_n(frames.data().data() + f * width, width, y.data() + (c * chunk + s) * width);
    }
  }
  ChunkTensor<T> out;
  out.layout = layout;
  out.data = Tensor<T>::make_result(
      "segment", Shape{nc, chunk, width}, std::move(y), {frames},
      [len, width, hop, nc, chunk](TensorNode<T>& self) {
        auto& p = self.parents[0];
        if (!p->requires_grad) return;
        T* dx = p->grad_buffer().data();
        for (std::size_t c = 0; c < nc; ++c) {
          for (std::size_t s = 0; s < chunk; ++s) {
            const std::size_t f = c * hop + s;
            if (f >= len) break;
            const T* src = self.grad.data() + (c * chunk + s) * width;
            for (std::size_t d = 0; d < width; ++d) dx[f * width + d] += src[d];
          }
        }
      });
  return out;
}

template <typename T>
Tensor<T> overlap_add(const ChunkTensor<T>& chunks) {
  const ChunkLayout& l = chunks.layout;
  if (!l.original_length) throw ContractError("overlap_add: chunk layout lacks the original length");
  const Tensor<T>& x = chunks.data;
  if (x.rank() != 3 || x.extent(0) != l.num_chunks || x.extent(1) != l.chunk) {
    throw DimensionError("overlap_add: data " + shape_str(x.shape()) + " inconsistent with layout (" +
                         std::to_string(l.num_chunks) + " chunks of " + std::to_string(l.chunk) + ")");
  }
  const std::size_t len = *l.original_length, width = x.extent(2);
  const std::size_t hop = l.hop, nc = l.num_chunks, chunk = l.chunk;
  std::vector<T> inv_count(len);
  for (std::size_t f = 0; f < len; ++f) inv_count[f] = T{1} / static_cast<T>(l.coverage(f));
  std::vector<T> acc(len * width, T{0});
  for (std::size_t c = 0; c < nc; ++c) {
    for (std::size_t s = 0; s < chunk; ++s) {
      const std::size_t f = c * hop + s;
      if (f >= len) break;
      const T* src = x.data().data() + (c * chunk + s) * width;
      for (std::size_t d = 0; d < width; ++d) acc[f * width + d] += src[d];
    }
  }
  for (std::size_t f = 0; f < len; ++f) {
    for (std::size_t d = 0; d < width; ++d) acc[f * width + d] *= inv_count[f];
  }
  return Tensor<T>::make_result(
      "overlap_add", Shape{len, width}, std::move(acc), {x},
      [len, width, hop, nc, chunk, inv_count = std::move(inv_count)](TensorNode<T>& self) {
        auto& p = self.parents[0];
        if (!p->requires_grad) return;
        T* dx = p->grad_buffer().data();
        for (std::size_t c = 0; c < nc; ++c) {
          for (std::size_t s = 0; s < chunk; ++s) {
            const std::size_t f = c * hop + s;
            if (f >= len) break;
            T* dst = dx + (c * chunk + s) * width;
            for (std::size_t d = 0; d < width; ++d) dst[d] += self.grad[f * width + d] * inv_count[f];
          }
        }
      });
}

template ChunkTensor<float> segment(const Tensor<float>&, std::size_t);
template ChunkTensor<double> segment(const Tensor<double>&, std::size_t);
template Tensor<float> overlap_add(const ChunkTensor<float>&);
template Tensor<double> overlap_add(const ChunkTensor<double>&);

}  // namespace tsep
