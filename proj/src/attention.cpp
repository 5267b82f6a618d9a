// Copyright 2026 The tsep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "tsep/attention.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace tsep::ops {

namespace {

// c[n, m] += a[n, k] * b[k, m]
template <typename T>
void gemm_nn(const T* a, const T* b, T* c, std::size_t n, std::size_t k, std::size_t m) {
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t i = 0; i < k; ++i) {
      const T av = a[r * k + i];
      const T* br = b + i * m;
      T* cr = c + r * m;
      for (std::size_t j = 0; j < m; ++j) cr[j] += av * br[j];
    }
  }
}

// c[n, k] += a[n, m] * b[k, m]^T
template <typename T>
void gemm_nt(const T* a, const T* b, T* c, std::size_t n, std::size_t m, std::size_t k) {
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t i = 0; i < k; ++i) {
      T acc = 0;
      for (std::size_t j = 0; j < m; ++j) acc += a[r * m + j] * b[i * m + j];
      c[r * k + i] += acc;
    }
  }
}

// c[k, m] += a[n, k]^T * b[n, m]
template <typename T>
void gemm_tn(const T* a, const T* b, T* c, std::size_t n, std::size_t k, std::size_t m) {
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t i = 0; i < k; ++i) {
      const T av = a[r * k + i];
      T* cr = c + i * m;
      const T* br = b + r * m;
      for (std::size_t j = 0; j < m; ++j) cr[j] += av * br[j];
    }
  }
}

}  // namespace

template <typename T>
AttentionOutput<T> multi_head_attention(const Tensor<T>& x, const AttentionWeights<T>& w, std::size_t heads) {
  if (x.rank() != 3) throw DimensionError("multi_head_attention: input must be [B, T, D_a]");
  const std::size_t batch = x.extent(0), len = x.extent(1), width = x.extent(2);
  if (heads == 0 || width % heads != 0) {
    throw ConfigError("multi_head_attention: " + std::to_string(heads) + " heads do not divide width " +
                      std::to_string(width));
  }
  for (const Tensor<T>* m : {&w.wq, &w.wk, &w.wv, &w.wo}) {
    if (m->rank() != 2 || m->extent(0) != width || m->extent(1) != width) {
      throw DimensionError("multi_head_attention: projection " + shape_str(m->shape()) + " vs width " +
                           std::to_string(width));
    }
  }
  const std::size_t dh = width / heads;
  const T scale = static_cast<T>(1.0 / std::sqrt(static_cast<double>(dh)));
  const std::size_t rows = batch * len;

  std::vector<T> q(rows * width, T{0}), k(rows * width, T{0}), v(rows * width, T{0});
  gemm_nn(x.data().data(), w.wq.data().data(), q.data(), rows, width, width);
  gemm_nn(x.data().data(), w.wk.data().data(), k.data(), rows, width, width);
  gemm_nn(x.data().data(), w.wv.data().data(), v.data(), rows, width, width);

  std::vector<T> attn(batch * heads * len * len);
  std::vector<T> ctx(rows * width, T{0});
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t h = 0; h < heads; ++h) {
      T* a = attn.data() + (b * heads + h) * len * len;
      for (std::size_t i = 0; i < len; ++i) {
        const T* qi = q.data() + (b * len + i) * width + h * dh;
        T* ar = a + i * len;
        T mx = -std::numeric_limits<T>::infinity();
        for (std::size_t j = 0; j < len; ++j) {
          const T* kj = k.data() + (b * len + j) * width + h * dh;
          T s = 0;
          for (std::size_t c = 0; c < dh; ++c) s += qi[c] * kj[c];
          ar[j] = s * scale;
          mx = std::max(mx, ar[j]);
        }
        T total = 0;
        for (std::size_t j = 0; j < len; ++j) {
          ar[j] = std::exp(ar[j] - mx);
          total += ar[j];
        }
        for (std::size_t j = 0; j < len; ++j) ar[j] /= total;
        T* ci = ctx.data() + (b * len + i) * width + h * dh;
        for (std::size_t j = 0; j < len; ++j) {
          const T* vj = v.data() + (b * len + j) * width + h * dh;
          for (std::size_t c = 0; c < dh; ++c) ci[c] += ar[j] * vj[c];
        }
      }
    }
  }
  std::vector<T> out(rows * width, T{0});
  gemm_nn(ctx.data(), w.wo.data().data(), out.data(), rows, width, width);

  AttentionOutput<T> result;
  result.attn = Tensor<T>(Shape{batch, heads, len, len}, attn);
  result.out = Tensor<T>::make_result(
      "multi_head_attention", x.shape(), std::move(out), {x, w.wq, w.wk, w.wv, w.wo},
      [=, q = std::move(q), k = std::move(k), v = std::move(v), attn = std::move(attn),
       ctx = std::move(ctx)](TensorNode<T>& self) {
        auto grad = [&self](std::size_t i) -> T* {
          auto& p = self.parents[i];
          return p && p->requires_grad ? p->grad_buffer().data() : nullptr;
        };
        const T* dout = self.grad.data();
        const T* xv = self.parents[0]->value.data();
        const T* wo = self.parents[4]->value.data();
        if (T* dwo = grad(4)) gemm_tn(ctx.data(), dout, dwo, rows, width, width);
        std::vector<T> dctx(rows * width, T{0});
        gemm_nt(dout, wo, dctx.data(), rows, width, width);

        std::vector<T> dq(rows * width, T{0}), dk(rows * width, T{0}), dv(rows * width, T{0});
        std::vector<T> ds(len);
        for (std::size_t b = 0; b < batch; ++b) {
          for (std::size_t h = 0; h < heads; ++h) {
            const T* a = attn.data() + (b * heads + h) * len * len;
            for (std::size_t i = 0; i < len; ++i) {
              const T* ar = a + i * len;
              const T* dci = dctx.data() + (b * len + i) * width + h * dh;
              T dot = 0;
              for (std::size_t j = 0; j < len; ++j) {
                const T* vj = v.data() + (b * len + j) * width + h * dh;
                T* dvj = dv.data() + (b * len + j) * width + h * dh;
                T da = 0;
                for (std::size_t c = 0; c < dh; ++c) {
                  da += dci[c] * vj[c];
                  dvj[c] += ar[j] * dci[c];
                }
                ds[j] = da;
                dot += da * ar[j];
              }
              const T* qi = q.data() + (b * len + i) * width + h * dh;
              T* dqi = dq.data() + (b * len + i) * width + h * dh;
              for (std::size_t j = 0; j < len; ++j) {
                const T g = ar[j] * (ds[j] - dot) * scale;
                const T* kj = k.data() + (b * len + j) * width + h * dh;
                T* dkj = dk.data() + (b * len + j) * width + h * dh;
                for (std::size_t c = 0; c < dh; ++c) {
                  dqi[c] += g * kj[c];
                  dkj[c] += g * qi[c];
                }
              }
            }
          }
        }
        const std::vector<T>* dproj[3] = {&dq, &dk, &dv};
        T* dx = grad(0);
        for (std::size_t p = 0; p < 3; ++p) {
          const T* wmat = self.parents[1 + p]->value.data();
          if (T* dw = grad(1 + p)) gemm_tn(xv, dproj[p]->data(), dw, rows, width, width);
          if (dx) gemm_nt(dproj[p]->data(), wmat, dx, rows, width, width);
        }
      });
  return result;
}

template AttentionOutput<float> multi_head_attention(const Tensor<float>&, const AttentionWeights<float>&,
                                                     std::size_t);
template AttentionOutput<double> multi_head_attention(const Tensor<double>&, const AttentionWeights<double>&,
                                                      std::size_t);

}  // namespace tsep::ops
