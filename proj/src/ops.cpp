// Copyright 2026 The tsep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "tsep/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace tsep::ops {

namespace {

template <typename T>
T* grad_of(TensorNode<T>& self, std::size_t i) {
  auto& p = self.parents[i];
  if (!p || !p->requires_grad) return nullptr;
  return p->grad_buffer().data();
}

template <typename T>
const T* value_of(const TensorNode<T>& self, std::size_t i) {
  return self.parents[i]->value.data();
}

[[noreturn]] void dim_error(const std::string& op, const std::string& what) {
  throw DimensionError(op + ": " + what);
}

// Splits a shape around one axis into (outer, axis extent, inner) counts.
struct AxisSplit {
  std::size_t outer = 1, extent = 1, inner = 1;
};

AxisSplit split_at(const Shape& shape, std::size_t axis, const char* op) {
  if (axis >= shape.size()) {
    dim_error(op, "axis " + std::to_string(axis) + " out of range for " + shape_str(shape));
  }
  AxisSplit s;
  for (std::size_t i = 0; i < axis; ++i) s.outer *= shape[i];
  s.extent = shape[axis];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) s.inner *= shape[i];
  return s;
}

}  // namespace

template <typename T>
Tensor<T> linear(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias) {
  if (weight.rank() != 2) dim_error("linear", "weight must be rank 2");
  if (x.rank() < 1) dim_error("linear", "input must have rank >= 1");
  const std::size_t din = weight.extent(0);
  const std::size_t dout = weight.extent(1);
  if (x.shape().back() != din) {
    dim_error("linear", "input " + shape_str(x.shape()) + " vs weight " + shape_str(weight.shape()));
  }
  const bool has_bias = bias.defined();
  if (has_bias && (bias.rank() != 1 || bias.extent(0) != dout)) {
    dim_error("linear", "bias " + shape_str(bias.shape()) + " vs output width " + std::to_string(dout));
  }
  const std::size_t rows = din == 0 ? 0 : x.size() / din;
  Shape out_shape = x.shape();
  out_shape.back() = dout;

  std::vector<T> y(rows * dout, T{0});
  const T* xv = x.data().data();
  const T* wv = weight.data().data();
  for (std::size_t n = 0; n < rows; ++n) {
    T* yr = y.data() + n * dout;
    if (has_bias) std::copy_n(bias.data().data(), dout, yr);
    for (std::size_t i = 0; i < din; ++i) {
      const T xi = xv[n * din + i];
      const T* wr = wv + i * dout;
      for (std::size_t j = 0; j < dout; ++j) yr[j] += xi * wr[j];
    }
  }
  return Tensor<T>::make_result(
      "linear", std::move(out_shape), std::move(y), {x, weight, bias},
      [rows, din, dout](TensorNode<T>& self) {
        const T* dy = self.grad.data();
        const T* xv = value_of(self, 0);
        const T* wv = value_of(self, 1);
        if (T* dx = grad_of(self, 0)) {
          for (std::size_t n = 0; n < rows; ++n) {
            for (std::size_t i = 0; i < din; ++i) {
              const T* wr = wv + i * dout;
              const T* dyr = dy + n * dout;
              T acc = 0;
              for (std::size_t j = 0; j < dout; ++j) acc += dyr[j] * wr[j];
              dx[n * din + i] += acc;
            }
          }
        }
        if (T* dw = grad_of(self, 1)) {
          for (std::size_t n = 0; n < rows; ++n) {
            const T* dyr = dy + n * dout;
            for (std::size_t i = 0; i < din; ++i) {
              const T xi = xv[n * din + i];
              T* dwr = dw + i * dout;
              for (std::size_t j = 0; j < dout; ++j) dwr[j] += xi * dyr[j];
            }
          }
        }
        if (self.parents[2]) {
          if (T* db = grad_of(self, 2)) {
            for (std::size_t n = 0; n < rows; ++n) {
              for (std::size_t j = 0; j < dout; ++j) db[j] += dy[n * dout + j];
            }
          }
        }
      });
}

template <typename T>
Tensor<T> conv1d(const Tensor<T>& x, const Tensor<T>& kernels, std::size_t stride) {
  if (stride == 0) throw ConfigError("conv1d: stride must be positive");
  if (x.rank() != 2 || kernels.rank() != 3) dim_error("conv1d", "expects x [C_in, T] and kernels [C_out, C_in, L]");
  const std::size_t cin = x.extent(0), len = x.extent(1);
  const std::size_t cout = kernels.extent(0), klen = kernels.extent(2);
  if (kernels.extent(1) != cin) {
    dim_error("conv1d", "input channels " + std::to_string(cin) + " vs kernels " + shape_str(kernels.shape()));
  }
  if (len < klen) {
    throw InputTooShortError("conv1d: input length " + std::to_string(len) +
                             " shorter than kernel length " + std::to_string(klen));
  }
  const std::size_t tout = (len - klen) / stride + 1;
  std::vector<T> y(cout * tout, T{0});
  const T* xv = x.data().data();
  const T* kv = kernels.data().data();
  for (std::size_t o = 0; o < cout; ++o) {
    for (std::size_t t = 0; t < tout; ++t) {
      T acc = 0;
      for (std::size_t i = 0; i < cin; ++i) {
        const T* xr = xv + i * len + t * stride;
        const T* kr = kv + (o * cin + i) * klen;
        for (std::size_t l = 0; l < klen; ++l) acc += kr[l] * xr[l];
      }
      y[o * tout + t] = acc;
    }
  }
  return Tensor<T>::make_result(
      "conv1d", Shape{cout, tout}, std::move(y), {x, kernels},
      [cin, len, cout, klen, tout, stride](TensorNode<T>& self) {
        const T* dy = self.grad.data();
        const T* xv = value_of(self, 0);
        const T* kv = value_of(self, 1);
        T* dx = grad_of(self, 0);
        T* dk = grad_of(self, 1);
        for (std::size_t o = 0; o < cout; ++o) {
          for (std::size_t t = 0; t < tout; ++t) {
            const T g = dy[o * tout + t];
            for (std::size_t i = 0; i < cin; ++i) {
              const std::size_t xoff = i * len + t * stride;
              const std::size_t koff = (o * cin + i) * klen;
              for (std::size_t l = 0; l < klen; ++l) {
                if (dx) dx[xoff + l] += g * kv[koff + l];
                if (dk) dk[koff + l] += g * xv[xoff + l];
              }
            }
          }
        }
      });
}

template <typename T>
Tensor<T> conv1d_transposed(const Tensor<T>& x, const Tensor<T>& kernels, std::size_t stride) {
  if (stride == 0) throw ConfigError("conv1d_transposed: stride must be positive");
  if (x.rank() != 2 || kernels.rank() != 3) {
    dim_error("conv1d_transposed", "expects x [C_in, T] and kernels [C_in, C_out, L]");
  }
  const std::size_t cin = x.extent(0), len = x.extent(1);
  const std::size_t cout = kernels.extent(1), klen = kernels.extent(2);
  if (kernels.extent(0) != cin) {
    dim_error("conv1d_transposed", "input channels " + std::to_string(cin) + " vs kernels " +
                                       shape_str(kernels.shape()));
  }
  if (len < 1) throw InputTooShortError("conv1d_transposed: empty input");
  const std::size_t tout = (len - 1) * stride + klen;
  std::vector<T> y(cout * tout, T{0});
  const T* xv = x.data().data();
  const T* kv = kernels.data().data();
  for (std::size_t i = 0; i < cin; ++i) {
    for (std::size_t t = 0; t < len; ++t) {
      const T xi = xv[i * len + t];
      for (std::size_t o = 0; o < cout; ++o) {
        T* yr = y.data() + o * tout + t * stride;
        const T* kr = kv + (i * cout + o) * klen;
        for (std::size_t l = 0; l < klen; ++l) yr[l] += xi * kr[l];
      }
    }
  }
  return Tensor<T>::make_result(
      "conv1d_transposed", Shape{cout, tout}, std::move(y), {x, kernels},
      [cin, len, cout, klen, tout, stride](TensorNode<T>& self) {
        const T* dy = self.grad.data();
        const T* xv = value_of(self, 0);
        const T* kv = value_of(self, 1);
        T* dx = grad_of(self, 0);
        T* dk = grad_of(self, 1);
        for (std::size_t i = 0; i < cin; ++i) {
          for (std::size_t t = 0; t < len; ++t) {
            const T xi = xv[i * len + t];
            T acc = 0;
            for (std::size_t o = 0; o < cout; ++o) {
              const T* dyr = dy + o * tout + t * stride;
              const std::size_t koff = (i * cout + o) * klen;
              for (std::size_t l = 0; l < klen; ++l) {
                acc += dyr[l] * kv[koff + l];
                if (dk) dk[koff + l] += xi * dyr[l];
              }
            }
            if (dx) dx[i * len + t] += acc;
          }
        }
      });
}

template <typename T>
Tensor<T> depthwise_conv_seq(const Tensor<T>& x, const Tensor<T>& kernels) {
  if (kernels.rank() != 2) dim_error("depthwise_conv", "kernels must be [C, L]");
  const std::size_t klen = kernels.extent(1);
  if (klen % 2 == 0) {
    throw ConfigError("depthwise_conv: kernel length " + std::to_string(klen) +
                      " must be odd for symmetric padding");
  }
  if (x.rank() != 3) dim_error("depthwise_conv", "input must be [B, T, C]");
  const std::size_t batch = x.extent(0), len = x.extent(1), ch = x.extent(2);
  if (kernels.extent(0) != ch) {
    dim_error("depthwise_conv", "channels " + std::to_string(ch) + " vs kernels " + shape_str(kernels.shape()));
  }
  const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>(klen / 2);
  const std::ptrdiff_t slen = static_cast<std::ptrdiff_t>(len);
  std::vector<T> y(x.size(), T{0});
  const T* xv = x.data().data();
  const T* kv = kernels.data().data();
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::ptrdiff_t t = 0; t < slen; ++t) {
      T* yr = y.data() + (b * len + t) * ch;
      for (std::size_t l = 0; l < klen; ++l) {
        const std::ptrdiff_t src = t + static_cast<std::ptrdiff_t>(l) - pad;
        if (src < 0 || src >= slen) continue;
        const T* xr = xv + (b * len + src) * ch;
        for (std::size_t c = 0; c < ch; ++c) yr[c] += kv[c * klen + l] * xr[c];
      }
    }
  }
  return Tensor<T>::make_result(
      "depthwise_conv", x.shape(), std::move(y), {x, kernels},
      [batch, len, ch, klen, pad](TensorNode<T>& self) {
        const T* dy = self.grad.data();
        const T* xv = value_of(self, 0);
        const T* kv = value_of(self, 1);
        T* dx = grad_of(self, 0);
        T* dk = grad_of(self, 1);
        const std::ptrdiff_t slen = static_cast<std::ptrdiff_t>(len);
        for (std::size_t b = 0; b < batch; ++b) {
          for (std::ptrdiff_t t = 0; t < slen; ++t) {
            const T* dyr = dy + (b * len + t) * ch;
            for (std::size_t l = 0; l < klen; ++l) {
              const std::ptrdiff_t src = t + static_cast<std::ptrdiff_t>(l) - pad;
              if (src < 0 || src >= slen) continue;
              const std::size_t xoff = (b * len + src) * ch;
              for (std::size_t c = 0; c < ch; ++c) {
                if (dx) dx[xoff + c] += kv[c * klen + l] * dyr[c];
                if (dk) dk[c * klen + l] += xv[xoff + c] * dyr[c];
              }
            }
          }
        }
      });
}

template <typename T>
Tensor<T> depthwise_conv1d(const Tensor<T>& x, const Tensor<T>& kernels) {
  if (x.rank() != 2) dim_error("depthwise_conv1d", "input must be [C, T]");
  const std::size_t ch = x.extent(0), len = x.extent(1);
  auto seq = reshape(transpose(x), Shape{1, len, ch});
  return transpose(reshape(depthwise_conv_seq(seq, kernels), Shape{len, ch}));
}

template <typename T>
Tensor<T> pointwise_conv1d(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias) {
  if (x.rank() != 2) dim_error("pointwise_conv1d", "input must be [C, T]");
  if (weight.rank() != 2 || weight.extent(1) != x.extent(0)) {
    dim_error("pointwise_conv1d", "weight " + shape_str(weight.shape()) + " vs input " + shape_str(x.shape()));
  }
  return transpose(linear(transpose(x), transpose(weight), bias));
}

template <typename T>
Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta, double eps) {
  if (eps <= 0) throw ConfigError("layer_norm: eps must be positive");
  if (x.rank() < 1 || x.shape().back() == 0) dim_error("layer_norm", "normalized axis must be non-empty");
  const std::size_t d = x.shape().back();
  if (gamma.rank() != 1 || gamma.extent(0) != d || beta.rank() != 1 || beta.extent(0) != d) {
    dim_error("layer_norm", "gamma/beta must be [" + std::to_string(d) + "]");
  }
  const std::size_t rows = x.size() / d;
  std::vector<T> y(x.size());
  std::vector<T> xhat(x.size());
  std::vector<T> rstd(rows);
  const T* xv = x.data().data();
  const T* gv = gamma.data().data();
  const T* bv = beta.data().data();
  for (std::size_t n = 0; n < rows; ++n) {
    const T* xr = xv + n * d;
    double mean = 0;
    for (std::size_t j = 0; j < d; ++j) mean += xr[j];
    mean /= static_cast<double>(d);
    double var = 0;
    for (std::size_t j = 0; j < d; ++j) var += (xr[j] - mean) * (xr[j] - mean);
    var /= static_cast<double>(d);
    const double r = 1.0 / std::sqrt(var + eps);
    rstd[n] = static_cast<T>(r);
    for (std::size_t j = 0; j < d; ++j) {
      const T h = static_cast<T>((xr[j] - mean) * r);
      xhat[n * d + j] = h;
      y[n * d + j] = h * gv[j] + bv[j];
    }
  }
  return Tensor<T>::make_result(
      "layer_norm", x.shape(), std::move(y), {x, gamma, beta},
      [rows, d, xhat = std::move(xhat), rstd = std::move(rstd)](TensorNode<T>& self) {
        const T* dy = self.grad.data();
        const T* gv = value_of(self, 1);
        T* dx = grad_of(self, 0);
        T* dg = grad_of(self, 1);
        T* db = grad_of(self, 2);
        std::vector<T> dh(d);
        for (std::size_t n = 0; n < rows; ++n) {
          const T* dyr = dy + n * d;
          const T* hr = xhat.data() + n * d;
          for (std::size_t j = 0; j < d; ++j) {
            if (dg) dg[j] += dyr[j] * hr[j];
            if (db) db[j] += dyr[j];
          }
          if (!dx) continue;
          T mean_dh = 0, mean_dhh = 0;
          for (std::size_t j = 0; j < d; ++j) {
            dh[j] = dyr[j] * gv[j];
            mean_dh += dh[j];
            mean_dhh += dh[j] * hr[j];
          }
          mean_dh /= static_cast<T>(d);
          mean_dhh /= static_cast<T>(d);
          for (std::size_t j = 0; j < d; ++j) {
            dx[n * d + j] += rstd[n] * (dh[j] - mean_dh - hr[j] * mean_dhh);
          }
        }
      });
}

template <typename T>
Tensor<T> relu(const Tensor<T>& x) {
  std::vector<T> y(x.size());
  const auto xv = x.data();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = xv[i] > T{0} ? xv[i] : T{0};
  return Tensor<T>::make_result("relu", x.shape(), std::move(y), {x}, [](TensorNode<T>& self) {
    const T* xv = value_of(self, 0);
    if (T* dx = grad_of(self, 0)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) {
        if (xv[i] > T{0}) dx[i] += self.grad[i];
      }
    }
  });
}

template <typename T>
Tensor<T> prelu(const Tensor<T>& x, const Tensor<T>& slope) {
  if (slope.size() != 1) dim_error("prelu", "slope must hold exactly one value");
  const T a = slope.data()[0];
  std::vector<T> y(x.size());
  const auto xv = x.data();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = xv[i] > T{0} ? xv[i] : a * xv[i];
  return Tensor<T>::make_result("prelu", x.shape(), std::move(y), {x, slope}, [](TensorNode<T>& self) {
    const T* xv = value_of(self, 0);
    const T a = value_of(self, 1)[0];
    T* dx = grad_of(self, 0);
    T* da = grad_of(self, 1);
    T acc = 0;
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      const T g = self.grad[i];
      if (xv[i] > T{0}) {
        if (dx) dx[i] += g;
      } else {
        if (dx) dx[i] += a * g;
        acc += g * xv[i];
      }
    }
    if (da) da[0] += acc;
  });
}

template <typename T>
Tensor<T> softmax(const Tensor<T>& x, std::size_t axis) {
  const AxisSplit s = split_at(x.shape(), axis, "softmax");
  std::vector<T> y(x.size());
  const T* xv = x.data().data();
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t in = 0; in < s.inner; ++in) {
      const std::size_t base = o * s.extent * s.inner + in;
      T mx = xv[base];
      for (std::size_t k = 1; k < s.extent; ++k) mx = std::max(mx, xv[base + k * s.inner]);
      T total = 0;
      for (std::size_t k = 0; k < s.extent; ++k) {
        const T e = std::exp(xv[base + k * s.inner] - mx);
        y[base + k * s.inner] = e;
        total += e;
      }
      for (std::size_t k = 0; k < s.extent; ++k) y[base + k * s.inner] /= total;
    }
  }
  auto saved = y;
  return Tensor<T>::make_result(
      "softmax", x.shape(), std::move(y), {x}, [s, yv = std::move(saved)](TensorNode<T>& self) {
        T* dx = grad_of(self, 0);
        if (!dx) return;
        const T* dy = self.grad.data();
        for (std::size_t o = 0; o < s.outer; ++o) {
          for (std::size_t in = 0; in < s.inner; ++in) {
            const std::size_t base = o * s.extent * s.inner + in;
            T dot = 0;
            for (std::size_t k = 0; k < s.extent; ++k) dot += dy[base + k * s.inner] * yv[base + k * s.inner];
            for (std::size_t k = 0; k < s.extent; ++k) {
              const std::size_t i = base + k * s.inner;
              dx[i] += yv[i] * (dy[i] - dot);
            }
          }
        }
      });
}

template <typename T>
Tensor<T> concat(const Tensor<T>& a, const Tensor<T>& b, std::size_t axis) {
  if (a.rank() != b.rank()) dim_error("concat", "rank mismatch");
  const AxisSplit sa = split_at(a.shape(), axis, "concat");
  const AxisSplit sb = split_at(b.shape(), axis, "concat");
  for (std::size_t i = 0; i < a.rank(); ++i) {
    if (i != axis && a.extent(i) != b.extent(i)) {
      dim_error("concat", shape_str(a.shape()) + " vs " + shape_str(b.shape()) + " off axis " + std::to_string(axis));
    }
  }
  Shape out_shape = a.shape();
  out_shape[axis] = sa.extent + sb.extent;
  const std::size_t blk_a = sa.extent * sa.inner, blk_b = sb.extent * sb.inner;
  std::vector<T> y(a.size() + b.size());
  for (std::size_t o = 0; o < sa.outer; ++o) {
    T* dst = y.data() + o * (blk_a + blk_b);
    std::copy_n(a.data().data() + o * blk_a, blk_a, dst);
    std::copy_n(b.data().data() + o * blk_b, blk_b, dst + blk_a);
  }
  return Tensor<T>::make_result(
      "concat", std::move(out_shape), std::move(y), {a, b},
      [outer = sa.outer, blk_a, blk_b](TensorNode<T>& self) {
        T* da = grad_of(self, 0);
        T* db = grad_of(self, 1);
        for (std::size_t o = 0; o < outer; ++o) {
          const T* src = self.grad.data() + o * (blk_a + blk_b);
          if (da) {
            for (std::size_t i = 0; i < blk_a; ++i) da[o * blk_a + i] += src[i];
          }
          if (db) {
            for (std::size_t i = 0; i < blk_b; ++i) db[o * blk_b + i] += src[blk_a + i];
          }
        }
      });
}

template <typename T>
Tensor<T> slice(const Tensor<T>& x, std::size_t axis, std::size_t begin, std::size_t end) {
  const AxisSplit s = split_at(x.shape(), axis, "slice");
  if (begin > end || end > s.extent) {
    dim_error("slice", "range [" + std::to_string(begin) + ", " + std::to_string(end) + ") outside extent " +
                           std::to_string(s.extent));
  }
  Shape out_shape = x.shape();
  out_shape[axis] = end - begin;
  const std::size_t blk_in = s.extent * s.inner;
  const std::size_t blk_out = (end - begin) * s.inner;
  const std::size_t off = begin * s.inner;
  std::vector<T> y(s.outer * blk_out);
  for (std::size_t o = 0; o < s.outer; ++o) {
    std::copy_n(x.data().data() + o * blk_in + off, blk_out, y.data() + o * blk_out);
  }
  return Tensor<T>::make_result(
      "slice", std::move(out_shape), std::move(y), {x},
      [outer = s.outer, blk_in, blk_out, off](TensorNode<T>& self) {
        T* dx = grad_of(self, 0);
        if (!dx) return;
        for (std::size_t o = 0; o < outer; ++o) {
          for (std::size_t i = 0; i < blk_out; ++i) dx[o * blk_in + off + i] += self.grad[o * blk_out + i];
        }
      });
}

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.shape() != b.shape()) dim_error("add", shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  std::vector<T> y(a.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = a.data()[i] + b.data()[i];
  return Tensor<T>::make_result("add", a.shape(), std::move(y), {a, b}, [](TensorNode<T>& self) {
    for (std::size_t p = 0; p < 2; ++p) {
      if (T* d = grad_of(self, p)) {
        for (std::size_t i = 0; i < self.grad.size(); ++i) d[i] += self.grad[i];
      }
    }
  });
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.shape() != b.shape()) dim_error("mul", shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  std::vector<T> y(a.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = a.data()[i] * b.data()[i];
  return Tensor<T>::make_result("mul", a.shape(), std::move(y), {a, b}, [](TensorNode<T>& self) {
    const T* av = value_of(self, 0);
    const T* bv = value_of(self, 1);
    T* da = grad_of(self, 0);
    T* db = grad_of(self, 1);
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      if (da) da[i] += self.grad[i] * bv[i];
      if (db) db[i] += self.grad[i] * av[i];
    }
  });
}

template <typename T>
Tensor<T> scale(const Tensor<T>& x, double factor) {
  const T f = static_cast<T>(factor);
  std::vector<T> y(x.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = x.data()[i] * f;
  return Tensor<T>::make_result("scale", x.shape(), std::move(y), {x}, [f](TensorNode<T>& self) {
    if (T* dx = grad_of(self, 0)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) dx[i] += self.grad[i] * f;
    }
  });
}

template <typename T>
Tensor<T> sum(const Tensor<T>& x) {
  T total = 0;
  for (T v : x.data()) total += v;
  return Tensor<T>::make_result("sum", Shape{1}, std::vector<T>{total}, {x}, [](TensorNode<T>& self) {
    if (T* dx = grad_of(self, 0)) {
      const std::size_t n = self.parents[0]->value.size();
      for (std::size_t i = 0; i < n; ++i) dx[i] += self.grad[0];
    }
  });
}

template <typename T>
Tensor<T> reshape(const Tensor<T>& x, Shape shape) {
  if (numel(shape) != x.size()) dim_error("reshape", shape_str(x.shape()) + " -> " + shape_str(shape));
  std::vector<T> y(x.data().begin(), x.data().end());
  return Tensor<T>::make_result("reshape", std::move(shape), std::move(y), {x}, [](TensorNode<T>& self) {
    if (T* dx = grad_of(self, 0)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) dx[i] += self.grad[i];
    }
  });
}

template <typename T>
Tensor<T> transpose(const Tensor<T>& x) {
  if (x.rank() != 2) dim_error("transpose", "expects rank 2, got " + shape_str(x.shape()));
  const std::size_t r = x.extent(0), c = x.extent(1);
  std::vector<T> y(x.size());
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) y[j * r + i] = x.data()[i * c + j];
  }
  return Tensor<T>::make_result("transpose", Shape{c, r}, std::move(y), {x}, [r, c](TensorNode<T>& self) {
    if (T* dx = grad_of(self, 0)) {
      for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < c; ++j) dx[i * c + j] += self.grad[j * r + i];
      }
    }
  });
}

template <typename T>
Tensor<T> swap_leading(const Tensor<T>& x) {
  if (x.rank() != 3) dim_error("swap_leading", "expects rank 3, got " + shape_str(x.shape()));
  const std::size_t a = x.extent(0), b = x.extent(1), c = x.extent(2);
  std::vector<T> y(x.size());
  for (std::size_t i = 0; i < a; ++i) {
    for (std::size_t j = 0; j < b; ++j) {
      std::copy_n(x.data().data() + (i * b + j) * c, c, y.data() + (j * a + i) * c);
    }
  }
  return Tensor<T>::make_result("swap_leading", Shape{b, a, c}, std::move(y), {x}, [a, b, c](TensorNode<T>& self) {
    if (T* dx = grad_of(self, 0)) {
      for (std::size_t i = 0; i < a; ++i) {
        for (std::size_t j = 0; j < b; ++j) {
          const T* src = self.grad.data() + (j * a + i) * c;
          T* dst = dx + (i * b + j) * c;
          for (std::size_t k = 0; k < c; ++k) dst[k] += src[k];
        }
      }
    }
  });
}

template <typename T>
Tensor<T> fit_length(const Tensor<T>& x, std::size_t length) {
  if (x.rank() != 1) dim_error("fit_length", "expects rank 1, got " + shape_str(x.shape()));
  const std::size_t keep = std::min(length, x.size());
  std::vector<T> y(length, T{0});
  std::copy_n(x.data().data(), keep, y.data());
  return Tensor<T>::make_result("fit_length", Shape{length}, std::move(y), {x}, [keep](TensorNode<T>& self) {
    if (T* dx = grad_of(self, 0)) {
      for (std::size_t i = 0; i < keep; ++i) dx[i] += self.grad[i];
    }
  });
}

#define TSEP_INSTANTIATE_OPS(T)                                                                  \
  template Tensor<T> linear(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);               \
  template Tensor<T> conv1d(const Tensor<T>&, const Tensor<T>&, std::size_t);                    \
  template Tensor<T> conv1d_transposed(const Tensor<T>&, const Tensor<T>&, std::size_t);         \
  template Tensor<T> depthwise_conv1d(const Tensor<T>&, const Tensor<T>&);                       \
  template Tensor<T> depthwise_conv_seq(const Tensor<T>&, const Tensor<T>&);                     \
  template Tensor<T> pointwise_conv1d(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);     \
  template Tensor<T> layer_norm(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, double);   \
  template Tensor<T> relu(const Tensor<T>&);                                                     \
  template Tensor<T> prelu(const Tensor<T>&, const Tensor<T>&);                                  \
  template Tensor<T> softmax(const Tensor<T>&, std::size_t);                                     \
  template Tensor<T> concat(const Tensor<T>&, const Tensor<T>&, std::size_t);                    \
  template Tensor<T> slice(const Tensor<T>&, std::size_t, std::size_t, std::size_t);             \
  template Tensor<T> add(const Tensor<T>&, const Tensor<T>&);                                    \
  template Tensor<T> mul(const Tensor<T>&, const Tensor<T>&);                                    \
  template Tensor<T> scale(const Tensor<T>&, double);                                            \
  template Tensor<T> sum(const Tensor<T>&);                                                      \
  template Tensor<T> reshape(const Tensor<T>&, Shape);                                           \
  template Tensor<T> transpose(const Tensor<T>&);                                                \
  template Tensor<T> swap_leading(const Tensor<T>&);                                             \
  template Tensor<T> fit_length(const Tensor<T>&, std::size_t);

TSEP_INSTANTIATE_OPS(float)
TSEP_INSTANTIATE_OPS(double)

}  // namespace tsep::ops
