// Copyright 2026 The tsep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>

#include "tsep/tensor.hpp"

// Differentiable primitives. Every op validates shapes, computes its forward
// value eagerly and records a backward closure when any input requires grad.
// Layouts: sequence features are channels-last [..., T, C]; the raw
// convolutions follow the channels-first [C, T] convention.
namespace tsep::ops {

// y[..., j] = sum_i x[..., i] * W[i, j] + b[j]. Pass an undefined tensor to
// omit the bias.
template <typename T>
Tensor<T> linear(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias = {});

// Valid strided cross-correlation. x: [C_in, T], kernels: [C_out, C_in, L]
// -> [C_out, (T - L) / stride + 1].
template <typename T>
Tensor<T> conv1d(const Tensor<T>& x, const Tensor<T>& kernels, std::size_t stride);

// Adjoint of conv1d. x: [C_in, T], kernels: [C_in, C_out, L]
// -> [C_out, (T - 1) * stride + L].
template <typename T>
Tensor<T> conv1d_transposed(const Tensor<T>& x, const Tensor<T>& kernels, std::size_t stride);

// Same-length per-channel convolution with (L - 1) / 2 zeros on each side.
// x: [C, T], kernels: [C, L], L odd.
template <typename T>
Tensor<T> depthwise_conv1d(const Tensor<T>& x, const Tensor<T>& kernels);

// Channels-last batched form used inside the model: x: [B, T, C] convolved
// along T, kernels: [C, L].
template <typename T>
Tensor<T> depthwise_conv_seq(const Tensor<T>& x, const Tensor<T>& kernels);

// out[o, t] = sum_i W[o, i] * x[i, t] + b[o]. x: [C, T].
template <typename T>
Tensor<T> pointwise_conv1d(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias);

// Normalizes over the last axis with the biased variance.
template <typename T>
Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta,
                     double eps = 1e-5);

template <typename T>
Tensor<T> relu(const Tensor<T>& x);

// slope: one learnable scalar, shape [1].
template <typename T>
Tensor<T> prelu(const Tensor<T>& x, const Tensor<T>& slope);

template <typename T>
Tensor<T> softmax(const Tensor<T>& x, std::size_t axis);

template <typename T>
Tensor<T> concat(const Tensor<T>& a, const Tensor<T>& b, std::size_t axis);

// Half-open range [begin, end) along axis.
template <typename T>
Tensor<T> slice(const Tensor<T>& x, std::size_t axis, std::size_t begin, std::size_t end);

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);

template <typename T>
Tensor<T> scale(const Tensor<T>& x, double factor);

template <typename T>
Tensor<T> sum(const Tensor<T>& x);

template <typename T>
Tensor<T> reshape(const Tensor<T>& x, Shape shape);

// Rank-2 transpose.
template <typename T>
Tensor<T> transpose(const Tensor<T>& x);

// [A, B, C] -> [B, A, C]. An involution.
template <typename T>
Tensor<T> swap_leading(const Tensor<T>& x);

// Rank-1 resize: keeps the first min(n, length) values, zero-fills the tail.
template <typename T>
Tensor<T> fit_length(const Tensor<T>& x, std::size_t length);

}  // namespace tsep::ops
