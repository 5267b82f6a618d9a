// Copyright 2026 The tsep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <string>
#include <vector>

#include "tsep/model.hpp"
#include "tsep/optim.hpp"

namespace tsep::harness {

// Little-endian container:
//   "TSEP" | u32 version | u32 n | n bytes of model config text
//   | u32 tensor count | per tensor: u32 name length, name bytes, u32 rank,
//     rank x u64 extents, u32 dtype (0 float32, 1 float64), payload.
inline constexpr std::uint32_t kCheckpointVersion = 2;

enum class Dtype : std::uint32_t { kFloat32 = 0, kFloat64 = 1 };

struct StoredTensor {
  std::string name;
  Shape shape;
  Dtype dtype = Dtype::kFloat32;
  std::vector<double> values;  // exact for either dtype
};

struct Checkpoint {
  ModelConfig config;
  std::vector<StoredTensor> tensors;

  const StoredTensor* find(const std::string& name) const;
};

void write_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::string& path);

// Model parameters under their own names; with an optimizer also
// "optim.m.<name>", "optim.v.<name>" and the scalar "optim.step".
template <typename T>
Checkpoint snapshot(const Model<T>& model, const Adam<T>* optim = nullptr);

template <typename T>
Model<T> restore_model(const Checkpoint& ckpt);

bool has_optimizer_state(const Checkpoint& ckpt);
template <typename T>
void restore_optimizer(const Checkpoint& ckpt, Adam<T>& optim, const ParameterSet<T>& params);

}  // namespace tsep::harness
