/*
 * Copyright 2026 The aprank Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Binary artifacts: tensor files and model checkpoints.
//
// A tensor file starts with a text manifest
//
//   APTENSOR 1
//   tensor <name> <f32|f64> <d0>x<d1>x...
//   ...
//   <empty line>
//
// followed by the payloads of the listed tensors in manifest order, each
// little-endian and row-major.

#ifndef APRANK_TENSOR_IO_H_
#define APRANK_TENSOR_IO_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "aprank/matrix.h"
#include "aprank/trainer.h"

namespace aprank {

enum class DType { kF32, kF64 };

struct Tensor {
  std::string name;
  DType dtype = DType::kF64;
  std::vector<std::size_t> shape;
  std::vector<double> values;  // Product of shape entries.

  bool operator==(const Tensor&) const = default;
};

// Throws StructuralError for a size mismatch, a name with whitespace, or an
// f32 tensor whose values are not exactly representable in 32 bits.
std::string EncodeTensorFile(const std::vector<Tensor>& tensors);
// Throws StructuralError for a malformed manifest or a payload whose length
// disagrees with the manifest.
std::vector<Tensor> DecodeTensorFile(const std::string& bytes);

void WriteTensorFile(const std::string& path, const std::vector<Tensor>& tensors);
std::vector<Tensor> ReadTensorFile(const std::string& path);

// 2-D view of a rank-2 tensor (rank 1 becomes a single row).
Matrix TensorToMatrix(const Tensor& t);

// Layout: magic "APRCKPT\0", u32 version, u64 config hash, u32 refiner kind,
// u64 refiner downsample, u32 tensor count, then per tensor u64 rows, u64
// cols and rows * cols f64 values, all little-endian.
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  Model model;
  std::uint64_t config_hash = 0;
};

std::string EncodeCheckpoint(const Checkpoint& ckpt);
Checkpoint DecodeCheckpoint(const std::string& bytes);
void WriteCheckpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint ReadCheckpoint(const std::string& path);

std::string ReadFileBytes(const std::string& path);
void WriteFileBytes(const std::string& path, const std::string& bytes);

}  // namespace aprank

#endif  // APRANK_TENSOR_IO_H_
