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

#include "aprank/tensor_io.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "aprank/errors.h"

namespace aprank {
namespace {

constexpr char kTensorMagic[] = "APTENSOR 1";
constexpr char kCheckpointMagic[8] = {'A', 'P', 'R', 'C', 'K', 'P', 'T', '\0'};

template <typename T>
void PutLE(std::string& out, T value) {
  std::uint64_t bits = 0;
  if constexpr (std::is_floating_point_v<T>) {
    using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
    bits = std::bit_cast<U>(value);
  } else {
    bits = static_cast<std::uint64_t>(value);
  }
  for (std::size_t b = 0; b < sizeof(T); ++b) {
    out.push_back(static_cast<char>((bits >> (8 * b)) & 0xffU));
  }
}

class Reader {
 public:
  Reader(const std::string& bytes, std::size_t pos) : bytes_(bytes), pos_(pos) {}

  template <typename T>
  T Get() {
    if (pos_ > bytes_.size() || bytes_.size() - pos_ < sizeof(T)) {
      throw StructuralError("truncated binary payload at byte " +
                            std::to_string(pos_));
    }
    std::uint64_t bits = 0;
    for (std::size_t b = 0; b < sizeof(T); ++b) {
      bits |= static_cast<std::uint64_t>(
                  static_cast<unsigned char>(bytes_[pos_ + b]))
              << (8 * b);
    }
    pos_ += sizeof(T);
    if constexpr (std::is_floating_point_v<T>) {
      using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
      return std::bit_cast<T>(static_cast<U>(bits));
    } else {
      return static_cast<T>(bits);
    }
  }

  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  const std::string& bytes_;
  std::size_t pos_;
};

const char* DTypeName(DType d) { return d == DType::kF32 ? "f32" : "f64"; }

std::size_t ElementCount(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (const std::size_t d : shape) n *= d;
  return n;
}

}  // namespace

std::string EncodeTensorFile(const std::vector<Tensor>& tensors) {
  std::string out = std::string(kTensorMagic) + "\n";
  for (const Tensor& t : tensors) {
    if (t.name.empty() || t.name.find_first_of(" \t\r\n") != std::string::npos) {
      throw StructuralError("tensor name must be non-empty without whitespace: '" +
                            t.name + "'");
    }
    if (t.shape.empty()) throw StructuralError("tensor " + t.name + " has no shape");
    if (ElementCount(t.shape) != t.values.size()) {
      throw StructuralError("tensor " + t.name + " holds " +
                            std::to_string(t.values.size()) +
                            " values but its shape needs " +
                            std::to_string(ElementCount(t.shape)));
    }
    out += "tensor " + t.name + " " + DTypeName(t.dtype) + " ";
    for (std::size_t k = 0; k < t.shape.size(); ++k) {
      if (k > 0) out += "x";
      out += std::to_string(t.shape[k]);
    }
    out += "\n";
  }
  out += "\n";
  for (const Tensor& t : tensors) {
    for (const double v : t.values) {
      if (t.dtype == DType::kF32) {
        const float f = static_cast<float>(v);
        if (static_cast<double>(f) != v && !(v != v)) {
          throw StructuralError("tensor " + t.name + " value " + std::to_string(v) +
                                " is not representable as f32");
        }
        PutLE(out, f);
      } else {
        PutLE(out, v);
      }
    }
  }
  return out;
}

std::vector<Tensor> DecodeTensorFile(const std::string& bytes) {
  std::size_t pos = 0;
  auto next_line = [&]() {
    const std::size_t end = bytes.find('\n', pos);
    if (end == std::string::npos) {
      throw StructuralError("tensor manifest is not terminated by an empty line");
    }
    std::string line = bytes.substr(pos, end - pos);
    pos = end + 1;
    return line;
  };
  if (next_line() != kTensorMagic) {
    throw StructuralError("not a tensor file (expected header '" +
                          std::string(kTensorMagic) + "')");
  }
  std::vector<Tensor> tensors;
  for (std::string line = next_line(); !line.empty(); line = next_line()) {
    std::istringstream in(line);
    std::string word, dtype, shape;
    Tensor t;
    if (!(in >> word >> t.name >> dtype >> shape) || word != "tensor") {
      throw StructuralError("malformed manifest line: '" + line + "'");
    }
    if (dtype == "f32") {
      t.dtype = DType::kF32;
    } else if (dtype == "f64") {
      t.dtype = DType::kF64;
    } else {
      throw StructuralError("unknown element type '" + dtype + "'");
    }
    std::istringstream dims(shape);
    for (std::string d; std::getline(dims, d, 'x');) {
      if (d.empty() || d.find_first_not_of("0123456789") != std::string::npos) {
        throw StructuralError("malformed shape '" + shape + "'");
      }
      t.shape.push_back(std::stoull(d));
    }
    if (t.shape.empty()) throw StructuralError("empty shape in '" + line + "'");
    tensors.push_back(std::move(t));
  }
  std::size_t need = 0;
  for (const Tensor& t : tensors) {
    need += ElementCount(t.shape) * (t.dtype == DType::kF32 ? 4 : 8);
  }
  if (bytes.size() - pos != need) {
    throw StructuralError("tensor payload has " + std::to_string(bytes.size() - pos) +
                          " bytes, manifest requires " + std::to_string(need));
  }
  Reader reader(bytes, pos);
  for (Tensor& t : tensors) {
    const std::size_t n = ElementCount(t.shape);
    t.values.resize(n);
    for (double& v : t.values) {
      v = t.dtype == DType::kF32 ? static_cast<double>(reader.Get<float>())
                                 : reader.Get<double>();
    }
  }
  return tensors;
}

std::string ReadFileBytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StructuralError("cannot open '" + path + "'");
  return std::string(std::istreambuf_iterator<char>(in), {});
}

void WriteFileBytes(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw StructuralError("cannot write '" + path + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw StructuralError("short write to '" + path + "'");
}

void WriteTensorFile(const std::string& path, const std::vector<Tensor>& tensors) {
  WriteFileBytes(path, EncodeTensorFile(tensors));
}

std::vector<Tensor> ReadTensorFile(const std::string& path) {
  return DecodeTensorFile(ReadFileBytes(path));
}

Matrix TensorToMatrix(const Tensor& t) {
  if (t.shape.size() == 1) return Matrix(1, t.shape[0], t.values);
  if (t.shape.size() == 2) return Matrix(t.shape[0], t.shape[1], t.values);
  throw StructuralError("tensor " + t.name + " has rank " +
                        std::to_string(t.shape.size()) + ", expected 1 or 2");
}

std::string EncodeCheckpoint(const Checkpoint& ckpt) {
  std::string out(kCheckpointMagic, sizeof(kCheckpointMagic));
  PutLE(out, kCheckpointVersion);
  PutLE(out, ckpt.config_hash);
  PutLE(out, static_cast<std::uint32_t>(ckpt.model.refiner.kind));
  PutLE(out, static_cast<std::uint64_t>(ckpt.model.refiner.downsample));
  const std::vector<Matrix> params = ckpt.model.Parameters();
  PutLE(out, static_cast<std::uint32_t>(params.size()));
  for (const Matrix& m : params) {
    PutLE(out, static_cast<std::uint64_t>(m.rows()));
    PutLE(out, static_cast<std::uint64_t>(m.cols()));
    for (const double v : m.data()) PutLE(out, v);
  }
  return out;
}

Checkpoint DecodeCheckpoint(const std::string& bytes) {
  if (bytes.size() < sizeof(kCheckpointMagic) ||
      std::memcmp(bytes.data(), kCheckpointMagic, sizeof(kCheckpointMagic)) != 0) {
    throw StructuralError("not a checkpoint (bad magic)");
  }
  Reader r(bytes, sizeof(kCheckpointMagic));
  const auto version = r.Get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw StructuralError("unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint ckpt;
  ckpt.config_hash = r.Get<std::uint64_t>();
  const auto kind = r.Get<std::uint32_t>();
  if (kind > static_cast<std::uint32_t>(RefinerKind::kConv)) {
    throw StructuralError("unknown refiner kind " + std::to_string(kind));
  }
  ckpt.model.refiner.kind = static_cast<RefinerKind>(kind);
  ckpt.model.refiner.downsample = r.Get<std::uint64_t>();
  const auto count = r.Get<std::uint32_t>();
  std::vector<Matrix> params;
  for (std::uint32_t k = 0; k < count; ++k) {
    const auto rows = r.Get<std::uint64_t>();
    const auto cols = r.Get<std::uint64_t>();
    if (cols != 0 && rows > r.remaining() / 8 / cols) {
      throw StructuralError("checkpoint tensor " + std::to_string(k) +
                            " exceeds the file size");
    }
    Matrix m(rows, cols);
    for (double& v : m.data()) v = r.Get<double>();
    params.push_back(std::move(m));
  }
  if (r.remaining() != 0) {
    throw StructuralError("trailing bytes after checkpoint payload");
  }
  if (params.empty() || params[0].rows() != params[0].cols()) {
    throw StructuralError("checkpoint W must be square");
  }
  ckpt.model.w = Matrix(params[0].rows(), params[0].cols());
  if (ckpt.model.refiner.kind == RefinerKind::kConv) {
    if (params.size() < 2 || params[1].rows() != params[1].cols()) {
      throw StructuralError("checkpoint conv kernel must be square");
    }
    ckpt.model.refiner.conv_size = params[1].rows();
  }
  ckpt.model.SetParameters(params);
  ckpt.model.refiner.Validate();
  return ckpt;
}

void WriteCheckpoint(const std::string& path, const Checkpoint& ckpt) {
  WriteFileBytes(path, EncodeCheckpoint(ckpt));
}

Checkpoint ReadCheckpoint(const std::string& path) {
  return DecodeCheckpoint(ReadFileBytes(path));
}

}  // namespace aprank
