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

// Minimal reverse-mode differentiation over dense matrices. A Graph records
// every forward op together with its backward rule; Backward() replays the
// rules in reverse recording order.

#ifndef APRANK_AUTODIFF_H_
#define APRANK_AUTODIFF_H_

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <string>
#include <vector>

#include "aprank/matrix.h"

namespace aprank::autodiff {

// The op families a graph accepts.
enum class OpKind {
  kInput,
  kMatMul,
  kCosineNormalize,
  kTopKGather,
  kPiecewiseMap,
  kClamp,
  kReduce,
  kLogSumExp,
  kConvolution,
  kAssemble,
};

const char* OpKindName(OpKind kind);

struct Var {
  std::size_t id = 0;
};

class Graph;

// Reads the op's output gradient via g.Grad(self) and accumulates into the
// gradients of its inputs via g.MutableGrad(input).
using BackwardFn = std::function<void(Graph& g, Var self)>;

class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var Parameter(Matrix value, std::string name = "");
  Var Constant(Matrix value);

  // Registers an op output. Throws StructuralError for an op kind outside
  // the supported families, or when an input needs a gradient and no
  // backward rule is given.
  Var Record(OpKind kind, std::vector<Var> inputs, Matrix value,
             BackwardFn backward);

  const Matrix& Value(Var v) const { return node(v).value; }
  const Matrix& Grad(Var v) const { return node(v).grad; }
  Matrix& MutableGrad(Var v) { return node(v).grad; }
  bool RequiresGrad(Var v) const { return node(v).requires_grad; }
  OpKind Kind(Var v) const { return node(v).kind; }
  std::size_t num_nodes() const { return nodes_.size(); }

  // Seeds d loss / d loss = 1 for a 1 x 1 output and back-propagates.
  void Backward(Var loss);

  // Discrete choices made during the forward pass (selected top-K indices,
  // piecewise branches, argmax positions). Two forward passes with equal
  // decision logs evaluate the same smooth piece of the function.
  // Logging is off by default; ops only log when it is enabled.
  void set_log_decisions(bool on) { log_decisions_ = on; }
  bool log_decisions() const { return log_decisions_; }
  void LogDecision(std::uint64_t d) { decisions_.push_back(d); }
  const std::vector<std::uint64_t>& decisions() const { return decisions_; }

 private:
  struct Node {
    OpKind kind;
    std::string name;
    Matrix value;
    Matrix grad;
    std::vector<Var> inputs;
    BackwardFn backward;
    bool requires_grad = false;
  };

  Node& node(Var v) { return nodes_[v.id]; }
  const Node& node(Var v) const { return nodes_[v.id]; }

  std::deque<Node> nodes_;
  std::vector<std::uint64_t> decisions_;
  bool log_decisions_ = false;
};

// FNV-1a style mixing of a value into a running hash.
inline std::uint64_t HashMix(std::uint64_t h, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) {
    h ^= (v >> (8 * b)) & 0xffU;
    h *= 0x100000001b3ULL;
  }
  return h;
}
inline constexpr std::uint64_t kHashSeed = 0xcbf29ce484222325ULL;

}  // namespace aprank::autodiff

#endif  // APRANK_AUTODIFF_H_
