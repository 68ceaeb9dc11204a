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

#include "aprank/autodiff.h"

#include <algorithm>
#include <string>
#include <utility>

#include "aprank/errors.h"

namespace aprank::autodiff {

const char* OpKindName(OpKind kind) {
  switch (kind) {
    case OpKind::kInput: return "input";
    case OpKind::kMatMul: return "matmul";
    case OpKind::kCosineNormalize: return "cosine_normalize";
    case OpKind::kTopKGather: return "topk_gather";
    case OpKind::kPiecewiseMap: return "piecewise_map";
    case OpKind::kClamp: return "clamp";
    case OpKind::kReduce: return "reduce";
    case OpKind::kLogSumExp: return "log_sum_exp";
    case OpKind::kConvolution: return "convolution";
    case OpKind::kAssemble: return "assemble";
  }
  return "unknown";
}

Var Graph::Parameter(Matrix value, std::string name) {
  Node n{OpKind::kInput, std::move(name), std::move(value), {}, {}, {}, true};
  n.grad = Matrix(n.value.rows(), n.value.cols());
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

Var Graph::Constant(Matrix value) {
  Node n{OpKind::kInput, "", std::move(value), {}, {}, {}, false};
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

Var Graph::Record(OpKind kind, std::vector<Var> inputs, Matrix value,
                  BackwardFn backward) {
  if (kind == OpKind::kInput || static_cast<int>(kind) < 0 ||
      static_cast<int>(kind) > static_cast<int>(OpKind::kAssemble)) {
    throw StructuralError("autodiff: unsupported op kind " +
                          std::to_string(static_cast<int>(kind)));
  }
  bool requires_grad = false;
  for (const Var in : inputs) {
    if (in.id >= nodes_.size()) {
      throw StructuralError("autodiff: input refers to an unknown node");
    }
    requires_grad = requires_grad || node(in).requires_grad;
  }
  if (requires_grad && !backward) {
    throw StructuralError(std::string("autodiff: op '") + OpKindName(kind) +
                          "' has no backward rule");
  }
  Node n{kind, "", std::move(value), {}, std::move(inputs), std::move(backward),
         requires_grad};
  if (requires_grad) n.grad = Matrix(n.value.rows(), n.value.cols());
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

void Graph::Backward(Var loss) {
  Node& out = node(loss);
  if (out.value.rows() != 1 || out.value.cols() != 1) {
    throw StructuralError("autodiff: Backward needs a 1x1 output");
  }
  for (Node& n : nodes_) {
    if (n.requires_grad) std::fill(n.grad.data().begin(), n.grad.data().end(), 0.0);
  }
  if (!out.requires_grad) return;
  out.grad(0, 0) = 1.0;
  for (std::size_t id = loss.id + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (!n.requires_grad || !n.backward) continue;
    n.backward(*this, Var{id});
  }
}

}  // namespace aprank::autodiff
