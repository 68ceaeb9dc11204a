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

// Finite-difference check of a graph's analytic gradients. Inputs
// whose perturbation changes the decision log (top-K set, clamp pattern,
// piecewise branch) are skipped: the function is not smooth across them.

#ifndef APRANK_TESTS_GRADCHECK_H_
#define APRANK_TESTS_GRADCHECK_H_

#include <functional>
#include <random>
#include <vector>

#include "aprank/autodiff.h"
#include "aprank/graph_ops.h"
#include "test_util.h"

namespace aprank::testing {

using GraphBuilder =
    std::function<autodiff::Var(autodiff::Graph&, const std::vector<autodiff::Var>&)>;

struct GradCheckResult {
  double max_error = 0.0;
  std::size_t checked = 0;
  std::size_t skipped = 0;
};

// 1 x 1 sum of c .* v for a fixed coefficient matrix c.
inline autodiff::Var DotWith(autodiff::Graph& g, autodiff::Var v, const Matrix& c) {
  const Matrix& x = g.Value(v);
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) s += c.data()[k] * x.data()[k];
  return g.Record(autodiff::OpKind::kReduce, {v}, Matrix(1, 1, s),
                  [v, c](autodiff::Graph& g, autodiff::Var self) {
                    if (!g.RequiresGrad(v)) return;
                    const double d = g.Grad(self)(0, 0);
                    Matrix& gr = g.MutableGrad(v);
                    for (std::size_t k = 0; k < gr.size(); ++k) gr.data()[k] += d * c.data()[k];
                  });
}

struct Evaluated {
  double value;
  std::vector<std::uint64_t> decisions;
  std::vector<Matrix> grads;
};

// A non-scalar output is reduced against coefficients drawn once from
// `seed`, so every evaluation sees the same projection.
inline Evaluated EvaluateGraph(const GraphBuilder& build, const std::vector<Matrix>& inputs,
                               bool backward, std::uint64_t seed) {
  autodiff::Graph g;
  g.set_log_decisions(true);
  std::vector<autodiff::Var> vars;
  for (const Matrix& m : inputs) vars.push_back(g.Parameter(m));
  autodiff::Var out = build(g, vars);
  if (g.Value(out).size() != 1) {
    std::mt19937_64 rng(seed);
    out = DotWith(g, out, UniformMatrix(rng, g.Value(out).rows(), g.Value(out).cols()));
  }
  Evaluated e{g.Value(out)(0, 0), g.decisions(), {}};
  if (backward) {
    g.Backward(out);
    for (const autodiff::Var v : vars) e.grads.push_back(g.Grad(v));
  }
  return e;
}

// Five-point central differences; an entry counts only when all four
// perturbed evaluations keep the unperturbed decision log.
inline GradCheckResult CheckGraphGradients(const GraphBuilder& build,
                                           const std::vector<Matrix>& inputs,
                                           double h = 1e-4, double floor = 1e-4,
                                           std::uint64_t seed = 7) {
  const Evaluated base = EvaluateGraph(build, inputs, true, seed);
  GradCheckResult r;
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    for (std::size_t k = 0; k < inputs[t].size(); ++k) {
      double f[4];
      bool smooth = true;
      const double offsets[4] = {-2.0 * h, -h, h, 2.0 * h};
      for (int s = 0; s < 4 && smooth; ++s) {
        std::vector<Matrix> shifted = inputs;
        shifted[t].data()[k] += offsets[s];
        const Evaluated e = EvaluateGraph(build, shifted, false, seed);
        smooth = e.decisions == base.decisions;
        f[s] = e.value;
      }
      if (!smooth) {
        ++r.skipped;
        continue;
      }
      const double numeric = (f[0] - 8.0 * f[1] + 8.0 * f[2] - f[3]) / (12.0 * h);
      r.max_error = std::max(r.max_error,
                             RelativeError(base.grads[t].data()[k], numeric, floor));
      ++r.checked;
    }
  }
  return r;
}

}  // namespace aprank::testing

#endif  // APRANK_TESTS_GRADCHECK_H_
