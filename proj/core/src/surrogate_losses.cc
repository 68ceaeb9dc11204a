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

#include "aprank/surrogate_losses.h"

#include <cmath>
#include <string>

#include "aprank/errors.h"

namespace aprank {
namespace {

double H(double u) { return u / (1.0 + u); }
double HGrad(double u) { return 1.0 / ((1.0 + u) * (1.0 + u)); }

void CheckDelta(double delta) {
  if (!(delta > 0.0)) {
    throw ParameterError("delta must be > 0, got " + std::to_string(delta));
  }
}

void CheckTau(double tau) {
  if (!(tau > 0.0)) {
    throw ParameterError("tau must be > 0, got " + std::to_string(tau));
  }
}

void CheckMargin(double margin) {
  if (!(margin >= 0.0)) {
    throw ParameterError("margin must be >= 0, got " + std::to_string(margin));
  }
}

LossOutput SkippedOutput(const QueryContext& q) {
  LossOutput out;
  out.skipped = true;
  out.grad_negatives.assign(q.negatives.size(), 0.0);
  return out;
}

}  // namespace

void QuadLinearParams::Validate() const {
  CheckDelta(delta);
  if (!(rho >= 0.0)) {
    throw ParameterError("rho must be >= 0, got " + std::to_string(rho));
  }
}

void SmoothApParams::Validate() const { CheckTau(tau); }

double RMinus(double x, double delta) {
  CheckDelta(delta);
  if (x >= 0.0) return 2.0 / delta * x + 1.0;
  if (x >= -delta) {
    const double t = x / delta + 1.0;
    return t * t;
  }
  return 0.0;
}

double RMinusGrad(double x, double delta) {
  CheckDelta(delta);
  if (x >= 0.0) return 2.0 / delta;
  if (x >= -delta) return 2.0 / (delta * delta) * x + 2.0 / delta;
  return 0.0;
}

double SigmoidSurrogate(double x, double tau) {
  CheckTau(tau);
  const double z = x / tau;
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double SigmoidSurrogateGrad(double x, double tau) {
  CheckTau(tau);
  // G' = e^{-|z|} / (tau (1 + e^{-|z|})^2), symmetric in z.
  const double e = std::exp(-std::abs(x / tau));
  return e / (tau * (1.0 + e) * (1.0 + e));
}

std::optional<double> ApRiskForm(const QueryContext& q,
                                 const std::function<double(double)>& neg_term,
                                 const std::function<double(double)>& pos_term,
                                 double rho) {
  if (q.positives.empty()) return std::nullopt;
  double total = 0.0;
  for (const double si : q.positives) {
    double numer = 0.0;
    for (const double sj : q.negatives) numer += neg_term(sj - si);
    double weight = 0.0;
    for (const double sp : q.positives) weight += pos_term(sp - si);
    total += H(numer / (1.0 + rho * weight));
  }
  return total / static_cast<double>(q.positives.size());
}

LossOutput QuadLinearApRisk(const QueryContext& q, const QuadLinearParams& p) {
  p.Validate();
  if (q.positives.empty()) return SkippedOutput(q);
  const std::size_t np = q.positives.size();
  const std::size_t nn = q.negatives.size();
  const double inv_np = 1.0 / static_cast<double>(np);
  LossOutput out;
  out.grad_positives.assign(np, 0.0);
  out.grad_negatives.assign(nn, 0.0);
  for (std::size_t i = 0; i < np; ++i) {
    const double si = q.positives[i];
    double numer = 0.0;
    for (const double sj : q.negatives) numer += RMinus(sj - si, p.delta);
    double weight = 0.0;
    for (const double sp : q.positives) weight += RPlus(sp - si);
    const double denom = 1.0 + p.rho * weight;
    const double u = numer / denom;
    out.value += H(u);
    const double scale = inv_np * HGrad(u) / denom;
    if (scale == 0.0) continue;
    for (std::size_t j = 0; j < nn; ++j) {
      const double g = scale * RMinusGrad(q.negatives[j] - si, p.delta);
      out.grad_negatives[j] += g;
      out.grad_positives[i] -= g;
    }
  }
  out.value *= inv_np;
  return out;
}

std::optional<double> HeavisideApRisk(const QueryContext& q) {
  if (q.positives.empty()) return std::nullopt;
  double total = 0.0;
  for (const double si : q.positives) {
    double above_neg = 0.0;
    for (const double sj : q.negatives) above_neg += Heaviside(sj - si);
    double above_pos = 0.0;
    for (const double sp : q.positives) above_pos += Heaviside(sp - si);
    total += above_neg / (1.0 + above_pos + above_neg);
  }
  return total / static_cast<double>(q.positives.size());
}

LossOutput SmoothApRisk(const QueryContext& q, const SmoothApParams& p) {
  p.Validate();
  if (q.positives.empty()) return SkippedOutput(q);
  const std::size_t np = q.positives.size();
  const std::size_t nn = q.negatives.size();
  const double inv_np = 1.0 / static_cast<double>(np);
  LossOutput out;
  out.grad_positives.assign(np, 0.0);
  out.grad_negatives.assign(nn, 0.0);
  for (std::size_t i = 0; i < np; ++i) {
    const double si = q.positives[i];
    double neg_sum = 0.0;
    for (const double sj : q.negatives) neg_sum += SigmoidSurrogate(sj - si, p.tau);
    double pos_sum = 0.0;
    for (std::size_t k = 0; k < np; ++k) {
      if (k != i) pos_sum += SigmoidSurrogate(q.positives[k] - si, p.tau);
    }
    const double denom = 1.0 + pos_sum + neg_sum;
    out.value += neg_sum / denom;
    // term = N / (1 + P + N)
    const double d_neg = inv_np * (1.0 + pos_sum) / (denom * denom);
    const double d_pos = -inv_np * neg_sum / (denom * denom);
    for (std::size_t j = 0; j < nn; ++j) {
      const double g = d_neg * SigmoidSurrogateGrad(q.negatives[j] - si, p.tau);
      out.grad_negatives[j] += g;
      out.grad_positives[i] -= g;
    }
    for (std::size_t k = 0; k < np; ++k) {
      if (k == i) continue;
      const double g =
          d_pos * SigmoidSurrogateGrad(q.positives[k] - si, p.tau);
      out.grad_positives[k] += g;
      out.grad_positives[i] -= g;
    }
  }
  out.value *= inv_np;
  return out;
}

LossOutput TripletLoss(const QueryContext& q, double margin) {
  CheckMargin(margin);
  if (q.positives.empty()) return SkippedOutput(q);
  const std::size_t np = q.positives.size();
  const std::size_t nn = q.negatives.size();
  LossOutput out;
  out.grad_positives.assign(np, 0.0);
  out.grad_negatives.assign(nn, 0.0);
  if (nn == 0) return out;
  const double inv = 1.0 / static_cast<double>(np * nn);
  for (std::size_t i = 0; i < np; ++i) {
    for (std::size_t j = 0; j < nn; ++j) {
      const double hinge = q.negatives[j] - q.positives[i] + margin;
      if (hinge > 0.0) {
        out.value += hinge * inv;
        out.grad_negatives[j] += inv;
        out.grad_positives[i] -= inv;
      }
    }
  }
  return out;
}

LossOutput ContrastiveLoss(const QueryContext& q, double margin) {
  CheckMargin(margin);
  if (q.positives.empty()) return SkippedOutput(q);
  const std::size_t np = q.positives.size();
  const std::size_t nn = q.negatives.size();
  const double inv = 1.0 / static_cast<double>(np + nn);
  LossOutput out;
  out.grad_positives.assign(np, -inv);
  out.grad_negatives.assign(nn, 0.0);
  for (const double sp : q.positives) out.value += (1.0 - sp) * inv;
  for (std::size_t j = 0; j < nn; ++j) {
    const double hinge = q.negatives[j] - margin;
    if (hinge > 0.0) {
      out.value += hinge * inv;
      out.grad_negatives[j] = inv;
    }
  }
  return out;
}

BatchLossOutput RankingBatchLoss(const Matrix& sim, const RelevanceMatrix& y,
                                 const QueryLoss& loss) {
  if (sim.rows() != sim.cols()) {
    throw StructuralError("batch loss: similarity matrix must be square, got " +
                          std::to_string(sim.rows()) + "x" +
                          std::to_string(sim.cols()));
  }
  if (y.size() != sim.rows()) {
    throw StructuralError("batch loss: relevance is " +
                          std::to_string(y.size()) + "x" +
                          std::to_string(y.size()) + " but similarity is " +
                          std::to_string(sim.rows()) + "x" +
                          std::to_string(sim.cols()));
  }
  const std::size_t n = sim.rows();
  BatchLossOutput out;
  out.grad = Matrix(n, n);
  std::vector<LossOutput> per_row(n);
  std::vector<QueryIndices> indices(n);
  for (std::size_t k = 0; k < n; ++k) {
    indices[k] = PartitionQueryIndices(y.row(k), k);
    QueryContext q;
    for (const std::size_t j : indices[k].positives) q.positives.push_back(sim(k, j));
    for (const std::size_t j : indices[k].negatives) q.negatives.push_back(sim(k, j));
    per_row[k] = loss(q);
    if (!per_row[k].skipped) ++out.num_queries;
  }
  if (out.num_queries == 0) return out;
  const double inv = 1.0 / static_cast<double>(out.num_queries);
  // Fixed row order keeps the reduction deterministic.
  for (std::size_t k = 0; k < n; ++k) {
    const LossOutput& r = per_row[k];
    if (r.skipped) continue;
    out.value += r.value * inv;
    for (std::size_t a = 0; a < indices[k].positives.size(); ++a) {
      out.grad(k, indices[k].positives[a]) = r.grad_positives[a] * inv;
    }
    for (std::size_t a = 0; a < indices[k].negatives.size(); ++a) {
      out.grad(k, indices[k].negatives[a]) = r.grad_negatives[a] * inv;
    }
  }
  return out;
}

BatchLossOutput QuadLinearApBatchLoss(const Matrix& sim,
                                      const RelevanceMatrix& y,
                                      const QuadLinearParams& p) {
  p.Validate();
  return RankingBatchLoss(
      sim, y, [&p](const QueryContext& q) { return QuadLinearApRisk(q, p); });
}

}  // namespace aprank
