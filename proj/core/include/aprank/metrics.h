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

#ifndef APRANK_METRICS_H_
#define APRANK_METRICS_H_

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "aprank/ranking_core.h"

namespace aprank {

struct MetricReport {
  // Indexed like the input queries; nullopt for queries without positives.
  std::vector<std::optional<double>> per_query_ap;
  double mean_ap = 0.0;
  double micro_ap = 0.0;
  std::size_t num_queries = 0;
  std::size_t num_valid_queries = 0;
  std::size_t num_positives = 0;
};

// Mean over positives of rank-among-positives / rank-among-all, with ranks
// 1 + #{strictly higher scores}. Per-positive terms are summed in rank order,
// so the result does not depend on the order of the input list.
// Throws UndefinedMetricError when there is no positive.
double AveragePrecision(const ScoredList& list);

// Independent O(n^2) pairwise-counting evaluation of the same quantity.
double BruteForceAveragePrecision(const ScoredList& list);

// Mean of per-query APs over queries with at least one positive.
double MeanAveragePrecision(std::span<const ScoredList> queries);

// AP of the pooled list of all (score, label) pairs: sum over positives of
// precision at that position times 1 / total positives. Ties keep query order
// then in-query index.
double MicroAveragePrecision(std::span<const ScoredList> queries);

MetricReport EvaluateQueries(std::span<const ScoredList> queries);

}  // namespace aprank

#endif  // APRANK_METRICS_H_
