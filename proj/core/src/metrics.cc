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

#include "aprank/metrics.h"

#include <algorithm>
#include <numeric>
#include <utility>

#include "aprank/errors.h"

namespace aprank {

double AveragePrecision(const ScoredList& list) {
  list.Validate();
  const std::size_t n = list.scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return list.scores[a] > list.scores[b];
  });
  double sum = 0.0;
  std::size_t num_pos = 0;
  std::size_t above_all = 0;  // items strictly above the current tie block
  std::size_t above_pos = 0;
  std::size_t k = 0;
  while (k < n) {
    std::size_t end = k;
    std::size_t block_pos = 0;
    while (end < n && list.scores[order[end]] == list.scores[order[k]]) {
      block_pos += list.labels[order[end]];
      ++end;
    }
    const double term = static_cast<double>(above_pos + 1) /
                        static_cast<double>(above_all + 1);
    for (std::size_t b = 0; b < block_pos; ++b) sum += term;
    num_pos += block_pos;
    above_pos += block_pos;
    above_all += end - k;
    k = end;
  }
  if (num_pos == 0) throw UndefinedMetricError("AP: query has no positives");
  return sum / static_cast<double>(num_pos);
}

double BruteForceAveragePrecision(const ScoredList& list) {
  list.Validate();
  const std::size_t n = list.scores.size();
  // (rank among all, rank among positives) for every positive.
  std::vector<std::pair<std::size_t, std::size_t>> ranks;
  for (std::size_t i = 0; i < n; ++i) {
    if (list.labels[i] == 0) continue;
    std::size_t rank_all = 1;
    std::size_t rank_pos = 1;
    for (std::size_t j = 0; j < n; ++j) {
      if (list.scores[j] > list.scores[i]) {
        ++rank_all;
        if (list.labels[j] == 1) ++rank_pos;
      }
    }
    ranks.emplace_back(rank_all, rank_pos);
  }
  if (ranks.empty()) throw UndefinedMetricError("AP: query has no positives");
  std::sort(ranks.begin(), ranks.end());
  double sum = 0.0;
  for (const auto& [rank_all, rank_pos] : ranks) {
    sum += static_cast<double>(rank_pos) / static_cast<double>(rank_all);
  }
  return sum / static_cast<double>(ranks.size());
}

double MeanAveragePrecision(std::span<const ScoredList> queries) {
  double sum = 0.0;
  std::size_t valid = 0;
  for (const ScoredList& q : queries) {
    q.Validate();
    if (q.num_positives() == 0) continue;
    sum += AveragePrecision(q);
    ++valid;
  }
  if (valid == 0) throw UndefinedMetricError("mAP: no query has a positive");
  return sum / static_cast<double>(valid);
}

double MicroAveragePrecision(std::span<const ScoredList> queries) {
  struct Item {
    double score;
    std::uint8_t label;
  };
  std::vector<Item> pooled;
  for (const ScoredList& q : queries) {
    q.Validate();
    for (std::size_t i = 0; i < q.scores.size(); ++i) {
      pooled.push_back({q.scores[i], q.labels[i]});
    }
  }
  // pooled is already in (query, index) order; stable sort keeps it on ties.
  std::stable_sort(pooled.begin(), pooled.end(),
                   [](const Item& a, const Item& b) { return a.score > b.score; });
  std::size_t total_pos = 0;
  for (const Item& it : pooled) total_pos += it.label;
  if (total_pos == 0) throw UndefinedMetricError("uAP: no positives in any query");
  double sum = 0.0;
  std::size_t seen_pos = 0;
  for (std::size_t i = 0; i < pooled.size(); ++i) {
    if (pooled[i].label == 0) continue;
    ++seen_pos;
    sum += static_cast<double>(seen_pos) / static_cast<double>(i + 1);
  }
  return sum / static_cast<double>(total_pos);
}

MetricReport EvaluateQueries(std::span<const ScoredList> queries) {
  MetricReport report;
  report.num_queries = queries.size();
  for (const ScoredList& q : queries) {
    q.Validate();
    const std::size_t pos = q.num_positives();
    report.num_positives += pos;
    if (pos == 0) {
      report.per_query_ap.push_back(std::nullopt);
    } else {
      report.per_query_ap.push_back(AveragePrecision(q));
      ++report.num_valid_queries;
    }
  }
  report.mean_ap = MeanAveragePrecision(queries);
  report.micro_ap = MicroAveragePrecision(queries);
  return report;
}

}  // namespace aprank
