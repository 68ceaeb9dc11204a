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

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "aprank/errors.h"
#include "aprank/tensor_io.h"
#include "commands.h"

namespace aprank::cli {
namespace {

// Allowed |AP - brute-force AP| under --verify. The two evaluators sum the
// same per-positive terms in different orders.
constexpr double kVerifyTolerance = 1e-12;

using Rows = std::vector<std::vector<double>>;

bool IsTensorFile(const std::string& bytes) { return bytes.rfind("APTENSOR", 0) == 0; }

Rows MatrixRows(const Tensor& t) {
  const Matrix m = TensorToMatrix(t);
  Rows rows(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    rows[r].assign(m.row(r).begin(), m.row(r).end());
  }
  return rows;
}

// One query per line, comma separated; rows may differ in length.
Rows ParseCsv(const std::string& text, const std::string& path) {
  Rows rows;
  std::stringstream in(text);
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    for (const std::string& item : SplitList(line)) {
      double v = 0.0;
      const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
      if (res.ec != std::errc() || res.ptr != item.data() + item.size()) {
        throw UsageError(path + ":" + std::to_string(line_no) + ": cannot parse '" +
                         item + "' as a number");
      }
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

Rows ReadRows(const std::string& path, const std::string& tensor_name) {
  const std::string bytes = ReadFileBytes(path);
  if (!IsTensorFile(bytes)) return ParseCsv(bytes, path);
  const std::vector<Tensor> tensors = DecodeTensorFile(bytes);
  if (tensors.size() == 1) return MatrixRows(tensors[0]);
  for (const Tensor& t : tensors) {
    if (t.name == tensor_name) return MatrixRows(t);
  }
  throw UsageError(path + ": no tensor named '" + tensor_name + "'");
}

std::vector<ScoredList> BuildQueries(const Rows& scores, const Rows& labels) {
  if (scores.size() != labels.size()) {
    throw UsageError("shape mismatch: " + std::to_string(scores.size()) +
                     " score rows vs " + std::to_string(labels.size()) + " label rows");
  }
  std::vector<ScoredList> queries(scores.size());
  for (std::size_t q = 0; q < scores.size(); ++q) {
    if (scores[q].size() != labels[q].size()) {
      throw UsageError("shape mismatch in query " + std::to_string(q) + ": " +
                       std::to_string(scores[q].size()) + " scores vs " +
                       std::to_string(labels[q].size()) + " labels");
    }
    queries[q].scores = scores[q];
    for (const double l : labels[q]) {
      if (l != 0.0 && l != 1.0) {
        throw UsageError("query " + std::to_string(q) + ": labels must be 0 or 1");
      }
      queries[q].labels.push_back(l == 1.0 ? 1 : 0);
    }
    try {
      queries[q].Validate();
    } catch (const StructuralError& e) {
      throw UsageError("query " + std::to_string(q) + ": " + e.what());
    }
  }
  return queries;
}

}  // namespace

CLI::App* AddEval(CLI::App& parent, EvalOptions& opts) {
  CLI::App* cmd = parent.add_subcommand(
      "eval", "Compute per-query AP, mAP and uAP from score and label files");
  cmd->add_option("--input", opts.input,
                  "Tensor file holding 'scores' and 'labels' (queries x items)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--scores", opts.scores, "Scores as a tensor file or CSV (one query per line)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--labels", opts.labels, "0/1 labels, same layout as --scores")
      ->check(CLI::ExistingFile);
  cmd->add_flag("--verify", opts.verify,
                "Cross-check every AP against the pairwise-counting evaluator; exit 3 on "
                "any mismatch");
  return cmd;
}

int RunEval(const GlobalOptions& g, const EvalOptions& opts) {
  Rows scores;
  Rows labels;
  try {
    if (!opts.input.empty()) {
      if (!opts.scores.empty() || !opts.labels.empty()) {
        throw UsageError("--input excludes --scores/--labels");
      }
      scores = ReadRows(opts.input, "scores");
      labels = ReadRows(opts.input, "labels");
      if (DecodeTensorFile(ReadFileBytes(opts.input)).size() < 2) {
        throw UsageError(opts.input + ": expected tensors 'scores' and 'labels'");
      }
    } else {
      if (opts.scores.empty() || opts.labels.empty()) {
        throw UsageError("need --input, or both --scores and --labels");
      }
      scores = ReadRows(opts.scores, "scores");
      labels = ReadRows(opts.labels, "labels");
    }
  } catch (const StructuralError& e) {
    throw UsageError(e.what());
  }
  const std::vector<ScoredList> queries = BuildQueries(scores, labels);
  const MetricReport report = [&] {
    try {
      return EvaluateQueries(queries);
    } catch (const UndefinedMetricError& e) {
      throw UsageError(std::string("no positives: ") + e.what());
    }
  }();
  if (report.num_positives == 0) throw UsageError("no positives in the label file");

  Json out{{"command", "eval"}, {"stamp", Stamp()}, {"metrics", MetricJson(report)}};
  std::size_t mismatches = 0;
  if (opts.verify) {
    double max_diff = 0.0;
    for (std::size_t q = 0; q < queries.size(); ++q) {
      if (!report.per_query_ap[q]) continue;
      const double diff =
          std::abs(*report.per_query_ap[q] - BruteForceAveragePrecision(queries[q]));
      max_diff = std::max(max_diff, diff);
      if (!(diff <= kVerifyTolerance)) ++mismatches;
    }
    out["verify"] = {{"checked", report.num_valid_queries},
                     {"mismatches", mismatches},
                     {"max_abs_diff", max_diff},
                     {"tolerance", kVerifyTolerance}};
  }
  const std::string text = out.dump(2) + "\n";
  WriteText(JoinPath(OutputDir(g), "eval.json"), text);
  std::cout << text;
  if (mismatches > 0) {
    throw NumericFailure(std::to_string(mismatches) + " queries disagree with the oracle");
  }
  return kExitOk;
}

}  // namespace aprank::cli
