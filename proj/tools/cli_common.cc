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

#include "cli_common.h"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "aprank/errors.h"
#include "aprank/tensor_io.h"

#ifndef APRANK_VERSION
#define APRANK_VERSION "unknown"
#endif
#ifndef APRANK_GIT_REVISION
#define APRANK_GIT_REVISION "unknown"
#endif

namespace aprank::cli {

std::string OutputDir(const GlobalOptions& g) {
  std::string dir = g.out_dir;
  if (dir.empty()) {
    const char* env = std::getenv("APRANK_OUT_DIR");
    dir = (env != nullptr && *env != '\0') ? env : ".";
  }
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw UsageError("cannot create output directory '" + dir + "': " + ec.message());
  return dir;
}

std::vector<std::string> SplitList(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  for (std::string item; std::getline(in, item, ',');) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

std::vector<double> ParseDoubles(const std::string& text, const std::string& flag) {
  std::vector<double> out;
  for (const std::string& item : SplitList(text)) {
    double v = 0.0;
    const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
    if (res.ec != std::errc() || res.ptr != item.data() + item.size()) {
      throw UsageError(flag + ": cannot parse '" + item + "' as a number");
    }
    out.push_back(v);
  }
  return out;
}

std::vector<std::uint64_t> ParseSeeds(const std::string& text) {
  std::vector<std::uint64_t> out;
  for (const std::string& item : SplitList(text)) {
    std::uint64_t v = 0;
    const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
    if (res.ec != std::errc() || res.ptr != item.data() + item.size()) {
      throw UsageError("--seeds: cannot parse '" + item + "' as a seed");
    }
    out.push_back(v);
  }
  if (out.empty()) throw UsageError("--seeds: empty list");
  return out;
}

std::string FormatDouble(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void WriteText(const std::string& path, const std::string& text) {
  try {
    WriteFileBytes(path, text);
  } catch (const StructuralError& e) {
    throw UsageError(e.what());
  }
}

std::string JoinPath(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

Json Stamp() {
  return Json{{"tool", "aprank"},
              {"version", APRANK_VERSION},
              {"revision", APRANK_GIT_REVISION}};
}

Json ConfigJson(const TrainConfig& cfg) {
  Json j = Json::object();
  for (const auto& [k, v] : DescribeConfig(cfg)) j[k] = v;
  return j;
}

Json MetricJson(const MetricReport& r) {
  Json per = Json::array();
  for (const auto& ap : r.per_query_ap) {
    per.push_back(ap ? Json(*ap) : Json(nullptr));
  }
  return Json{{"mean_ap", r.mean_ap},
              {"micro_ap", r.micro_ap},
              {"num_queries", r.num_queries},
              {"num_valid_queries", r.num_valid_queries},
              {"num_positives", r.num_positives},
              {"per_query_ap", per}};
}

Json LossJson(const LossBreakdown& l) {
  return Json{{"total", l.total},
              {"video", l.video},
              {"frame", l.frame},
              {"nce", l.nce},
              {"sshn", l.sshn}};
}

TrainConfig ResolveTrainConfig(const std::string& preset,
                               const std::string& config_path,
                               const std::vector<std::string>& overrides) {
  const std::optional<TrainConfig> base = Preset(preset);
  if (!base) throw UsageError("unknown preset '" + preset + "' (expected easy|hard)");
  try {
    ConfigEntries entries;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw UsageError("cannot read config file '" + config_path + "'");
      std::stringstream text;
      text << in.rdbuf();
      entries = ParseConfigText(text.str());
    }
    for (const std::string& o : overrides) {
      const ConfigEntries one = ParseConfigText(o);
      for (const auto& e : one) {
        std::erase_if(entries, [&](const auto& x) { return x.first == e.first; });
        entries.push_back(e);
      }
    }
    return ApplyConfig(*base, entries);
  } catch (const ParameterError& e) {
    throw UsageError(e.what());
  }
}

double Median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void RecordTiming(const GlobalOptions& g, const std::string& dir,
                  const std::string& command, double seconds, Json& report) {
  if (g.deterministic) {
    const Json timing{{"command", command}, {"wall_clock_seconds", seconds}};
    WriteText(JoinPath(dir, command + "_timing.json"), timing.dump(2) + "\n");
  } else {
    report["wall_clock_seconds"] = seconds;
  }
}

}  // namespace aprank::cli
