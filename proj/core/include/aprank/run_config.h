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

// Text run configuration: one `key = value` per line, `#` starts a comment.
// Keys mirror TrainConfig fields; see docs/config.md for the schema.

#ifndef APRANK_RUN_CONFIG_H_
#define APRANK_RUN_CONFIG_H_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "aprank/trainer.h"

namespace aprank {

using ConfigEntries = std::vector<std::pair<std::string, std::string>>;

// Throws ParameterError for a line without '=', an empty key or a repeated
// key, naming the line number.
ConfigEntries ParseConfigText(const std::string& text);

// Applies entries on top of `base`. Every problem (unknown key, unparsable
// or out-of-domain value) is collected into one ParameterError message.
TrainConfig ApplyConfig(const TrainConfig& base, const ConfigEntries& entries);

// Every key with its effective value, in schema order. Feeding the result
// back through ApplyConfig reproduces the configuration exactly.
ConfigEntries DescribeConfig(const TrainConfig& cfg);

std::string FormatConfig(const ConfigEntries& entries);

// FNV-1a of FormatConfig(DescribeConfig(cfg)).
std::uint64_t ConfigHash(const TrainConfig& cfg);

// Schema keys in order, for diagnostics and docs.
std::vector<std::string> ConfigKeys();

}  // namespace aprank

#endif  // APRANK_RUN_CONFIG_H_
