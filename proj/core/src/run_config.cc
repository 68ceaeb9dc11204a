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

#include "aprank/run_config.h"

#include <algorithm>
#include <charconv>
#include <functional>
#include <set>
#include <string_view>

#include "aprank/autodiff.h"
#include "aprank/errors.h"

namespace aprank {
namespace {

std::string Trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string FormatDouble(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

bool ParseDouble(const std::string& s, double& out) {
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

bool ParseSize(const std::string& s, std::size_t& out) {
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

bool ParseU64(const std::string& s, std::uint64_t& out) {
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

const char* RefinerName(RefinerKind k) {
  switch (k) {
    case RefinerKind::kIdentity:
      return "identity";
    case RefinerKind::kAffine:
      return "affine";
    case RefinerKind::kConv:
      return "conv";
  }
  return "identity";
}

struct Field {
  std::string key;
  std::string type;  // For diagnostics.
  std::function<std::string(const TrainConfig&)> get;
  // Returns false when the text does not parse.
  std::function<bool(TrainConfig&, const std::string&)> set;
};

// Field getters reuse the mutable accessor on a scratch copy.
TrainConfig& Copy(const TrainConfig& c) {
  thread_local TrainConfig scratch;
  scratch = c;
  return scratch;
}

template <typename Ref>
Field RealField(std::string key, Ref ref) {
  return {std::move(key), "real",
          [ref](const TrainConfig& c) {
            return FormatDouble(ref(Copy(c)));
          },
          [ref](TrainConfig& c, const std::string& v) {
            return ParseDouble(v, ref(c));
          }};
}

template <typename Ref>
Field SizeField(std::string key, Ref ref) {
  return {std::move(key), "non-negative integer",
          [ref](const TrainConfig& c) {
            return std::to_string(ref(Copy(c)));
          },
          [ref](TrainConfig& c, const std::string& v) {
            return ParseSize(v, ref(c));
          }};
}

template <typename Ref>
Field BoolField(std::string key, Ref ref) {
  return {std::move(key), "true|false",
          [ref](const TrainConfig& c) {
            return std::string(ref(Copy(c)) ? "true" : "false");
          },
          [ref](TrainConfig& c, const std::string& v) {
            if (v != "true" && v != "false") return false;
            ref(c) = v == "true";
            return true;
          }};
}

#define APRANK_REF(expr) [](TrainConfig& c) -> auto& { return c.expr; }

const std::vector<Field>& Schema() {
  static const std::vector<Field> fields = [] {
    std::vector<Field> f;
    f.push_back({"seed", "non-negative integer",
                 [](const TrainConfig& c) { return std::to_string(c.seed); },
                 [](TrainConfig& c, const std::string& v) { return ParseU64(v, c.seed); }});
    f.push_back(SizeField("iterations", APRANK_REF(iterations)));
    f.push_back(SizeField("batch_size", APRANK_REF(batch_size)));
    f.push_back(RealField("holdout_fraction", APRANK_REF(holdout_fraction)));
    f.push_back(SizeField("eval_every", APRANK_REF(eval_every)));
    f.push_back(SizeField("num_threads", APRANK_REF(num_threads)));
    f.push_back(RealField("init_noise", APRANK_REF(init_noise)));

    f.push_back(SizeField("data.num_clips", APRANK_REF(data.num_clips)));
    f.push_back(SizeField("data.frames", APRANK_REF(data.frames)));
    f.push_back(SizeField("data.patches", APRANK_REF(data.patches)));
    f.push_back(SizeField("data.dim", APRANK_REF(data.dim)));
    f.push_back(SizeField("data.teacher_dim", APRANK_REF(data.teacher_dim)));
    f.push_back(SizeField("data.num_groups", APRANK_REF(data.num_groups)));
    f.push_back(RealField("data.overlap", APRANK_REF(data.overlap)));
    f.push_back(RealField("data.noise", APRANK_REF(data.noise)));
    f.push_back(RealField("data.nuisance", APRANK_REF(data.nuisance)));
    f.push_back(SizeField("data.num_styles", APRANK_REF(data.num_styles)));
    f.push_back(SizeField("data.distractor_pool", APRANK_REF(data.distractor_pool)));
    f.push_back(RealField("data.distractor_rate", APRANK_REF(data.distractor_rate)));
    f.push_back(RealField("data.teacher_noise", APRANK_REF(data.teacher_noise)));

    f.push_back(RealField("augment.crop_keep", APRANK_REF(data.augment.crop_keep)));
    f.push_back(BoolField("augment.reverse", APRANK_REF(data.augment.reverse)));
    f.push_back(BoolField("augment.shuffle", APRANK_REF(data.augment.shuffle)));
    f.push_back(RealField("augment.dropout", APRANK_REF(data.augment.dropout)));
    f.push_back(RealField("augment.noise", APRANK_REF(data.augment.noise)));

    f.push_back({"loss.video", "quadlinear|smooth|triplet|contrastive|none",
                 [](const TrainConfig& c) { return std::string(VideoLossName(c.video_loss)); },
                 [](TrainConfig& c, const std::string& v) {
                   const auto l = ParseVideoLoss(v);
                   if (!l) return false;
                   c.video_loss = *l;
                   return true;
                 }});
    f.push_back(RealField("loss.delta_v", APRANK_REF(video.delta)));
    f.push_back(RealField("loss.rho_v", APRANK_REF(video.rho)));
    f.push_back(RealField("loss.delta_f", APRANK_REF(frame.delta)));
    f.push_back(RealField("loss.rho_f", APRANK_REF(frame.rho)));
    f.push_back(RealField("loss.lambda_v", APRANK_REF(weights.lambda_v)));
    f.push_back(RealField("loss.lambda_f", APRANK_REF(weights.lambda_f)));
    f.push_back(RealField("loss.lambda_s", APRANK_REF(weights.lambda_s)));
    f.push_back(RealField("loss.tau_nce", APRANK_REF(weights.tau_nce)));
    f.push_back(RealField("loss.smooth_tau", APRANK_REF(smooth_tau)));
    f.push_back(RealField("loss.margin", APRANK_REF(margin)));

    f.push_back(RealField("labels.top", APRANK_REF(rates.top)));
    f.push_back(RealField("labels.bottom", APRANK_REF(rates.bottom)));
    f.push_back(RealField("aggregation.k_s", APRANK_REF(aggregation.k_s)));
    f.push_back(RealField("aggregation.k_t", APRANK_REF(aggregation.k_t)));

    f.push_back({"refiner.kind", "identity|affine|conv",
                 [](const TrainConfig& c) { return std::string(RefinerName(c.refiner.kind)); },
                 [](TrainConfig& c, const std::string& v) {
                   for (const RefinerKind k :
                        {RefinerKind::kIdentity, RefinerKind::kAffine, RefinerKind::kConv}) {
                     if (v == RefinerName(k)) {
                       c.refiner.kind = k;
                       return true;
                     }
                   }
                   return false;
                 }});
    f.push_back(RealField("refiner.scale", APRANK_REF(refiner.scale)));
    f.push_back(RealField("refiner.bias", APRANK_REF(refiner.bias)));
    f.push_back(SizeField("refiner.downsample", APRANK_REF(refiner.downsample)));
    f.push_back(SizeField("refiner.conv_size", APRANK_REF(refiner.conv_size)));

    f.push_back(RealField("optim.lr", APRANK_REF(optimizer.learning_rate)));
    f.push_back(RealField("optim.warmup_fraction", APRANK_REF(optimizer.warmup_fraction)));
    f.push_back(RealField("optim.weight_decay", APRANK_REF(optimizer.weight_decay)));
    f.push_back(RealField("optim.beta1", APRANK_REF(optimizer.beta1)));
    f.push_back(RealField("optim.beta2", APRANK_REF(optimizer.beta2)));
    f.push_back(RealField("optim.epsilon", APRANK_REF(optimizer.epsilon)));
    return f;
  }();
  return fields;
}

#undef APRANK_REF

}  // namespace

ConfigEntries ParseConfigText(const std::string& text) {
  ConfigEntries out;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParameterError("config line " + std::to_string(line_no) +
                           ": expected 'key = value', got '" + line + "'");
    }
    std::string key = Trim(std::string_view(line).substr(0, eq));
    std::string value = Trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) {
      throw ParameterError("config line " + std::to_string(line_no) + ": empty key");
    }
    if (!seen.insert(key).second) {
      throw ParameterError("config line " + std::to_string(line_no) +
                           ": duplicate key '" + key + "'");
    }
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

TrainConfig ApplyConfig(const TrainConfig& base, const ConfigEntries& entries) {
  TrainConfig cfg = base;
  std::vector<std::string> problems;
  const std::size_t old_conv = cfg.refiner.conv_size;
  const RefinerKind old_kind = cfg.refiner.kind;
  for (const auto& [key, value] : entries) {
    const Field* field = nullptr;
    for (const Field& f : Schema()) {
      if (f.key == key) field = &f;
    }
    if (field == nullptr) {
      problems.push_back("unknown key '" + key + "'");
      continue;
    }
    if (!field->set(cfg, value)) {
      problems.push_back("key '" + key + "': cannot parse '" + value + "' as " +
                         field->type);
    }
  }
  if (cfg.refiner.kind == RefinerKind::kConv &&
      (old_kind != RefinerKind::kConv || old_conv != cfg.refiner.conv_size ||
       cfg.refiner.conv_weights.size() != cfg.refiner.conv_size * cfg.refiner.conv_size)) {
    const RefinerParams delta = RefinerParams::DeltaConv(cfg.refiner.conv_size);
    cfg.refiner.conv_weights = delta.conv_weights;
  }
  if (problems.empty()) {
    try {
      cfg.Validate();
    } catch (const ParameterError& e) {
      problems.push_back(e.what());
    }
  }
  if (!problems.empty()) {
    std::string msg = "invalid configuration:";
    for (const std::string& p : problems) msg += "\n  " + p;
    msg += "\nvalid keys:";
    for (const Field& f : Schema()) msg += "\n  " + f.key + " (" + f.type + ")";
    throw ParameterError(msg);
  }
  return cfg;
}

ConfigEntries DescribeConfig(const TrainConfig& cfg) {
  ConfigEntries out;
  for (const Field& f : Schema()) out.emplace_back(f.key, f.get(cfg));
  return out;
}

std::string FormatConfig(const ConfigEntries& entries) {
  std::string out;
  for (const auto& [k, v] : entries) out += k + " = " + v + "\n";
  return out;
}

std::uint64_t ConfigHash(const TrainConfig& cfg) {
  std::uint64_t h = autodiff::kHashSeed;
  for (const char ch : FormatConfig(DescribeConfig(cfg))) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<std::string> ConfigKeys() {
  std::vector<std::string> keys;
  for (const Field& f : Schema()) keys.push_back(f.key);
  return keys;
}

}  // namespace aprank
