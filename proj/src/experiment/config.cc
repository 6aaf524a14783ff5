// Copyright 2026 The LVAE Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lvae/experiment/config.h"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"

namespace lvae::experiment {
namespace {

using nlohmann::json;

std::string TypeName(const json& v) {
  if (v.is_number_integer()) return "integer";
  if (v.is_number()) return "number";
  return v.type_name();
}

// Copies `user` over `base`, which holds the defaults. `where` is the dotted
// path of `base`.
absl::Status Overlay(json& base, const json& user, const std::string& where) {
  if (!user.is_object()) {
    return absl::InvalidArgumentError(
        absl::StrCat(where.empty() ? "config" : where, " must be a JSON object"));
  }
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string key = where.empty() ? it.key() : absl::StrCat(where, ".", it.key());
    if (!base.contains(it.key())) {
      return absl::InvalidArgumentError("unknown config key '" + key + "'");
    }
    json& slot = base[it.key()];
    const json& value = it.value();
    if (slot.is_object()) {
      if (absl::Status s = Overlay(slot, value, key); !s.ok()) return s;
      continue;
    }
    const bool ok = slot.is_number_integer()  ? value.is_number_integer()
                    : slot.is_number()        ? value.is_number()
                    : slot.is_string()        ? value.is_string()
                    : slot.is_boolean()       ? value.is_boolean()
                                              : false;
    if (!ok) {
      return absl::InvalidArgumentError(absl::StrCat("config key '", key, "' must be of type ",
                                                     TypeName(slot), ", got ", TypeName(value)));
    }
    slot = value;
  }
  return absl::OkStatus();
}

absl::Status Require(bool condition, std::string_view message) {
  return condition ? absl::OkStatus() : absl::InvalidArgumentError(std::string(message));
}

}  // namespace

json DefaultConfigJson() {
  return json::parse(R"({
    "seed": 0,
    "variant": "vanilla",
    "latent_dim": 8,
    "lipschitz": {"L": 1.0, "mode": "auto"},
    "gp_lambda": 10.0,
    "gp_points": 0,
    "epochs": 10,
    "batch_size": 64,
    "learning_rate": 0.001,
    "ratio_pairs": 1000,
    "dp": {"clip_norm": 1.0, "noise_multiplier": 1.1, "sampling_rate": 0.01,
           "delta": 1e-5, "learning_rate": 0.05},
    "dataset": {"kind": "mnist", "path": "", "n_train": 9999, "inject_outlier": true,
                "binarize_threshold": 0.5, "toy_components": 4, "toy_hidden": 32},
    "attack": {"metric": "euclidean", "k": 1, "n_synthetic": 10000, "n_members": 1000,
               "n_nonmembers": 1000, "sample_bits": false},
    "budget": {"R_x": 1.0, "delta_z": 0.01, "vol_A": 10.0, "vol_B": 1.0,
               "mc_confidence": 0.95, "mc_samples": 100, "mc_sample_std": 1.0,
               "bound": "general"},
    "generate": {"n": 16},
    "diagnostics": {"index_code_samples": 2000}
  })");
}

absl::StatusOr<ExperimentConfig> ConfigFromJson(const json& doc) {
  json d = DefaultConfigJson();
  if (absl::Status s = Overlay(d, doc, ""); !s.ok()) return s;
  ExperimentConfig c;
  // Parsed text yields unsigned integers; JSON built in code may hold signed ones.
  if (d["seed"].is_number_unsigned() ||
      (d["seed"].is_number_integer() && d["seed"].get<int64_t>() >= 0)) {
    c.seed = d["seed"].get<uint64_t>();
  } else {
    return absl::InvalidArgumentError("seed must be a non-negative integer");
  }
  absl::StatusOr<training::Variant> variant =
      training::ParseVariant(d["variant"].get<std::string>());
  if (!variant.ok()) return variant.status();
  c.variant = *variant;
  c.latent_dim = d["latent_dim"].get<int64_t>();
  c.L = d["lipschitz"]["L"].get<double>();
  c.mode = training::DecoderModeFor(c.variant);
  const std::string mode = d["lipschitz"]["mode"].get<std::string>();
  if (mode != "auto" && mode != nn::LipschitzModeName(c.mode)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "lipschitz.mode '", mode, "' is inconsistent with variant ",
        std::string(training::VariantName(c.variant)), " (which uses '",
        std::string(nn::LipschitzModeName(c.mode)), "')"));
  }
  c.gp_lambda = d["gp_lambda"].get<double>();
  c.gp_points = d["gp_points"].get<int64_t>();
  c.epochs = d["epochs"].get<int64_t>();
  c.batch_size = d["batch_size"].get<int64_t>();
  c.learning_rate = d["learning_rate"].get<double>();
  c.ratio_pairs = d["ratio_pairs"].get<int64_t>();

  const json& dp = d["dp"];
  c.dp.clip_norm = dp["clip_norm"].get<double>();
  c.dp.noise_multiplier = dp["noise_multiplier"].get<double>();
  c.dp.sampling_rate = dp["sampling_rate"].get<double>();
  c.dp.delta = dp["delta"].get<double>();
  c.dp.learning_rate = dp["learning_rate"].get<double>();

  const json& ds = d["dataset"];
  c.dataset.kind = ds["kind"].get<std::string>();
  c.dataset.path = ds["path"].get<std::string>();
  c.dataset.n_train = ds["n_train"].get<int64_t>();
  c.dataset.inject_outlier = ds["inject_outlier"].get<bool>();
  c.dataset.binarize_threshold = ds["binarize_threshold"].get<double>();
  c.dataset.toy_components = ds["toy_components"].get<int>();
  c.dataset.toy_hidden = ds["toy_hidden"].get<int64_t>();
  if (c.dataset.kind == "mnist" && c.dataset.path.empty()) {
    if (const char* env = std::getenv("LVAE_DATA_DIR"); env != nullptr) c.dataset.path = env;
  }

  const json& at = d["attack"];
  absl::StatusOr<mia::Metric> metric = mia::ParseMetric(at["metric"].get<std::string>());
  if (!metric.ok()) return metric.status();
  c.attack.metric = *metric;
  c.attack.k = at["k"].get<int>();
  c.attack.n_synthetic = at["n_synthetic"].get<int64_t>();
  c.attack.n_members = at["n_members"].get<int64_t>();
  c.attack.n_nonmembers = at["n_nonmembers"].get<int64_t>();
  c.attack.sample_bits = at["sample_bits"].get<bool>();

  const json& b = d["budget"];
  c.budget.R_x = b["R_x"].get<double>();
  c.budget.delta_z = b["delta_z"].get<double>();
  c.budget.vol_A = b["vol_A"].get<double>();
  c.budget.vol_B = b["vol_B"].get<double>();
  c.budget.mc_confidence = b["mc_confidence"].get<double>();
  c.budget.mc_samples = b["mc_samples"].get<int64_t>();
  c.budget.mc_sample_std = b["mc_sample_std"].get<double>();
  const std::string bound = b["bound"].get<std::string>();
  if (bound == "general") {
    c.budget.bound = privacy::BoundVariant::kGeneral;
  } else if (bound == "on_manifold") {
    c.budget.bound = privacy::BoundVariant::kOnManifold;
  } else {
    return absl::InvalidArgumentError("budget.bound must be general or on_manifold");
  }
  c.generate_n = d["generate"]["n"].get<int64_t>();
  c.index_code_samples = d["diagnostics"]["index_code_samples"].get<int64_t>();

  for (absl::Status s : {
           Require(c.latent_dim >= 1, "latent_dim must be >= 1"),
           Require(c.L > 0, "lipschitz.L must be > 0"),
           Require(c.epochs >= 0, "epochs must be >= 0"),
           Require(c.batch_size >= 1, "batch_size must be >= 1"),
           Require(c.learning_rate > 0, "learning_rate must be > 0"),
           Require(c.gp_lambda >= 0, "gp_lambda must be >= 0"),
           Require(c.gp_points >= 0, "gp_points must be >= 0"),
           Require(c.ratio_pairs >= 0, "ratio_pairs must be >= 0"),
           Require(c.dataset.kind == "mnist" || c.dataset.kind == "toy",
                   "dataset.kind must be mnist or toy"),
           Require(c.dataset.n_train >= 1, "dataset.n_train must be >= 1"),
           Require(c.dataset.toy_components >= 1, "dataset.toy_components must be >= 1"),
           Require(c.dataset.toy_hidden >= 1, "dataset.toy_hidden must be >= 1"),
           Require(c.attack.k >= 1, "attack.k must be >= 1"),
           Require(c.attack.n_synthetic >= 1, "attack.n_synthetic must be >= 1"),
           Require(c.attack.n_members >= 1 && c.attack.n_nonmembers >= 1,
                   "attack.n_members and attack.n_nonmembers must be >= 1"),
           Require(c.generate_n >= 0, "generate.n must be >= 0"),
           Require(c.index_code_samples >= 0, "diagnostics.index_code_samples must be >= 0"),
       }) {
    if (!s.ok()) return s;
  }
  return c;
}

json ConfigToJson(const ExperimentConfig& c) {
  json d = DefaultConfigJson();
  d["seed"] = c.seed;
  d["variant"] = std::string(training::VariantName(c.variant));
  d["latent_dim"] = c.latent_dim;
  d["lipschitz"] = {{"L", c.L}, {"mode", std::string(nn::LipschitzModeName(c.mode))}};
  d["gp_lambda"] = c.gp_lambda;
  d["gp_points"] = c.gp_points;
  d["epochs"] = c.epochs;
  d["batch_size"] = c.batch_size;
  d["learning_rate"] = c.learning_rate;
  d["ratio_pairs"] = c.ratio_pairs;
  d["dp"] = {{"clip_norm", c.dp.clip_norm},
             {"noise_multiplier", c.dp.noise_multiplier},
             {"sampling_rate", c.dp.sampling_rate},
             {"delta", c.dp.delta},
             {"learning_rate", c.dp.learning_rate}};
  d["dataset"] = {{"kind", c.dataset.kind},
                  {"path", c.dataset.path},
                  {"n_train", c.dataset.n_train},
                  {"inject_outlier", c.dataset.inject_outlier},
                  {"binarize_threshold", c.dataset.binarize_threshold},
                  {"toy_components", c.dataset.toy_components},
                  {"toy_hidden", c.dataset.toy_hidden}};
  d["attack"] = {{"metric", std::string(mia::MetricName(c.attack.metric))},
                 {"k", c.attack.k},
                 {"n_synthetic", c.attack.n_synthetic},
                 {"n_members", c.attack.n_members},
                 {"n_nonmembers", c.attack.n_nonmembers},
                 {"sample_bits", c.attack.sample_bits}};
  d["budget"] = {{"R_x", c.budget.R_x},
                 {"delta_z", c.budget.delta_z},
                 {"vol_A", c.budget.vol_A},
                 {"vol_B", c.budget.vol_B},
                 {"mc_confidence", c.budget.mc_confidence},
                 {"mc_samples", c.budget.mc_samples},
                 {"mc_sample_std", c.budget.mc_sample_std},
                 {"bound", c.budget.bound == privacy::BoundVariant::kGeneral ? "general"
                                                                             : "on_manifold"}};
  d["generate"] = {{"n", c.generate_n}};
  d["diagnostics"] = {{"index_code_samples", c.index_code_samples}};
  return d;
}

absl::Status ApplyOverride(json& doc, std::string_view assignment) {
  const size_t eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    return absl::InvalidArgumentError(
        absl::StrCat("override '", std::string(assignment), "' is not key=value"));
  }
  const std::string text(assignment.substr(eq + 1));
  json value = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (value.is_discarded()) value = text;
  json* node = &doc;
  const std::vector<std::string> keys = absl::StrSplit(std::string(assignment.substr(0, eq)), '.');
  for (size_t i = 0; i + 1 < keys.size(); ++i) {
    json& child = (*node)[keys[i]];
    if (child.is_null()) child = json::object();
    if (!child.is_object()) {
      return absl::InvalidArgumentError(
          absl::StrCat("override path '", keys[i], "' is not an object"));
    }
    node = &child;
  }
  (*node)[keys.back()] = std::move(value);
  return absl::OkStatus();
}

absl::StatusOr<ExperimentConfig> ResolveConfig(const std::optional<std::string>& path,
                                               const std::vector<std::string>& overrides,
                                               std::optional<uint64_t> seed) {
  json doc = json::object();
  if (path.has_value()) {
    std::ifstream in(*path);
    if (!in) return absl::NotFoundError(absl::StrCat("cannot open config ", *path));
    std::stringstream buffer;
    buffer << in.rdbuf();
    doc = json::parse(buffer.str(), nullptr, /*allow_exceptions=*/false);
    if (doc.is_discarded()) {
      return absl::InvalidArgumentError(absl::StrCat(*path, ": invalid JSON"));
    }
  }
  for (const std::string& o : overrides) {
    if (absl::Status s = ApplyOverride(doc, o); !s.ok()) return s;
  }
  if (seed.has_value()) doc["seed"] = *seed;
  return ConfigFromJson(doc);
}

training::TrainConfig ToTrainConfig(const ExperimentConfig& c) {
  training::TrainConfig t;
  t.variant = c.variant;
  t.epochs = c.epochs;
  t.batch_size = c.batch_size;
  t.adam.lr = c.learning_rate;
  t.gp_lambda = c.gp_lambda;
  t.gp_points = c.gp_points;
  t.dp = c.dp;
  t.ratio_pairs = c.ratio_pairs;
  return t;
}

}  // namespace lvae::experiment
