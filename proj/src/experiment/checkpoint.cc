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

#include "lvae/experiment/checkpoint.h"

#include <bit>
#include <cstdlib>
#include <map>
#include <utility>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "lvae/data/idx.h"
#include "lvae/experiment/outputs.h"
#include "lvae/experiment/setup.h"

namespace lvae::experiment {
namespace {

using nlohmann::json;

constexpr std::string_view kMagic = "LVAE";

void PutU32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void PutU64(std::string& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void PutString64(std::string& out, std::string_view s) {
  PutU64(out, s.size());
  out.append(s);
}
void PutBlob(std::string& out, const std::string& name, const Tensor& t) {
  PutU32(out, static_cast<uint32_t>(name.size()));
  out.append(name);
  PutU32(out, static_cast<uint32_t>(t.rank()));
  for (int64_t d : t.shape()) PutU64(out, static_cast<uint64_t>(d));
  for (double v : t.values()) PutU64(out, std::bit_cast<uint64_t>(v));
}

// Bounds-checked little-endian reader.
class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  bool U32(uint32_t& v) {
    if (!Has(4)) return false;
    v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(Byte(pos_ + i)) << (8 * i);
    pos_ += 4;
    return true;
  }
  bool U64(uint64_t& v) {
    if (!Has(8)) return false;
    v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(Byte(pos_ + i)) << (8 * i);
    pos_ += 8;
    return true;
  }
  bool Bytes(uint64_t n, std::string_view& out) {
    if (!Has(n)) return false;
    out = bytes_.substr(pos_, n);
    pos_ += n;
    return true;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  bool Has(uint64_t n) const { return n <= bytes_.size() - pos_; }
  uint8_t Byte(size_t i) const { return static_cast<uint8_t>(bytes_[i]); }

  std::string_view bytes_;
  size_t pos_ = 0;
};

absl::Status Truncated() { return absl::DataLossError("checkpoint is truncated"); }

std::string Num(double v) { return absl::StrFormat("%.17g", v); }
double ParseNum(const json& v) { return std::strtod(v.get<std::string>().c_str(), nullptr); }

json HistoryJson(const training::TrainHistory& history) {
  json out = json::array();
  for (const training::EpochRecord& r : history.epochs) {
    out.push_back({{"epoch", r.epoch},
                   {"steps", r.steps},
                   {"recon", Num(r.recon)},
                   {"kl", Num(r.kl)},
                   {"penalty", Num(r.penalty)},
                   {"total", Num(r.total)},
                   {"lipschitz_ratio", Num(r.lipschitz_ratio)},
                   {"eps_spent", Num(r.eps_spent)}});
  }
  return out;
}

training::TrainHistory HistoryFromJson(const json& doc) {
  training::TrainHistory history;
  for (const json& r : doc) {
    training::EpochRecord e;
    e.epoch = r.at("epoch").get<int64_t>();
    e.steps = r.at("steps").get<int64_t>();
    e.recon = ParseNum(r.at("recon"));
    e.kl = ParseNum(r.at("kl"));
    e.penalty = ParseNum(r.at("penalty"));
    e.total = ParseNum(r.at("total"));
    e.lipschitz_ratio = ParseNum(r.at("lipschitz_ratio"));
    e.eps_spent = ParseNum(r.at("eps_spent"));
    history.epochs.push_back(e);
  }
  return history;
}

std::vector<std::string> ParameterNames(const vae::VaeModel& model) {
  std::vector<std::string> names = model.encoder.ParameterNames("encoder");
  for (std::string& n : model.decoder.ParameterNames("decoder")) names.push_back(std::move(n));
  return names;
}

std::vector<Tensor*> MutableParameters(vae::VaeModel& model) {
  std::vector<Tensor*> out = model.encoder.MutableParameters();
  for (Tensor* t : model.decoder.MutableParameters()) out.push_back(t);
  return out;
}

}  // namespace

std::string SerializeCheckpoint(const Checkpoint& c) {
  const vae::VaeModel& m = c.model;
  json spectral = json::array();
  for (const nn::Layer& layer : m.decoder.layers()) {
    spectral.push_back(layer.spectral_state().has_value()
                           ? json(layer.spectral_state()->iterations)
                           : json(nullptr));
  }
  json rng = json::array();
  for (const RngState& s : c.rng_states) {
    rng.push_back({{"name", s.name}, {"seed", s.seed}, {"label", s.label}, {"counter", s.counter}});
  }
  const json meta = {
      {"variant", std::string(training::VariantName(c.config.variant))},
      {"latent_dim", m.latent_dim},
      {"L", m.decoder.L()},
      {"mode", std::string(nn::LipschitzModeName(m.decoder.mode()))},
      {"likelihood", std::string(vae::LikelihoodName(m.likelihood))},
      {"data_shape", m.data_shape()},
      {"total_steps", c.total_steps},
      {"adam",
       {{"step", c.adam.step},
        {"lr", c.adam.config.lr},
        {"beta1", c.adam.config.beta1},
        {"beta2", c.adam.config.beta2},
        {"eps", c.adam.config.eps}}},
      {"spectral_iterations", spectral},
      {"rng", rng},
      {"history", HistoryJson(c.history)},
  };

  std::string out(kMagic);
  PutU32(out, kCheckpointVersion);
  PutString64(out, meta.dump());
  PutString64(out, ConfigToJson(c.config).dump());

  const std::vector<std::string> names = ParameterNames(m);
  std::vector<const Tensor*> params = m.encoder.Parameters();
  for (const Tensor* t : m.decoder.Parameters()) params.push_back(t);
  std::vector<std::pair<std::string, const Tensor*>> blobs;
  for (size_t i = 0; i < params.size(); ++i) blobs.push_back({names[i], params[i]});
  for (size_t i = 0; i < m.decoder.layers().size(); ++i) {
    const auto& state = m.decoder.layers()[i].spectral_state();
    if (state.has_value()) blobs.push_back({absl::StrCat("decoder.", i, ".u"), &state->u});
  }
  // A checkpoint without optimizer state stores zero moments.
  const training::AdamState adam =
      c.adam.m.size() == params.size() ? c.adam : training::InitAdam(params, c.adam.config);
  for (size_t i = 0; i < params.size(); ++i) {
    blobs.push_back({"adam.m." + names[i], &adam.m[i]});
    blobs.push_back({"adam.v." + names[i], &adam.v[i]});
  }
  PutU64(out, blobs.size());
  for (const auto& [name, tensor] : blobs) PutBlob(out, name, *tensor);
  return out;
}

absl::StatusOr<Checkpoint> ParseCheckpoint(std::string_view bytes) {
  Reader r(bytes);
  std::string_view magic;
  if (!r.Bytes(4, magic) || magic != kMagic) {
    return absl::DataLossError("not an LVAE checkpoint (bad magic)");
  }
  uint32_t version = 0;
  if (!r.U32(version)) return Truncated();
  if (version != kCheckpointVersion) {
    return absl::FailedPreconditionError(
        absl::StrCat("checkpoint format version ", version,
                     " is not supported (this build reads version ", kCheckpointVersion, ")"));
  }
  uint64_t n = 0;
  std::string_view meta_text, config_text;
  if (!r.U64(n) || !r.Bytes(n, meta_text) || !r.U64(n) || !r.Bytes(n, config_text)) {
    return Truncated();
  }
  const json meta = json::parse(meta_text, nullptr, /*allow_exceptions=*/false);
  const json config_doc = json::parse(config_text, nullptr, /*allow_exceptions=*/false);
  if (meta.is_discarded() || config_doc.is_discarded() || !meta.is_object()) {
    return absl::DataLossError("checkpoint metadata is not valid JSON");
  }

  Checkpoint c;
  absl::StatusOr<ExperimentConfig> config = ConfigFromJson(config_doc);
  if (!config.ok()) return config.status();
  c.config = *config;
  absl::StatusOr<vae::VaeModel> model = BuildModel(c.config);
  if (!model.ok()) return model.status();
  c.model = std::move(*model);
  vae::VaeModel& m = c.model;

  try {
    if (meta.at("variant").get<std::string>() != training::VariantName(c.config.variant) ||
        meta.at("latent_dim").get<int64_t>() != m.latent_dim ||
        meta.at("L").get<double>() != m.decoder.L() ||
        meta.at("mode").get<std::string>() != nn::LipschitzModeName(m.decoder.mode()) ||
        meta.at("likelihood").get<std::string>() != vae::LikelihoodName(m.likelihood)) {
      return absl::InvalidArgumentError("checkpoint metadata disagrees with its config");
    }
    c.total_steps = meta.at("total_steps").get<int64_t>();
    const json& adam = meta.at("adam");
    c.adam.step = adam.at("step").get<int64_t>();
    c.adam.config = {adam.at("lr").get<double>(), adam.at("beta1").get<double>(),
                     adam.at("beta2").get<double>(), adam.at("eps").get<double>()};
    for (const json& s : meta.at("rng")) {
      c.rng_states.push_back({s.at("name").get<std::string>(), s.at("seed").get<uint64_t>(),
                              s.at("label").get<std::string>(), s.at("counter").get<uint64_t>()});
    }
    c.history = HistoryFromJson(meta.at("history"));
    const json& spectral = meta.at("spectral_iterations");
    if (spectral.size() != m.decoder.layers().size()) {
      return absl::InvalidArgumentError("spectral state count disagrees with the decoder");
    }
    for (size_t i = 0; i < spectral.size(); ++i) {
      auto& state = m.decoder.mutable_layers()[i].mutable_spectral_state();
      if (state.has_value() != !spectral[i].is_null()) {
        return absl::InvalidArgumentError("spectral state presence disagrees with the decoder");
      }
      if (state.has_value()) state->iterations = spectral[i].get<int64_t>();
    }
  } catch (const json::exception& e) {
    return absl::DataLossError(absl::StrCat("checkpoint metadata: ", e.what()));
  }

  uint64_t count = 0;
  if (!r.U64(count)) return Truncated();
  std::map<std::string, Tensor> blobs;
  for (uint64_t b = 0; b < count; ++b) {
    uint32_t name_len = 0, rank = 0;
    std::string_view name;
    if (!r.U32(name_len) || !r.Bytes(name_len, name) || !r.U32(rank)) return Truncated();
    if (rank > 8) return absl::DataLossError("blob rank out of range");
    Shape shape(rank);
    uint64_t size = 1;
    for (uint32_t k = 0; k < rank; ++k) {
      uint64_t d = 0;
      if (!r.U64(d)) return Truncated();
      if (d > (uint64_t{1} << 32)) return absl::DataLossError("blob extent out of range");
      shape[k] = static_cast<int64_t>(d);
      size *= d;
    }
    if (size > bytes.size() / 8) return Truncated();
    std::vector<double> values(size);
    for (double& v : values) {
      uint64_t bits = 0;
      if (!r.U64(bits)) return Truncated();
      v = std::bit_cast<double>(bits);
    }
    if (!blobs.emplace(std::string(name), Tensor(std::move(shape), std::move(values))).second) {
      return absl::DataLossError(absl::StrCat("duplicate blob '", std::string(name), "'"));
    }
  }
  if (!r.done()) return absl::DataLossError("trailing bytes after the last blob");

  auto take = [&blobs](const std::string& name, Tensor& dst) -> absl::Status {
    auto it = blobs.find(name);
    if (it == blobs.end()) return absl::InvalidArgumentError("missing blob '" + name + "'");
    if (it->second.shape() != dst.shape()) {
      return absl::InvalidArgumentError("blob '" + name + "' has the wrong shape");
    }
    dst = std::move(it->second);
    blobs.erase(it);
    return absl::OkStatus();
  };
  const std::vector<std::string> names = ParameterNames(m);
  const std::vector<Tensor*> params = MutableParameters(m);
  for (size_t i = 0; i < params.size(); ++i) {
    if (absl::Status s = take(names[i], *params[i]); !s.ok()) return s;
  }
  for (size_t i = 0; i < m.decoder.layers().size(); ++i) {
    auto& state = m.decoder.mutable_layers()[i].mutable_spectral_state();
    if (!state.has_value()) continue;
    if (absl::Status s = take(absl::StrCat("decoder.", i, ".u"), state->u); !s.ok()) return s;
  }
  std::vector<const Tensor*> const_params(params.begin(), params.end());
  const training::AdamConfig adam_config = c.adam.config;
  const int64_t adam_step = c.adam.step;
  c.adam = training::InitAdam(const_params, adam_config);
  c.adam.step = adam_step;
  for (size_t i = 0; i < params.size(); ++i) {
    if (absl::Status s = take("adam.m." + names[i], c.adam.m[i]); !s.ok()) return s;
    if (absl::Status s = take("adam.v." + names[i], c.adam.v[i]); !s.ok()) return s;
  }
  if (!blobs.empty()) {
    return absl::InvalidArgumentError("unexpected blob '" + blobs.begin()->first + "'");
  }
  return c;
}

absl::Status SaveCheckpoint(const Checkpoint& checkpoint, const std::string& path) {
  return WriteFile(path, SerializeCheckpoint(checkpoint));
}

absl::StatusOr<Checkpoint> LoadCheckpoint(const std::string& path) {
  absl::StatusOr<std::string> bytes = data::ReadFileBytes(path);
  if (!bytes.ok()) return bytes.status();
  return ParseCheckpoint(*bytes);
}

}  // namespace lvae::experiment
