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

#include "lvae/training/train.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "lvae/privacy/privacy_math.h"
#include "lvae/tensor/tape.h"
#include "lvae/vae/diagnostics.h"
#include "lvae/vae/objectives.h"

namespace lvae::training {
namespace {

Tensor GatherRows(const Tensor& x, std::span<const int64_t> ids) {
  Shape shape = x.shape();
  const int64_t row = x.size() / shape[0];
  shape[0] = static_cast<int64_t>(ids.size());
  Tensor out(shape);
  for (size_t r = 0; r < ids.size(); ++r) {
    std::copy_n(x.data() + ids[r] * row, row, out.data() + r * row);
  }
  return out;
}

std::vector<Var> Flatten(const vae::BoundParams& p) {
  std::vector<Var> all = p.encoder;
  all.insert(all.end(), p.decoder.begin(), p.decoder.end());
  return all;
}

std::vector<Tensor> Values(const std::vector<Var>& vars) {
  std::vector<Tensor> out;
  out.reserve(vars.size());
  for (const Var& v : vars) out.push_back(v.value());
  return out;
}

// Running sums of the loss terms.
struct LossSums {
  double recon = 0.0, kl = 0.0, penalty = 0.0, total = 0.0;
  int64_t count = 0;

  void Add(const vae::ElboReport& r) {
    recon += r.recon;
    kl += r.kl;
    penalty += r.penalty;
    total += r.total;
    ++count;
  }
  void WriteMeans(EpochRecord& record) const {
    const double n = count > 0 ? static_cast<double>(count) : kNotMeasured;
    record.recon = recon / n;
    record.kl = kl / n;
    record.penalty = penalty / n;
    record.total = total / n;
  }
};

std::string Num(double v) { return absl::StrFormat("%.17g", v); }

}  // namespace

std::string_view VariantName(Variant variant) {
  switch (variant) {
    case Variant::kVanilla:
      return "vanilla";
    case Variant::kDpSgd:
      return "dpsgd";
    case Variant::kLvaeGp:
      return "lvae-gp";
    case Variant::kLvaeSn:
      return "lvae-sn";
  }
  return "?";
}

absl::StatusOr<Variant> ParseVariant(std::string_view name) {
  for (Variant v : {Variant::kVanilla, Variant::kDpSgd, Variant::kLvaeGp, Variant::kLvaeSn}) {
    if (name == VariantName(v)) return v;
  }
  return absl::InvalidArgumentError(absl::StrCat(
      "unknown variant '", std::string(name), "' (expected vanilla, dpsgd, lvae-gp or lvae-sn)"));
}

nn::LipschitzMode DecoderModeFor(Variant variant) {
  switch (variant) {
    case Variant::kLvaeGp:
      return nn::LipschitzMode::kGradientPenalty;
    case Variant::kLvaeSn:
      return nn::LipschitzMode::kSpectralNorm;
    default:
      return nn::LipschitzMode::kNone;
  }
}

std::string HistoryCsv(const TrainHistory& history) {
  std::string out = "epoch,steps,recon,kl,penalty,total,lipschitz_ratio,eps_spent\n";
  for (const EpochRecord& r : history.epochs) {
    absl::StrAppend(&out, r.epoch, ",", r.steps, ",", Num(r.recon), ",", Num(r.kl), ",",
                    Num(r.penalty), ",", Num(r.total), ",", Num(r.lipschitz_ratio), ",",
                    Num(r.eps_spent), "\n");
  }
  return out;
}

std::string WallTimeCsv(const TrainHistory& history) {
  std::string out = "epoch,wall_seconds\n";
  for (const EpochRecord& r : history.epochs) {
    absl::StrAppend(&out, r.epoch, ",", Num(r.wall_seconds), "\n");
  }
  return out;
}

Trainer::Trainer(vae::VaeModel* model, const TrainConfig& config, uint64_t seed,
                 int64_t dataset_size)
    : model_(model), config_(config), seed_(seed), dataset_size_(dataset_size) {
  const std::vector<Tensor*> params = Parameters();
  adam_ = InitAdam(std::vector<const Tensor*>(params.begin(), params.end()), config.adam);
}

absl::StatusOr<Trainer> Trainer::Create(vae::VaeModel* model, const TrainConfig& config,
                                        uint64_t seed, int64_t dataset_size) {
  if (model == nullptr) return absl::InvalidArgumentError("no model");
  if (config.epochs < 0) return absl::InvalidArgumentError("epochs must be >= 0");
  if (config.batch_size < 1) return absl::InvalidArgumentError("batch_size must be >= 1");
  if (dataset_size < 1) return absl::InvalidArgumentError("empty training set");
  if (!(config.adam.lr > 0)) return absl::InvalidArgumentError("learning_rate must be > 0");
  if (config.ratio_pairs < 0) return absl::InvalidArgumentError("ratio_pairs must be >= 0");
  const nn::LipschitzMode want = DecoderModeFor(config.variant);
  if (model->decoder.mode() != want) {
    return absl::InvalidArgumentError(absl::StrCat(
        "variant ", std::string(VariantName(config.variant)), " needs a decoder in mode ",
        std::string(nn::LipschitzModeName(want)), ", got ",
        std::string(nn::LipschitzModeName(model->decoder.mode()))));
  }
  if (want != nn::LipschitzMode::kNone && !(model->decoder.L() > 0)) {
    return absl::InvalidArgumentError("Lipschitz variants need L > 0");
  }
  if (config.variant == Variant::kLvaeGp) {
    if (!(config.gp_lambda > 0)) return absl::InvalidArgumentError("lvae-gp needs gp_lambda > 0");
    if (config.gp_points < 0) return absl::InvalidArgumentError("gp_points must be >= 0");
  }
  if (config.variant == Variant::kDpSgd) {
    if (absl::Status s = config.dp.Validate(dataset_size); !s.ok()) return s;
  }
  return Trainer(model, config, seed, dataset_size);
}

std::vector<Tensor*> Trainer::Parameters() {
  std::vector<Tensor*> params = model_->encoder.MutableParameters();
  for (Tensor* p : model_->decoder.MutableParameters()) params.push_back(p);
  return params;
}

absl::Status Trainer::Restore(AdamState adam, TrainHistory history, int64_t total_steps) {
  if (adam.m.size() != adam_.m.size() || adam.v.size() != adam_.v.size()) {
    return absl::InvalidArgumentError("optimizer state does not match the model");
  }
  for (size_t i = 0; i < adam.m.size(); ++i) {
    if (adam.m[i].shape() != adam_.m[i].shape() || adam.v[i].shape() != adam_.v[i].shape()) {
      return absl::InvalidArgumentError(absl::StrCat("optimizer slot ", i, " has the wrong shape"));
    }
  }
  if (total_steps < 0 || adam.step < 0) return absl::InvalidArgumentError("negative step count");
  adam_ = std::move(adam);
  history_ = std::move(history);
  total_steps_ = total_steps;
  return absl::OkStatus();
}

void Trainer::AdamEpoch(const Tensor& x, RngStream& epoch_rng, EpochRecord& record) {
  std::vector<int64_t> order(dataset_size_);
  std::iota(order.begin(), order.end(), 0);
  RngStream shuffle = epoch_rng.Fork("shuffle");
  for (int64_t i = dataset_size_ - 1; i > 0; --i) {
    std::swap(order[i], order[shuffle.NextBelow(static_cast<uint64_t>(i + 1))]);
  }
  const double lambda = config_.variant == Variant::kLvaeGp ? config_.gp_lambda : 0.0;
  const vae::GradientPenaltyOptions gp{model_->decoder.L(), config_.gp_points};
  const std::vector<Tensor*> params = Parameters();
  LossSums sums;
  for (int64_t start = 0, step = 0; start < dataset_size_; start += config_.batch_size, ++step) {
    RngStream step_rng = epoch_rng.Fork(absl::StrCat("step", step));
    RngStream power = step_rng.Fork("power");
    model_->decoder.PowerStep(nn::kTrainPowerSteps, power);
    const int64_t end = std::min(dataset_size_, start + config_.batch_size);
    const Tensor batch =
        GatherRows(x, std::span<const int64_t>(order.data() + start, end - start));
    Tape tape;
    const vae::BoundParams bound = vae::Bind(*model_, tape);
    RngStream elbo_rng = step_rng.Fork("elbo");
    const vae::ElboTerms terms = vae::ElboLoss(*model_, bound, tape, batch, lambda, gp, elbo_rng);
    const std::vector<Var> wrt = Flatten(bound);
    const std::vector<Tensor> grads = Values(tape.Grad(terms.total, wrt));
    AdamStep(params, grads, adam_);
    sums.Add(vae::Report(terms));
    ++total_steps_;
  }
  sums.WriteMeans(record);
}

absl::Status Trainer::DpSgdEpoch(const Tensor& x, RngStream& epoch_rng, EpochRecord& record) {
  const DpSgdConfig& dp = config_.dp;
  const int64_t steps = std::max<int64_t>(1, std::llround(1.0 / dp.sampling_rate));
  const std::vector<Tensor*> params = Parameters();
  std::vector<Shape> shapes;
  for (const Tensor* p : params) shapes.push_back(p->shape());
  const vae::GradientPenaltyOptions no_gp{};
  LossSums sums;
  for (int64_t step = 0; step < steps; ++step) {
    RngStream step_rng = epoch_rng.Fork(absl::StrCat("step", step));
    RngStream sample_rng = step_rng.Fork("sample");
    const std::vector<int64_t> ids = PoissonSample(dataset_size_, dp.sampling_rate, sample_rng);
    std::vector<GradientList> per_example;
    per_example.reserve(ids.size());
    for (size_t j = 0; j < ids.size(); ++j) {
      const Tensor row = GatherRows(x, std::span<const int64_t>(&ids[j], 1));
      Tape tape;
      const vae::BoundParams bound = vae::Bind(*model_, tape);
      RngStream example_rng = step_rng.Fork(absl::StrCat("example", j));
      const vae::ElboTerms terms =
          vae::ElboLoss(*model_, bound, tape, row, 0.0, no_gp, example_rng);
      const std::vector<Var> wrt = Flatten(bound);
      per_example.push_back(Values(tape.Grad(terms.total, wrt)));
      sums.Add(vae::Report(terms));
    }
    RngStream noise_rng = step_rng.Fork("noise");
    absl::StatusOr<GradientList> noisy =
        DpSgdStep(per_example, shapes, dp, dataset_size_, noise_rng);
    if (!noisy.ok()) return noisy.status();
    SgdStep(params, *noisy, dp.learning_rate);
    ++total_steps_;
  }
  sums.WriteMeans(record);
  if (dp.noise_multiplier == 0) {
    record.eps_spent = std::numeric_limits<double>::infinity();
  } else {
    absl::StatusOr<double> eps =
        privacy::DpsgdBudget(dp.sampling_rate, dp.noise_multiplier, total_steps_, dp.delta);
    record.eps_spent = eps.ok() ? *eps : std::numeric_limits<double>::infinity();
  }
  return absl::OkStatus();
}

absl::StatusOr<EpochRecord> Trainer::RunEpoch(const Tensor& x) {
  if (x.rank() == 0 || x.dim(0) != dataset_size_ ||
      x.size() / dataset_size_ != NumElements(model_->encoder.input_shape())) {
    return absl::InvalidArgumentError(absl::StrCat("training data must have ", dataset_size_,
                                                   " rows of ",
                                                   NumElements(model_->encoder.input_shape()),
                                                   " values"));
  }
  const auto start = std::chrono::steady_clock::now();
  EpochRecord record;
  record.epoch = epochs_done() + 1;
  RngStream epoch_rng = RngStream(seed_, "train").Fork(absl::StrCat("epoch", record.epoch));
  try {
    if (config_.variant == Variant::kDpSgd) {
      if (absl::Status s = DpSgdEpoch(x, epoch_rng, record); !s.ok()) return s;
    } else {
      AdamEpoch(x, epoch_rng, record);
    }
    // Refined spectral estimates for the spot check and any export.
    RngStream refine = epoch_rng.Fork("refine");
    model_->decoder.PowerStep(nn::kEvalPowerSteps, refine);
    if (config_.ratio_pairs > 0) {
      RngStream ratio_rng = epoch_rng.Fork("ratio");
      const nn::Network& decoder = model_->decoder;
      record.lipschitz_ratio =
          vae::LipschitzRatio([&decoder](const Tensor& z) { return decoder.Forward(z); },
                              model_->latent_dim, config_.ratio_pairs, ratio_rng);
    }
  } catch (const TensorError& e) {
    return absl::InternalError(absl::StrCat("training failed: ", e.what()));
  }
  record.steps = total_steps_;
  record.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  history_.epochs.push_back(record);
  return record;
}

absl::StatusOr<TrainHistory> Train(vae::VaeModel& model, const Tensor& x,
                                   const TrainConfig& config, uint64_t seed,
                                   const EpochCallback& on_epoch) {
  const int64_t n = x.rank() == 0 ? 0 : x.dim(0);
  absl::StatusOr<Trainer> trainer = Trainer::Create(&model, config, seed, n);
  if (!trainer.ok()) return trainer.status();
  for (int64_t e = 0; e < config.epochs; ++e) {
    absl::StatusOr<EpochRecord> record = trainer->RunEpoch(x);
    if (!record.ok()) return record.status();
    if (on_epoch) on_epoch(*record, model);
  }
  return trainer->history();
}

}  // namespace lvae::training
