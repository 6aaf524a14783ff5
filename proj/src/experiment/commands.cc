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

#include "lvae/experiment/commands.h"

#include <cmath>
#include <filesystem>
#include <vector>

#include "CLI11.hpp"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "lvae/data/dataset.h"
#include "lvae/data/idx.h"
#include "lvae/experiment/checkpoint.h"
#include "lvae/experiment/outputs.h"
#include "lvae/experiment/setup.h"
#include "lvae/mia/attack.h"
#include "lvae/privacy/privacy_math.h"
#include "lvae/tensor/tape.h"
#include "lvae/training/train.h"
#include "lvae/vae/diagnostics.h"
#include "lvae/vae/objectives.h"

namespace lvae::experiment {
namespace {

constexpr int kCurvePoints = 1001;

std::string Num(double v) { return absl::StrFormat("%.17g", v); }

std::string Join(const std::string& dir, const std::string& file) {
  return (std::filesystem::path(dir) / file).string();
}

absl::Status MakeDir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    return absl::PermissionDeniedError(absl::StrCat("cannot create ", dir, ": ", ec.message()));
  }
  return absl::OkStatus();
}

// Rows of `a` followed by rows of `b`, flattened to [n, D].
Tensor StackRows(const Tensor& a, const Tensor& b) {
  const int64_t d = a.size() / a.dim(0);
  std::vector<double> values(a.values().begin(), a.values().end());
  values.insert(values.end(), b.values().begin(), b.values().end());
  return Tensor({a.dim(0) + b.dim(0), d}, std::move(values));
}

std::string DiagnosticsCsv(const ExperimentConfig& config, const vae::VaeModel& model,
                           const data::Dataset& train) {
  std::string out = "metric,value\n";
  absl::StrAppend(&out, "n_train,", train.size(), "\n");
  if (train.outlier_index >= 0 && model.likelihood == vae::Likelihood::kBernoulli) {
    const Tensor row = data::GatherRows(train.x, {train.outlier_index});
    absl::StrAppend(&out, "outlier_bce_per_pixel,", Num(ReconstructionBcePerPixel(model, row)),
                    "\n");
  }
  if (config.index_code_samples >= 2 && train.size() >= 2) {
    RngStream rng(config.seed, "diagnostics");
    const vae::IndexCodeReport r =
        vae::IndexCodeTerms(model, train.x, config.index_code_samples, rng);
    absl::StrAppend(&out, "log_n,", Num(r.log_n), "\n", "cond_entropy,", Num(r.cond_entropy),
                    "\n", "cond_entropy_se,", Num(r.cond_entropy_se), "\n", "mutual_info,",
                    Num(r.mutual_info), "\n", "mutual_info_direct,", Num(r.mutual_info_direct),
                    "\n", "avg_pointwise_kl,", Num(r.avg_pointwise_kl), "\n",
                    "kl_avg_to_prior,", Num(r.kl_avg_to_prior), "\n");
  }
  return out;
}

// Equal up to the epoch count.
bool SameRun(const ExperimentConfig& a, const ExperimentConfig& b) {
  nlohmann::json ja = ConfigToJson(a), jb = ConfigToJson(b);
  ja.erase("epochs");
  jb.erase("epochs");
  return ja == jb;
}

}  // namespace

double ReconstructionBcePerPixel(const vae::VaeModel& model, const Tensor& row) {
  NoGradGuard no_grad;
  const vae::BoundParams p = vae::Constants(model);
  const vae::EncoderOutput enc = vae::Encode(model, Var::Constant(row), p.encoder);
  const Var logits = vae::Decode(model, enc.mu, p.decoder);
  const Var nll = vae::ReconNllBernoulli(row, logits);
  return nll.value()[0] / static_cast<double>(NumElements(model.data_shape()));
}

absl::Status CmdTrain(const ExperimentConfig& config, const std::string& out_dir, std::ostream& out,
                      const std::optional<std::string>& resume) {
  if (absl::Status s = MakeDir(out_dir); !s.ok()) return s;
  if (absl::Status s = WriteFile(Join(out_dir, "config.json"), ConfigToJson(config).dump(2) + "\n");
      !s.ok()) {
    return s;
  }
  absl::StatusOr<data::Dataset> train = LoadTrainingSet(config);
  if (!train.ok()) return train.status();

  Checkpoint ckpt;
  ckpt.config = config;
  if (resume.has_value()) {
    absl::StatusOr<Checkpoint> loaded = LoadCheckpoint(*resume);
    if (!loaded.ok()) return loaded.status();
    if (!SameRun(loaded->config, config)) {
      return absl::InvalidArgumentError(
          "resumed checkpoint was trained with a different config (only epochs may change)");
    }
    ckpt.model = std::move(loaded->model);
    ckpt.adam = std::move(loaded->adam);
    ckpt.history = std::move(loaded->history);
    ckpt.total_steps = loaded->total_steps;
  } else {
    absl::StatusOr<vae::VaeModel> model = BuildModel(config);
    if (!model.ok()) return model.status();
    ckpt.model = std::move(*model);
  }

  absl::StatusOr<training::Trainer> trainer =
      training::Trainer::Create(&ckpt.model, ToTrainConfig(config), config.seed, train->size());
  if (!trainer.ok()) return trainer.status();
  if (resume.has_value()) {
    if (absl::Status s = trainer->Restore(ckpt.adam, ckpt.history, ckpt.total_steps); !s.ok()) {
      return s;
    }
  }
  while (trainer->epochs_done() < config.epochs) {
    absl::StatusOr<training::EpochRecord> r = trainer->RunEpoch(train->x);
    if (!r.ok()) return r.status();
    out << absl::StrFormat("epoch %d steps=%d total=%.6f recon=%.6f kl=%.6f penalty=%.6g",
                           r->epoch, r->steps, r->total, r->recon, r->kl, r->penalty);
    if (!std::isnan(r->lipschitz_ratio)) out << absl::StrFormat(" ratio=%.6f", r->lipschitz_ratio);
    if (!std::isnan(r->eps_spent)) out << absl::StrFormat(" eps=%.6f", r->eps_spent);
    out << absl::StrFormat(" (%.1fs)\n", r->wall_seconds);
  }

  ckpt.adam = trainer->adam_state();
  ckpt.history = trainer->history();
  ckpt.total_steps = trainer->total_steps();
  ckpt.rng_states = {{"init", config.seed, "init", 0},
                     {"train", config.seed, "train", 0},
                     {"diagnostics", config.seed, "diagnostics", 0}};
  for (absl::Status s : {
           SaveCheckpoint(ckpt, Join(out_dir, "model.lvae")),
           WriteFile(Join(out_dir, "history.csv"), training::HistoryCsv(ckpt.history)),
           WriteFile(Join(out_dir, "wall_time.csv"), training::WallTimeCsv(trainer->history())),
       }) {
    if (!s.ok()) return s;
  }
  try {
    return WriteFile(Join(out_dir, "diagnostics.csv"), DiagnosticsCsv(config, ckpt.model, *train));
  } catch (const TensorError& e) {
    return absl::InternalError(absl::StrCat("diagnostics failed: ", e.what()));
  }
}

absl::Status CmdGenerate(const std::string& checkpoint, std::optional<int64_t> n,
                         std::optional<uint64_t> seed, const std::string& out_dir,
                         std::ostream& out) {
  absl::StatusOr<Checkpoint> ckpt = LoadCheckpoint(checkpoint);
  if (!ckpt.ok()) return ckpt.status();
  const int64_t count = n.value_or(ckpt->config.generate_n);
  if (count < 0) return absl::InvalidArgumentError("n must be >= 0");
  if (absl::Status s = MakeDir(out_dir); !s.ok()) return s;
  RngStream rng(seed.value_or(ckpt->config.seed), "generate");
  Tensor samples;
  try {
    samples = count == 0 ? Tensor([&] {
      Shape s = ckpt->model.data_shape();
      s.insert(s.begin(), 0);
      return s;
    }())
                         : vae::Generate(ckpt->model, count, rng, ckpt->config.attack.sample_bits);
  } catch (const TensorError& e) {
    return absl::InternalError(absl::StrCat("generation failed: ", e.what()));
  }
  if (absl::Status s = WriteFile(Join(out_dir, "synthetic.csv"), SamplesCsv(samples)); !s.ok()) {
    return s;
  }
  const Shape& shape = ckpt->model.data_shape();
  if (count > 0 && shape.size() == 3 && shape[2] == 1) {
    absl::StatusOr<std::string> pgm = PgmGrid(samples);
    if (!pgm.ok()) return pgm.status();
    if (absl::Status s = WriteFile(Join(out_dir, "samples.pgm"), *pgm); !s.ok()) return s;
  }
  out << "generated " << count << " samples\n";
  return absl::OkStatus();
}

absl::Status CmdAttack(const ExperimentConfig& config, const std::string& synthetic_csv,
                       const std::string& out_dir, std::ostream& out) {
  absl::StatusOr<std::string> text = data::ReadFileBytes(synthetic_csv);
  if (!text.ok()) return text.status();
  absl::StatusOr<Tensor> synthetic = ParseSamplesCsv(*text);
  if (!synthetic.ok()) return synthetic.status();
  absl::StatusOr<data::Dataset> train = LoadTrainingSet(config);
  if (!train.ok()) return train.status();
  absl::StatusOr<data::Dataset> pool = LoadNonmemberPool(config);
  if (!pool.ok()) return pool.status();
  absl::StatusOr<data::MiaSplit> split = data::MakeMiaSplit(
      *train, *pool, config.attack.n_members, config.attack.n_nonmembers, config.seed);
  if (!split.ok()) return split.status();

  const Tensor targets = StackRows(data::GatherRows(train->x, split->members),
                                   data::GatherRows(pool->x, split->nonmembers));
  std::vector<int64_t> ids = split->members;
  ids.insert(ids.end(), split->nonmembers.begin(), split->nonmembers.end());
  std::vector<bool> member(split->members.size(), true);
  member.resize(ids.size(), false);
  absl::StatusOr<std::vector<mia::AttackRecord>> records = mia::McAttackScores(
      targets, ids, member, *synthetic, {config.attack.metric, config.attack.k});
  if (!records.ok()) return records.status();

  if (absl::Status s = MakeDir(out_dir); !s.ok()) return s;
  if (absl::Status s = WriteFile(Join(out_dir, "attack_config.json"),
                                 ConfigToJson(config).dump(2) + "\n");
      !s.ok()) {
    return s;
  }
  if (absl::Status s = WriteFile(Join(out_dir, "scores.csv"), ScoresCsv(*records)); !s.ok()) {
    return s;
  }
  out << "scored " << records->size() << " records against " << synthetic->dim(0)
      << " synthetic samples\n";
  return absl::OkStatus();
}

absl::Status CmdReport(const std::string& scores_csv, std::optional<double> eps, double delta,
                       const std::string& out_dir, std::ostream& out) {
  absl::StatusOr<std::string> text = data::ReadFileBytes(scores_csv);
  if (!text.ok()) return text.status();
  absl::StatusOr<std::vector<mia::AttackRecord>> records = ParseScoresCsv(*text);
  if (!records.ok()) return records.status();
  absl::StatusOr<mia::EmpiricalTradeoff> tradeoff = mia::ComputeTradeoff(*records);
  if (!tradeoff.ok()) return tradeoff.status();

  const privacy::TradeoffCurve staircase = tradeoff->StaircaseCurve(kCurvePoints);
  const privacy::TradeoffCurve envelope = tradeoff->EnvelopeCurve(kCurvePoints);
  std::vector<SvgSeries> series = {
      {"empirical", "#1f77b4", staircase.alpha, staircase.beta},
      {"convex envelope", "#ff7f0e", envelope.alpha, envelope.beta},
  };
  std::optional<mia::BoundViolation> violation;
  if (eps.has_value()) {
    absl::StatusOr<privacy::TradeoffCurve> f = privacy::FEpsDeltaCurve(*eps, delta, kCurvePoints);
    if (!f.ok()) return f.status();
    series.push_back({absl::StrFormat("f_{eps=%g, delta=%g}", *eps, delta), "#2ca02c", f->alpha,
                      f->beta});
    absl::StatusOr<mia::BoundViolation> v = mia::ComputeBoundViolation(
        envelope, *f, tradeoff->n_members, tradeoff->n_nonmembers);
    if (!v.ok()) return v.status();
    violation = *v;
  }
  if (absl::Status s = MakeDir(out_dir); !s.ok()) return s;
  for (absl::Status s : {
           WriteFile(Join(out_dir, "curve.csv"), CurveCsv(*tradeoff, kCurvePoints)),
           WriteFile(Join(out_dir, "curve.svg"), TradeoffSvg(series)),
       }) {
    if (!s.ok()) return s;
  }
  out << "auc=" << Num(mia::AttackAuc(*tradeoff)) << "\n";
  if (violation.has_value()) {
    out << "bound_worst_margin=" << Num(violation->worst_margin) << "\n"
        << "bound_worst_alpha=" << Num(violation->worst_alpha) << "\n"
        << "bound_worst_z=" << Num(violation->worst_z) << "\n";
  }
  return absl::OkStatus();
}

absl::Status CmdBudget(const ExperimentConfig& config, std::ostream& out) {
  const BudgetSettings& b = config.budget;
  absl::StatusOr<double> r_z = privacy::RZ(b.delta_z, static_cast<int>(config.latent_dim));
  if (!r_z.ok()) return r_z.status();
  absl::StatusOr<double> c = privacy::BoundC(b.R_x, config.L, *r_z, b.bound);
  if (!c.ok()) return c.status();
  absl::StatusOr<double> eps = privacy::EncoderEps(*c);
  if (!eps.ok()) return eps.status();
  absl::StatusOr<double> mc = privacy::McErrorTerm(b.mc_samples, b.mc_sample_std, b.mc_confidence);
  if (!mc.ok()) return mc.status();
  absl::StatusOr<privacy::DeltaBarBreakdown> bar =
      privacy::DeltaBar(b.delta_z, *mc, *mc, *eps, b.vol_B, b.vol_A);
  if (!bar.ok()) return bar.status();
  out << "R_z=" << Num(*r_z) << "\n"
      << "C=" << Num(*c) << "\n"
      << "eps_encoder=" << Num(*eps) << "\n"
      << "mc_error=" << Num(*mc) << "\n"
      << "weight_term=" << Num(bar->weight_term) << "\n"
      << "delta_bar=" << Num(bar->delta_bar) << "\n";
  if (config.variant == training::Variant::kDpSgd) {
    const training::DpSgdConfig& dp = config.dp;
    const int64_t steps =
        config.epochs * std::max<int64_t>(1, std::llround(1.0 / dp.sampling_rate));
    absl::StatusOr<double> mu = privacy::DpsgdMu(dp.sampling_rate, dp.noise_multiplier, steps);
    if (!mu.ok()) return mu.status();
    absl::StatusOr<double> dp_eps =
        privacy::DpsgdBudget(dp.sampling_rate, dp.noise_multiplier, steps, dp.delta);
    if (!dp_eps.ok()) return dp_eps.status();
    out << "dpsgd_steps=" << steps << "\n"
        << "dpsgd_mu=" << Num(*mu) << "\n"
        << "dpsgd_delta=" << Num(dp.delta) << "\n"
        << "dpsgd_eps=" << Num(*dp_eps) << "\n";
  }
  return absl::OkStatus();
}

int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Lipschitz VAE experiments"};
  app.require_subcommand(1);

  std::optional<std::string> config_path, resume, checkpoint;
  std::optional<uint64_t> seed;
  std::optional<int64_t> n;
  std::optional<double> eps;
  std::vector<std::string> overrides;
  std::string out_dir, synthetic, scores;
  double delta = 0.0;

  auto add_config = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config file");
    cmd->add_option("--seed", seed, "Overrides the config seed");
    cmd->add_option("--set", overrides, "Config override key.path=value (repeatable)");
  };
  CLI::App* train = app.add_subcommand("train", "Train a model");
  add_config(train);
  train->add_option("--out", out_dir, "Output directory")->required();
  train->add_option("--resume", resume, "Checkpoint to continue from");

  CLI::App* generate = app.add_subcommand("generate", "Sample from a trained model");
  generate->add_option("--checkpoint", checkpoint, "model.lvae from train")->required();
  generate->add_option("--n", n, "Number of samples");
  generate->add_option("--seed", seed, "Sampling seed");
  generate->add_option("--out", out_dir, "Output directory")->required();

  CLI::App* attack = app.add_subcommand("attack", "Monte Carlo membership inference");
  add_config(attack);
  attack->add_option("--synthetic", synthetic, "synthetic.csv from generate")->required();
  attack->add_option("--out", out_dir, "Output directory")->required();

  CLI::App* report = app.add_subcommand("report", "Trade-off curve of attack scores");
  report->add_option("--scores", scores, "scores.csv from attack")->required();
  report->add_option("--eps", eps, "Overlay f_{eps,delta}");
  report->add_option("--delta", delta, "delta of the overlay");
  report->add_option("--out", out_dir, "Output directory")->required();

  CLI::App* budget = app.add_subcommand("budget", "Privacy budget breakdown");
  add_config(budget);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  absl::Status status;
  auto resolved = [&]() { return ResolveConfig(config_path, overrides, seed); };
  if (train->parsed() || attack->parsed() || budget->parsed()) {
    absl::StatusOr<ExperimentConfig> config = resolved();
    if (!config.ok()) {
      err << "config error: " << config.status().message() << "\n";
      return 2;
    }
    if (train->parsed()) status = CmdTrain(*config, out_dir, out, resume);
    if (attack->parsed()) status = CmdAttack(*config, synthetic, out_dir, out);
    if (budget->parsed()) status = CmdBudget(*config, out);
  } else if (generate->parsed()) {
    status = CmdGenerate(*checkpoint, n, seed, out_dir, out);
  } else if (report->parsed()) {
    status = CmdReport(scores, eps, delta, out_dir, out);
  }
  if (!status.ok()) {
    err << "error: " << status << "\n";
    return 1;
  }
  return 0;
}

}  // namespace lvae::experiment
