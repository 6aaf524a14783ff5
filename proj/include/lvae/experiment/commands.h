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

// The experiment subcommands. Each writes its files into an output directory
// (created when missing) and reports progress or results on `out`.
//
//   train     config.json, model.lvae, history.csv, wall_time.csv,
//             diagnostics.csv
//   generate  synthetic.csv, samples.pgm (image data only)
//   attack    attack_config.json, scores.csv
//   report    curve.csv, curve.svg; prints auc=<value>
//   budget    prints key=value lines

#ifndef LVAE_EXPERIMENT_COMMANDS_H_
#define LVAE_EXPERIMENT_COMMANDS_H_

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

#include "absl/status/status.h"
#include "lvae/experiment/config.h"
#include "lvae/vae/model.h"

namespace lvae::experiment {

// Trains config.epochs epochs; with `resume`, continues the checkpoint's run
// (whose config may differ from `config` only in the epoch count).
absl::Status CmdTrain(const ExperimentConfig& config, const std::string& out_dir, std::ostream& out,
                      const std::optional<std::string>& resume = std::nullopt);

// n and seed default to generate.n and the checkpoint's seed.
absl::Status CmdGenerate(const std::string& checkpoint, std::optional<int64_t> n,
                         std::optional<uint64_t> seed, const std::string& out_dir,
                         std::ostream& out);

// Scores attack.n_members training rows and attack.n_nonmembers held-out
// rows against the synthetic CSV. Member record ids are training-set row
// indices; nonmember ids index the held-out pool.
absl::Status CmdAttack(const ExperimentConfig& config, const std::string& synthetic_csv,
                       const std::string& out_dir, std::ostream& out);

// Empirical trade-off of a scores CSV, with the f_{eps,delta} overlay and
// its worst-case violation when `eps` is given.
absl::Status CmdReport(const std::string& scores_csv, std::optional<double> eps, double delta,
                       const std::string& out_dir, std::ostream& out);

// Encoder privacy pipeline (R_z, C, eps_encoder, mc_error, weight_term,
// delta_bar); for dpsgd also the accountant's epsilon after config.epochs.
absl::Status CmdBudget(const ExperimentConfig& config, std::ostream& out);

// Mean per-pixel binary cross-entropy of decoding the posterior mean of
// `row` ([1, data_shape...]); Bernoulli models only.
double ReconstructionBcePerPixel(const vae::VaeModel& model, const Tensor& row);

// Command-line entry point; returns the process exit code.
int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace lvae::experiment

#endif  // LVAE_EXPERIMENT_COMMANDS_H_
