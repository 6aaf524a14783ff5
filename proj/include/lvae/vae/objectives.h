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

#ifndef LVAE_VAE_OBJECTIVES_H_
#define LVAE_VAE_OBJECTIVES_H_

#include <cstdint>
#include <span>

#include "lvae/nn/network.h"
#include "lvae/tensor/rng.h"
#include "lvae/tensor/tape.h"
#include "lvae/vae/model.h"

namespace lvae::vae {

// KL(N(mu, diag(exp(logvar))) || N(0, I)) per example: [B].
Var KlDiagGaussian(const Var& mu, const Var& logvar);

// -log N(x; mean, I) per example: [B].
Var ReconNllGaussian(const Tensor& x, const Var& mean);
// Binary cross-entropy summed over each example: [B].
Var ReconNllBernoulli(const Tensor& x, const Var& logits);
Var ReconNll(Likelihood likelihood, const Tensor& x, const Var& params);

struct GradientPenaltyOptions {
  double L = 1.0;
  // Number of probe points per batch; 0 or more than the batch means all.
  int64_t points = 0;
};

// Penalty at explicit probe points z [m, d] with unit projection directions
// v [m, data_shape...]: mean_i (max(0, ||grad_z <v_i, dec(z_i)>|| - L))^2.
// The result is differentiable in the decoder parameters.
Var GradientPenaltyAt(const nn::Network& decoder, std::span<const Var> decoder_params,
                      Tape& tape, const Tensor& z, const Tensor& v, double L);

// Probes at t * z_post + (1 - t) * z_prior with t ~ U[0, 1], z_prior ~ N(0, I)
// and fresh random unit directions, all drawn from `rng`.
Var GradientPenalty(const nn::Network& decoder, std::span<const Var> decoder_params,
                    Tape& tape, const Tensor& z_post,
                    const GradientPenaltyOptions& options, RngStream& rng);

struct ElboTerms {
  Var recon;    // batch mean of per-example reconstruction NLL
  Var kl;       // batch mean of per-example KL
  Var penalty;  // gradient penalty, zero unless requested
  Var total;    // recon + kl + lambda * penalty
};

struct ElboReport {
  double recon = 0.0;
  double kl = 0.0;
  double penalty = 0.0;
  double total = 0.0;
};

ElboReport Report(const ElboTerms& terms);

// Single-sample Monte Carlo ELBO on batch x (negated, to be minimised). The
// penalty is computed only when lambda_gp > 0 and the decoder is in
// gradient-penalty mode; its target is the decoder's L, and only
// `gp.points` is read.
ElboTerms ElboLoss(const VaeModel& model, const BoundParams& params, Tape& tape,
                   const Tensor& x, double lambda_gp,
                   const GradientPenaltyOptions& gp, RngStream& rng);

}  // namespace lvae::vae

#endif  // LVAE_VAE_OBJECTIVES_H_
