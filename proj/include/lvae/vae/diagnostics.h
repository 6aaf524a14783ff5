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

#ifndef LVAE_VAE_DIAGNOSTICS_H_
#define LVAE_VAE_DIAGNOSTICS_H_

#include <cstdint>
#include <functional>

#include "lvae/tensor/rng.h"
#include "lvae/tensor/tensor.h"
#include "lvae/vae/model.h"

namespace lvae::vae {

using BatchFn = std::function<Tensor(const Tensor&)>;

// Largest ||f(z1) - f(z2)|| / ||z1 - z2|| over n_pairs pairs. Half the pairs
// are independent prior draws; the other half are prior draws with a nearby
// partner (offset 1e-3 * N(0, I)) so the local slope is probed too.
double LipschitzRatio(const BatchFn& f, int64_t input_dim, int64_t n_pairs,
                      RngStream& rng);

// All information quantities are in nats. Every Monte Carlo estimate comes
// with its standard error.
struct IndexCodeReport {
  int64_t n = 0;
  double log_n = 0.0;
  // (1/N) sum_i KL(q_i || p), closed form.
  double avg_pointwise_kl = 0.0;
  // KL(q_avg || p).
  double kl_avg_to_prior = 0.0;
  double kl_avg_to_prior_se = 0.0;
  // H(N | Z) for (i, z) ~ q(z | i) / N.
  double cond_entropy = 0.0;
  double cond_entropy_se = 0.0;
  // I(N; Z) = log N - H(N | Z).
  double mutual_info = 0.0;
  double mutual_info_se = 0.0;
  // (1/N) sum_i KL(q_i || q_avg), estimated on an independent stratified
  // sample.
  double mutual_info_direct = 0.0;
  double mutual_info_direct_se = 0.0;
  // avg_pointwise_kl - (kl_avg_to_prior + log N - cond_entropy), with the
  // standard error of the Monte Carlo part.
  double identity_residual = 0.0;
  double identity_residual_se = 0.0;
};

// Decomposition of the average posterior KL for the diagonal Gaussians
// N(mu_i, diag(exp(logvar_i))), i < N. mu and logvar are [N, d].
IndexCodeReport IndexCodeTerms(const Tensor& mu, const Tensor& logvar,
                               int64_t n_mc_samples, RngStream& rng);

// Encodes `data` (batched in chunks) and runs IndexCodeTerms.
IndexCodeReport IndexCodeTerms(const VaeModel& model, const Tensor& data,
                               int64_t n_mc_samples, RngStream& rng);

// Posterior parameters of every row of `data`, evaluated in chunks.
EncoderOutput EncodeAll(const VaeModel& model, const Tensor& data,
                        int64_t chunk = 256);

}  // namespace lvae::vae

#endif  // LVAE_VAE_DIAGNOSTICS_H_
