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

#ifndef LVAE_VAE_MODEL_H_
#define LVAE_VAE_MODEL_H_

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "lvae/nn/network.h"
#include "lvae/tensor/rng.h"
#include "lvae/tensor/tape.h"

namespace lvae::vae {

enum class Likelihood { kGaussianUnitCov, kBernoulli };

std::string_view LikelihoodName(Likelihood likelihood);

// Encoder producing [B, 2d] (mean, then log-variance) and a decoder producing
// the likelihood parameters (Gaussian mean or Bernoulli logits) from [B, d].
struct VaeModel {
  nn::Network encoder;
  nn::Network decoder;
  int64_t latent_dim = 0;
  Likelihood likelihood = Likelihood::kBernoulli;

  // Per-example data shape.
  const Shape& data_shape() const { return decoder.output_shape(); }

  // Throws TensorError unless the widths line up.
  void Validate() const;
};

struct BoundParams {
  std::vector<Var> encoder;
  std::vector<Var> decoder;
};

BoundParams Bind(const VaeModel& model, Tape& tape);
// Stored parameters as constants, for evaluation.
BoundParams Constants(const VaeModel& model);

// Convolutional model for 28x28x1 images: encoder conv 32/64/128/32 (3x3,
// stride 2, relu) -> dense 100 (relu) -> dense 2d; decoder dense 100 (relu)
// -> dense 7*7*32 (relu) -> transposed conv 64 (stride 2, relu) -> 128
// (stride 2, relu) -> 1 (stride 1).
VaeModel MakeMnistVae(int64_t latent_dim, Likelihood likelihood,
                      const nn::LipschitzDecoderConfig& lipschitz, RngStream& init);

// Two-hidden-layer MLP model for flat data of width `data_dim`.
VaeModel MakeMlpVae(int64_t data_dim, int64_t hidden, int64_t latent_dim,
                    Likelihood likelihood,
                    const nn::LipschitzDecoderConfig& lipschitz, RngStream& init);

struct EncoderOutput {
  Var mu;      // [B, d]
  Var logvar;  // [B, d]
};

EncoderOutput Encode(const VaeModel& model, const Var& x,
                     std::span<const Var> encoder_params);

// z = mu + exp(logvar / 2) * eps with eps ~ N(0, I) drawn from `rng`.
Var Reparameterize(const EncoderOutput& enc, RngStream& rng);
// Same with caller-provided noise.
Var Reparameterize(const EncoderOutput& enc, const Tensor& eps);

// [B, data_shape...] likelihood parameters.
Var Decode(const VaeModel& model, const Var& z, std::span<const Var> decoder_params);

// n samples from the prior pushed through the decoder. Bernoulli models emit
// pixel probabilities, or 0/1 draws with `sample_bits`.
Tensor Generate(const VaeModel& model, int64_t n, RngStream& rng,
                bool sample_bits = false);

}  // namespace lvae::vae

#endif  // LVAE_VAE_MODEL_H_
