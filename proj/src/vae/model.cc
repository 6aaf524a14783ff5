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

#include "lvae/vae/model.h"

#include <algorithm>
#include <string>

#include "lvae/tensor/ops.h"

namespace lvae::vae {

using nn::Activation;
using nn::Layer;

std::string_view LikelihoodName(Likelihood likelihood) {
  return likelihood == Likelihood::kBernoulli ? "bernoulli" : "gaussian_unit_cov";
}

void VaeModel::Validate() const {
  if (latent_dim < 1) throw TensorError("latent dimension must be positive");
  if (NumElements(encoder.output_shape()) != 2 * latent_dim) {
    throw TensorError("encoder must output 2 * latent_dim values, got " +
                      ShapeToString(encoder.output_shape()));
  }
  if (NumElements(decoder.input_shape()) != latent_dim) {
    throw TensorError("decoder must take latent_dim inputs, got " +
                      ShapeToString(decoder.input_shape()));
  }
  if (NumElements(encoder.input_shape()) != NumElements(decoder.output_shape())) {
    throw TensorError("encoder input and decoder output sizes differ");
  }
}

BoundParams Bind(const VaeModel& model, Tape& tape) {
  return {model.encoder.Bind(tape), model.decoder.Bind(tape)};
}

BoundParams Constants(const VaeModel& model) {
  BoundParams p;
  for (const Tensor* t : model.encoder.Parameters()) p.encoder.push_back(Var::Constant(*t));
  for (const Tensor* t : model.decoder.Parameters()) p.decoder.push_back(Var::Constant(*t));
  return p;
}

VaeModel MakeMnistVae(int64_t latent_dim, Likelihood likelihood,
                      const nn::LipschitzDecoderConfig& lipschitz, RngStream& init) {
  RngStream enc = init.Fork("encoder");
  RngStream dec = init.Fork("decoder");
  RngStream sn = init.Fork("spectral");
  const Padding same = Padding::kSame;
  std::vector<Layer> e;
  e.push_back(Layer::Conv2D({28, 28, 1}, 32, 3, 2, same, Activation::kRelu, enc));
  e.push_back(Layer::Conv2D({14, 14, 32}, 64, 3, 2, same, Activation::kRelu, enc));
  e.push_back(Layer::Conv2D({7, 7, 64}, 128, 3, 2, same, Activation::kRelu, enc));
  e.push_back(Layer::Conv2D({4, 4, 128}, 32, 3, 2, same, Activation::kRelu, enc));
  e.push_back(Layer::Dense(2 * 2 * 32, 100, Activation::kRelu, enc));
  e.push_back(Layer::Dense(100, 2 * latent_dim, Activation::kNone, enc));
  std::vector<Layer> d;
  d.push_back(Layer::Dense(latent_dim, 100, Activation::kRelu, dec));
  d.push_back(Layer::Dense(100, 7 * 7 * 32, Activation::kRelu, dec));
  d.push_back(Layer::Conv2DTranspose({7, 7, 32}, 64, 3, 2, same, Activation::kRelu, dec));
  d.push_back(Layer::Conv2DTranspose({14, 14, 64}, 128, 3, 2, same, Activation::kRelu, dec));
  d.push_back(Layer::Conv2DTranspose({28, 28, 128}, 1, 3, 1, same, Activation::kNone, dec));
  VaeModel m{nn::Network(std::move(e), nn::LipschitzMode::kNone, 1.0),
             nn::BuildLipschitzDecoder(std::move(d), lipschitz, sn), latent_dim,
             likelihood};
  m.Validate();
  return m;
}

VaeModel MakeMlpVae(int64_t data_dim, int64_t hidden, int64_t latent_dim,
                    Likelihood likelihood,
                    const nn::LipschitzDecoderConfig& lipschitz, RngStream& init) {
  RngStream enc = init.Fork("encoder");
  RngStream dec = init.Fork("decoder");
  RngStream sn = init.Fork("spectral");
  std::vector<Layer> e = {Layer::Dense(data_dim, hidden, Activation::kRelu, enc),
                          Layer::Dense(hidden, hidden, Activation::kRelu, enc),
                          Layer::Dense(hidden, 2 * latent_dim, Activation::kNone, enc)};
  std::vector<Layer> d = {Layer::Dense(latent_dim, hidden, Activation::kRelu, dec),
                          Layer::Dense(hidden, hidden, Activation::kRelu, dec),
                          Layer::Dense(hidden, data_dim, Activation::kNone, dec)};
  VaeModel m{nn::Network(std::move(e), nn::LipschitzMode::kNone, 1.0),
             nn::BuildLipschitzDecoder(std::move(d), lipschitz, sn), latent_dim,
             likelihood};
  m.Validate();
  return m;
}

EncoderOutput Encode(const VaeModel& model, const Var& x,
                     std::span<const Var> encoder_params) {
  const Var out = model.encoder.Forward(x, encoder_params);
  const Var flat = Reshape(out, {out.shape()[0], 2 * model.latent_dim});
  return {SliceLastDim(flat, 0, model.latent_dim),
          SliceLastDim(flat, model.latent_dim, model.latent_dim)};
}

Var Reparameterize(const EncoderOutput& enc, const Tensor& eps) {
  if (eps.shape() != enc.mu.shape()) {
    throw TensorError("noise shape " + ShapeToString(eps.shape()) +
                      " does not match " + ShapeToString(enc.mu.shape()));
  }
  return Add(enc.mu, Mul(Exp(Scale(enc.logvar, 0.5)), Var::Constant(eps)));
}

Var Reparameterize(const EncoderOutput& enc, RngStream& rng) {
  return Reparameterize(enc, RandomNormal(enc.mu.shape(), rng));
}

Var Decode(const VaeModel& model, const Var& z, std::span<const Var> decoder_params) {
  return model.decoder.Forward(z, decoder_params);
}

Tensor Generate(const VaeModel& model, int64_t n, RngStream& rng, bool sample_bits) {
  Shape shape = {n};
  shape.insert(shape.end(), model.data_shape().begin(), model.data_shape().end());
  if (n == 0) return Tensor(shape);
  if (n < 0) throw TensorError("cannot generate a negative number of samples");
  NoGradGuard no_grad;
  const Tensor z = RandomNormal({n, model.latent_dim}, rng);
  // Decoding in chunks bounds the activation memory; rows are independent.
  constexpr int64_t kChunk = 256;
  const int64_t row = NumElements(model.data_shape());
  Tensor out({n, row});
  for (int64_t begin = 0; begin < n; begin += kChunk) {
    const int64_t rows = std::min(kChunk, n - begin);
    const Tensor chunk = Tensor({rows, model.latent_dim},
                                std::vector<double>(z.data() + begin * model.latent_dim,
                                                    z.data() + (begin + rows) * model.latent_dim));
    const Tensor decoded = model.decoder.Forward(chunk);
    std::copy_n(decoded.data(), decoded.size(), out.data() + begin * row);
  }
  if (model.likelihood == Likelihood::kBernoulli) {
    out = Sigmoid(Var::Constant(std::move(out))).value();
    if (sample_bits) {
      RngStream bits = rng.Fork("bits");
      for (double& p : out.values()) p = bits.NextUniform() < p ? 1.0 : 0.0;
    }
  }
  return out.Reshaped(shape);
}

}  // namespace lvae::vae
