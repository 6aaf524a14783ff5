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

#include "lvae/vae/objectives.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lvae/tensor/ops.h"

namespace lvae::vae {
namespace {

// Added under the square root so the norm stays differentiable at 0.
constexpr double kNormFloor = 1e-12;

// [B, ...] -> [B], summing everything but the batch axis.
Var SumPerExample(const Var& v) {
  const int64_t batch = v.shape()[0];
  const int64_t rest = batch > 0 ? v.size() / batch : 0;
  const int axis[] = {1};
  return Sum(Reshape(v, {batch, rest}), axis);
}

Tensor MatchShape(const Tensor& x, const Var& params) {
  if (x.size() != params.size()) {
    throw TensorError("data " + ShapeToString(x.shape()) +
                      " does not match decoder output " +
                      ShapeToString(params.shape()));
  }
  return x.shape() == params.shape() ? x : x.Reshaped(params.shape());
}

Var Zero() { return Var::Constant(Tensor::Scalar(0.0)); }

}  // namespace

Var KlDiagGaussian(const Var& mu, const Var& logvar) {
  const Var terms = AddScalar(Sub(Add(Square(mu), Exp(logvar)), logvar), -1.0);
  return Scale(SumPerExample(terms), 0.5);
}

Var ReconNllGaussian(const Tensor& x, const Var& mean) {
  const Tensor xs = MatchShape(x, mean);
  const int64_t n = mean.shape()[0] > 0 ? mean.size() / mean.shape()[0] : 0;
  const Var half_sq = Scale(SumPerExample(Square(Sub(Var::Constant(xs), mean))), 0.5);
  return AddScalar(half_sq, 0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi));
}

Var ReconNllBernoulli(const Tensor& x, const Var& logits) {
  return SumPerExample(BceWithLogits(logits, MatchShape(x, logits)));
}

Var ReconNll(Likelihood likelihood, const Tensor& x, const Var& params) {
  return likelihood == Likelihood::kBernoulli ? ReconNllBernoulli(x, params)
                                              : ReconNllGaussian(x, params);
}

Var GradientPenaltyAt(const nn::Network& decoder, std::span<const Var> decoder_params,
                      Tape& tape, const Tensor& z, const Tensor& v, double L) {
  const Var zl = tape.Leaf(z);
  const Var out = decoder.Forward(zl, decoder_params);
  if (v.size() != out.size()) {
    throw TensorError("projection directions " + ShapeToString(v.shape()) +
                      " do not match decoder output " + ShapeToString(out.shape()));
  }
  const Var s = SumAll(Mul(out, Var::Constant(v.Reshaped(out.shape()))));
  const Var g = tape.Grad(s, {&zl, 1}, /*create_graph=*/true)[0];
  const Var norm = Sqrt(AddScalar(SumPerExample(Square(g)), kNormFloor));
  return MeanAll(Square(Relu(AddScalar(norm, -L))));
}

Var GradientPenalty(const nn::Network& decoder, std::span<const Var> decoder_params,
                    Tape& tape, const Tensor& z_post,
                    const GradientPenaltyOptions& options, RngStream& rng) {
  const int64_t batch = z_post.dim(0);
  const int64_t d = z_post.size() / std::max<int64_t>(batch, 1);
  const int64_t m = options.points > 0 ? std::min(options.points, batch) : batch;
  if (m == 0) return Zero();
  RngStream prior = rng.Fork("prior");
  RngStream mix = rng.Fork("t");
  RngStream dir = rng.Fork("direction");
  const Tensor zp = RandomNormal({m, d}, prior);
  Tensor z({m, d});
  for (int64_t i = 0; i < m; ++i) {
    const double t = mix.NextUniform();
    for (int64_t j = 0; j < d; ++j) {
      z[i * d + j] = t * z_post[i * d + j] + (1.0 - t) * zp[i * d + j];
    }
  }
  Shape vshape = {m};
  vshape.insert(vshape.end(), decoder.output_shape().begin(), decoder.output_shape().end());
  Tensor v = RandomNormal(vshape, dir);
  const int64_t width = v.size() / m;
  for (int64_t i = 0; i < m; ++i) {
    double n2 = 0.0;
    for (int64_t j = 0; j < width; ++j) n2 += v[i * width + j] * v[i * width + j];
    const double inv = 1.0 / std::sqrt(n2);
    for (int64_t j = 0; j < width; ++j) v[i * width + j] *= inv;
  }
  return GradientPenaltyAt(decoder, decoder_params, tape, z, v, options.L);
}

ElboReport Report(const ElboTerms& terms) {
  return {terms.recon.value().item(), terms.kl.value().item(),
          terms.penalty.value().item(), terms.total.value().item()};
}

ElboTerms ElboLoss(const VaeModel& model, const BoundParams& params, Tape& tape,
                   const Tensor& x, double lambda_gp,
                   const GradientPenaltyOptions& gp, RngStream& rng) {
  if (lambda_gp < 0.0) throw TensorError("lambda_gp must be non-negative");
  RngStream eps_rng = rng.Fork("eps");
  const EncoderOutput enc = Encode(model, Var::Constant(x), params.encoder);
  const Var z = Reparameterize(enc, eps_rng);
  const Var decoded = Decode(model, z, params.decoder);
  ElboTerms t;
  t.recon = MeanAll(ReconNll(model.likelihood, x, decoded));
  t.kl = MeanAll(KlDiagGaussian(enc.mu, enc.logvar));
  t.total = Add(t.recon, t.kl);
  t.penalty = Zero();
  if (lambda_gp > 0.0 && model.decoder.mode() == nn::LipschitzMode::kGradientPenalty) {
    RngStream gp_rng = rng.Fork("gp");
    GradientPenaltyOptions options = gp;
    options.L = model.decoder.L();
    t.penalty = GradientPenalty(model.decoder, params.decoder, tape, z.value(), options,
                                gp_rng);
    t.total = Add(t.total, Scale(t.penalty, lambda_gp));
  }
  return t;
}

}  // namespace lvae::vae
