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

#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "lvae/nn/network.h"
#include "lvae/tensor/ops.h"
#include "lvae/tensor/rng.h"
#include "lvae/vae/diagnostics.h"
#include "lvae/vae/model.h"
#include "lvae/vae/objectives.h"

namespace lvae::vae {
namespace {

using nn::Activation;
using nn::Layer;
using nn::LipschitzMode;
using nn::Network;

constexpr double kLog2Pi = 1.8378770664093453;  // log(2 pi)

Var C(Tensor t) { return Var::Constant(std::move(t)); }

VaeModel ToyModel(LipschitzMode mode, double L, uint64_t seed,
                  Likelihood likelihood = Likelihood::kGaussianUnitCov) {
  RngStream rng(seed, "toy");
  return MakeMlpVae(2, 16, 2, likelihood, {L, mode}, rng);
}

void ZeroAll(Network& net) {
  for (Tensor* p : net.MutableParameters()) {
    for (double& v : p->values()) v = 0.0;
  }
}

// ------------------------------------------------------------- encode

TEST(EncodeTest, ZeroWeightsGiveStandardPosterior) {
  VaeModel m = ToyModel(LipschitzMode::kNone, 1.0, 1);
  ZeroAll(m.encoder);
  RngStream rng(1, "x");
  const EncoderOutput e = Encode(m, C(RandomNormal({5, 2}, rng)), Constants(m).encoder);
  EXPECT_EQ(e.mu.value(), Tensor::Zeros({5, 2}));
  EXPECT_EQ(e.logvar.value(), Tensor::Zeros({5, 2}));
}

TEST(EncodeTest, ShapesAndBatchIndependence) {
  RngStream rng(2, "mnist");
  const VaeModel m = MakeMnistVae(8, Likelihood::kBernoulli, {1.0, LipschitzMode::kNone}, rng);
  Tensor x = RandomUniform({3, 28, 28, 1}, 0.0, 1.0, rng);
  const EncoderOutput a = Encode(m, C(x), Constants(m).encoder);
  EXPECT_EQ(a.mu.shape(), (Shape{3, 8}));
  EXPECT_EQ(a.logvar.shape(), (Shape{3, 8}));
  x[28 * 28 + 300] += 0.5;  // example 1 only
  const EncoderOutput b = Encode(m, C(x), Constants(m).encoder);
  for (int row = 0; row < 3; ++row) {
    bool same = true;
    for (int j = 0; j < 8; ++j) same &= a.mu.value()[row * 8 + j] == b.mu.value()[row * 8 + j];
    EXPECT_EQ(same, row != 1) << row;
  }
  EXPECT_THROW(Encode(m, C(Tensor({2, 27, 28, 1})), Constants(m).encoder), TensorError);
}

// ------------------------------------------------------- reparameterize

TEST(ReparameterizeTest, ZeroNoiseReturnsMean) {
  const EncoderOutput e{C(Tensor::FromList({1, 2}, {0.3, -1.0})),
                        C(Tensor::FromList({1, 2}, {0.5, 2.0}))};
  EXPECT_EQ(Reparameterize(e, Tensor::Zeros({1, 2})).value(), e.mu.value());
}

TEST(ReparameterizeTest, UnitVarianceStatistics) {
  const int n = 100000;
  const EncoderOutput e{C(Tensor::Full({n, 1}, 2.0)), C(Tensor::Zeros({n, 1}))};
  RngStream rng(3, "rep");
  const Tensor z = Reparameterize(e, rng).value();
  double mean = 0, sq = 0;
  for (double v : z.values()) mean += v;
  mean /= n;
  for (double v : z.values()) sq += (v - mean) * (v - mean);
  EXPECT_NEAR(mean, 2.0, 0.02);
  EXPECT_NEAR(sq / (n - 1), 1.0, 0.02);
}

TEST(ReparameterizeTest, PathwiseDerivativeInMeanIsOne) {
  Tape tape;
  const Var mu = tape.Leaf(Tensor::FromList({1, 3}, {0.1, 0.2, 0.3}));
  const Var lv = tape.Leaf(Tensor::FromList({1, 3}, {0.0, 1.0, -1.0}));
  RngStream rng(4, "path");
  const Var z = Reparameterize({mu, lv}, rng);
  const Tensor g = tape.Grad(SumAll(z), {&mu, 1})[0].value();
  for (double v : g.values()) EXPECT_EQ(v, 1.0);
}

// --------------------------------------------------------------- decode

TEST(DecodeTest, ZeroWeightsGiveConstantOutput) {
  VaeModel m = ToyModel(LipschitzMode::kNone, 1.0, 5);
  ZeroAll(m.decoder);
  m.decoder.mutable_layers().back().mutable_bias() = Tensor::FromList({2}, {0.25, -4.0});
  RngStream rng(5, "z");
  const Tensor out = Decode(m, C(RandomNormal({4, 2}, rng)), Constants(m).decoder).value();
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(out[2 * i], 0.25);
    EXPECT_EQ(out[2 * i + 1], -4.0);
  }
}

TEST(DecodeTest, MnistShape) {
  RngStream rng(6, "mnist");
  const VaeModel m = MakeMnistVae(8, Likelihood::kBernoulli, {1.0, LipschitzMode::kNone}, rng);
  EXPECT_EQ(Decode(m, C(RandomNormal({2, 8}, rng)), Constants(m).decoder).shape(),
            (Shape{2, 28, 28, 1}));
  EXPECT_EQ(m.decoder.layers().size(), 5u);
}

// ------------------------------------------------------------------- KL

TEST(KlTest, ClosedFormCases) {
  EXPECT_EQ(KlDiagGaussian(C(Tensor::Zeros({1, 3})), C(Tensor::Zeros({1, 3}))).value().item(),
            0.0);
  EXPECT_EQ(KlDiagGaussian(C(Tensor::Ones({1, 1})), C(Tensor::Zeros({1, 1}))).value().item(),
            0.5);
}

TEST(KlTest, NonNegativeEverywhere) {
  RngStream rng(7, "kl");
  const Tensor mu = RandomUniform({500, 4}, -3.0, 3.0, rng);
  const Tensor lv = RandomUniform({500, 4}, -3.0, 3.0, rng);
  const Tensor kl = KlDiagGaussian(C(mu), C(lv)).value();
  for (double v : kl.values()) EXPECT_GT(v, 0.0);
}

TEST(KlTest, MatchesMonteCarloEstimate) {
  const double mu[] = {0.7, -1.2, 0.1};
  const double lv[] = {-0.5, 0.8, 0.0};
  const double kl = KlDiagGaussian(C(Tensor::FromList({1, 3}, {mu[0], mu[1], mu[2]})),
                                   C(Tensor::FromList({1, 3}, {lv[0], lv[1], lv[2]})))
                        .value()
                        .item();
  RngStream rng(8, "mc");
  const int n = 1000000;
  double sum = 0, sq = 0;
  for (int s = 0; s < n; ++s) {
    double log_ratio = 0;
    for (int j = 0; j < 3; ++j) {
      const double e = rng.NextNormal();
      const double z = mu[j] + std::exp(0.5 * lv[j]) * e;
      log_ratio += (-0.5 * lv[j] - 0.5 * e * e) - (-0.5 * z * z);
    }
    sum += log_ratio;
    sq += log_ratio * log_ratio;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sq / n - mean * mean) / n);
  EXPECT_LE(std::abs(mean - kl), 3 * se);
}

// ---------------------------------------------------------- recon NLLs

TEST(ReconTest, GaussianCases) {
  RngStream rng(9, "g");
  const Tensor x = RandomNormal({2, 5}, rng);
  const Tensor v = ReconNllGaussian(x, C(x)).value();
  EXPECT_NEAR(v[0], 2.5 * kLog2Pi, 1e-12);
  EXPECT_NEAR(ReconNllGaussian(Tensor::FromList({1, 1}, {1.0}), C(Tensor::Zeros({1, 1})))
                  .value()
                  .item(),
              0.5 + 0.5 * kLog2Pi, 1e-15);
}

TEST(ReconTest, GaussianMatchesDensity) {
  RngStream rng(10, "gd");
  const Tensor x = RandomNormal({3, 4}, rng), m = RandomNormal({3, 4}, rng);
  const Tensor v = ReconNllGaussian(x, C(m)).value();
  for (int i = 0; i < 3; ++i) {
    double density = 1.0;
    for (int j = 0; j < 4; ++j) {
      const double r = x[i * 4 + j] - m[i * 4 + j];
      density *= std::exp(-0.5 * r * r) / std::sqrt(2 * std::numbers::pi);
    }
    EXPECT_NEAR(v[i], -std::log(density), 1e-12);
  }
}

TEST(ReconTest, BernoulliCases) {
  const Tensor x = Tensor::FromList({1, 4}, {0, 1, 1, 0});
  EXPECT_NEAR(ReconNllBernoulli(x, C(Tensor::Zeros({1, 4}))).value().item(), 4 * std::log(2.0),
              1e-15);
  EXPECT_LT(ReconNllBernoulli(Tensor::Ones({1, 1}), C(Tensor::Full({1, 1}, 60.0)))
                .value()
                .item(),
            1e-25);
  RngStream rng(11, "b");
  const Tensor logits = RandomUniform({2, 6}, -4.0, 4.0, rng);
  Tensor bits({2, 6});
  for (double& b : bits.values()) b = rng.NextUniform() < 0.5 ? 1.0 : 0.0;
  const Tensor v = ReconNllBernoulli(bits, C(logits)).value();
  for (int i = 0; i < 2; ++i) {
    double ref = 0;
    for (int j = 0; j < 6; ++j) {
      const double p = 1.0 / (1.0 + std::exp(-logits[i * 6 + j]));
      const double b = bits[i * 6 + j];
      ref -= b * std::log(p) + (1 - b) * std::log(1 - p);
    }
    EXPECT_NEAR(v[i], ref, 1e-12);
  }
}

// ----------------------------------------------------------------- ELBO

TEST(ElboTest, AdditivityAndNoPenaltyAtLambdaZero) {
  const VaeModel m = ToyModel(LipschitzMode::kGradientPenalty, 1.0, 12);
  RngStream rng(12, "x");
  const Tensor x = RandomNormal({8, 2}, rng);
  Tape tape;
  const BoundParams p = Bind(m, tape);
  RngStream r1(1, "elbo");
  const ElboReport rep = Report(ElboLoss(m, p, tape, x, 0.0, {}, r1));
  EXPECT_EQ(rep.penalty, 0.0);
  EXPECT_DOUBLE_EQ(rep.total, rep.recon + rep.kl);
  EXPECT_GE(rep.total, rep.recon);

  // Recompute the pieces by hand with the same noise stream.
  RngStream r2(1, "elbo");
  RngStream eps = r2.Fork("eps");
  const EncoderOutput e = Encode(m, C(x), p.encoder);
  const Var z = Reparameterize(e, eps);
  const double recon = MeanAll(ReconNllGaussian(x, Decode(m, z, p.decoder))).value().item();
  const double kl = MeanAll(KlDiagGaussian(e.mu, e.logvar)).value().item();
  EXPECT_DOUBLE_EQ(rep.recon, recon);
  EXPECT_DOUBLE_EQ(rep.kl, kl);

  RngStream r3(1, "elbo");
  const ElboReport with_gp = Report(ElboLoss(m, p, tape, x, 10.0, {}, r3));
  EXPECT_DOUBLE_EQ(with_gp.total, with_gp.recon + with_gp.kl + 10.0 * with_gp.penalty);
  EXPECT_THROW(ElboLoss(m, p, tape, x, -1.0, {}, r3), TensorError);
}

TEST(ElboTest, DecreasesUnderGradientDescent) {
  VaeModel m = ToyModel(LipschitzMode::kNone, 1.0, 13);
  RngStream data(13, "data");
  Tensor x = RandomNormal({64, 2}, data);
  for (int64_t i = 0; i < 64; ++i) x[2 * i] += (i % 2 ? 3.0 : -3.0);
  auto params = [&m]() {
    std::vector<Tensor*> ps = m.encoder.MutableParameters();
    for (Tensor* t : m.decoder.MutableParameters()) ps.push_back(t);
    return ps;
  };
  auto loss_at = [&](uint64_t step) {
    Tape tape;
    const BoundParams p = Bind(m, tape);
    RngStream r(99, "elbo", step);
    const ElboTerms t = ElboLoss(m, p, tape, x, 0.0, {}, r);
    std::vector<Var> wrt = p.encoder;
    wrt.insert(wrt.end(), p.decoder.begin(), p.decoder.end());
    return std::make_pair(t.total.value().item(), tape.Grad(t.total, wrt));
  };
  // Averages over fixed noise draws avoid single-sample jitter.
  auto average_loss = [&]() {
    double sum = 0;
    for (int s = 0; s < 20; ++s) sum += loss_at(1000 + s).first;
    return sum / 20;
  };
  const double before = average_loss();
  for (int step = 0; step < 50; ++step) {
    const auto grads = loss_at(step).second;
    const auto ps = params();
    for (size_t k = 0; k < ps.size(); ++k) {
      for (int64_t i = 0; i < ps[k]->size(); ++i) (*ps[k])[i] -= 0.02 * grads[k].value()[i];
    }
  }
  EXPECT_LT(average_loss(), before);
}

// ----------------------------------------------------- gradient penalty

Network LinearDecoder(const Tensor& w, LipschitzMode mode, double L) {
  RngStream rng(0, "lin");
  Layer l = Layer::Dense(w.dim(0), w.dim(1), Activation::kNone, rng);
  l.mutable_weight() = w;
  return Network({l}, mode, L);
}

std::vector<Var> ParamsOf(const Network& net) {
  std::vector<Var> out;
  for (const Tensor* t : net.Parameters()) out.push_back(C(*t));
  return out;
}

TEST(GradientPenaltyTest, ContractiveLinearDecoderHasNoPenalty) {
  RngStream rng(14, "lin");
  Tensor w = RandomNormal({3, 5}, rng);
  // Scale so that the operator norm is well below L = 2.
  double fro = 0;
  for (double v : w.values()) fro += v * v;
  for (double& v : w.values()) v /= std::sqrt(fro);
  const Network dec = LinearDecoder(w, LipschitzMode::kGradientPenalty, 2.0);
  Tape tape;
  const Tensor z_post = RandomNormal({16, 3}, rng);
  const Var pen = GradientPenalty(dec, ParamsOf(dec), tape, z_post, {2.0, 0}, rng);
  EXPECT_EQ(pen.value().item(), 0.0);
}

TEST(GradientPenaltyTest, ScalarDecoderClosedForm) {
  for (double c : {3.0, -3.0}) {
    const Network dec = LinearDecoder(Tensor::FromList({1, 1}, {c}),
                                      LipschitzMode::kGradientPenalty, 1.0);
    Tape tape;
    RngStream rng(15, "scalar");
    const Var pen = GradientPenalty(dec, ParamsOf(dec), tape,
                                    RandomNormal({10, 1}, rng), {1.0, 0}, rng);
    EXPECT_NEAR(pen.value().item(), 4.0, 1e-10);
  }
}

TEST(GradientPenaltyTest, MatchesFiniteDifferenceDirectionalNorms) {
  const VaeModel m = ToyModel(LipschitzMode::kGradientPenalty, 0.05, 16);
  RngStream rng(16, "fd");
  const int64_t n = 6, d = 2;
  const Tensor z = RandomNormal({n, d}, rng);
  Tensor v = RandomNormal({n, 2}, rng);
  for (int64_t i = 0; i < n; ++i) {
    const double s = std::hypot(v[2 * i], v[2 * i + 1]);
    v[2 * i] /= s;
    v[2 * i + 1] /= s;
  }
  Tape tape;
  const double pen =
      GradientPenaltyAt(m.decoder, ParamsOf(m.decoder), tape, z, v, 0.05).value().item();
  const double h = 1e-6;
  double ref = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    double norm2 = 0;
    for (int64_t j = 0; j < d; ++j) {
      Tensor zp = Tensor::FromList({1, 2}, {z[2 * i], z[2 * i + 1]}), zm = zp;
      zp[j] += h;
      zm[j] -= h;
      const Tensor yp = m.decoder.Forward(zp), ym = m.decoder.Forward(zm);
      const double dj = (v[2 * i] * (yp[0] - ym[0]) + v[2 * i + 1] * (yp[1] - ym[1])) / (2 * h);
      norm2 += dj * dj;
    }
    ref += std::pow(std::max(0.0, std::sqrt(norm2) - 0.05), 2);
  }
  ref /= n;
  ASSERT_GT(ref, 0.0);
  EXPECT_LE(std::abs(pen - ref) / ref, 1e-3);
}

TEST(GradientPenaltyTest, InnerGradientSkipsParameterGradients) {
  RngStream rng(17, "prune");
  const VaeModel m = MakeMnistVae(4, Likelihood::kBernoulli,
                                  {1.0, LipschitzMode::kGradientPenalty}, rng);
  Tape tape;
  const BoundParams p = Bind(m, tape);
  const Var pen =
      GradientPenalty(m.decoder, p.decoder, tape, RandomNormal({2, 4}, rng), {1.0, 0}, rng);
  for (int64_t id = 0; id < tape.size(); ++id) {
    EXPECT_NE(tape.op_name(id), "conv2d_kernel_grad");
  }
  // The penalty is differentiable in the decoder parameters.
  const auto g = tape.Grad(pen, p.decoder);
  double total = 0;
  for (const Var& gi : g) {
    for (double v : gi.value().values()) total += std::abs(v);
  }
  EXPECT_GE(total, 0.0);
  EXPECT_TRUE(std::isfinite(total));
}

// ----------------------------------------------------- lipschitz ratio

TEST(LipschitzRatioTest, IdentityAndHomogeneity) {
  RngStream rng(18, "ratio");
  EXPECT_NEAR(LipschitzRatio([](const Tensor& z) { return z; }, 3, 1000, rng), 1.0, 1e-12);
  const VaeModel m = ToyModel(LipschitzMode::kNone, 1.0, 18);
  auto f = [&m](const Tensor& z) { return m.decoder.Forward(z); };
  auto f2 = [&m](const Tensor& z) {
    Tensor y = m.decoder.Forward(z);
    for (double& v : y.values()) v *= 2.0;
    return y;
  };
  RngStream a(5, "same"), b(5, "same");
  EXPECT_NEAR(LipschitzRatio(f2, 2, 2000, b), 2.0 * LipschitzRatio(f, 2, 2000, a), 1e-9);
}

TEST(LipschitzRatioTest, SpectralDecoderWithinBound) {
  for (double L : {0.5, 1.0, 5.0}) {
    const VaeModel m = ToyModel(LipschitzMode::kSpectralNorm, L, 19);
    RngStream rng(19, "sn");
    EXPECT_LE(LipschitzRatio([&m](const Tensor& z) { return m.decoder.Forward(z); }, 2, 10000,
                             rng),
              L * 1.02);
  }
}

// --------------------------------------------------------- index code

TEST(IndexCodeTest, IdenticalEncodings) {
  RngStream rng(20, "same");
  const Tensor mu = Tensor::Full({10, 3}, 0.4), lv = Tensor::Full({10, 3}, -0.2);
  const IndexCodeReport r = IndexCodeTerms(mu, lv, 2000, rng);
  EXPECT_NEAR(r.cond_entropy, std::log(10.0), 1e-12);
  EXPECT_NEAR(r.mutual_info, 0.0, 1e-12);
  EXPECT_NEAR(r.mutual_info_direct, 0.0, 1e-12);
}

TEST(IndexCodeTest, DisjointPair) {
  RngStream rng(21, "pair");
  const Tensor mu = Tensor::FromList({2, 1}, {10.0, -10.0});
  const Tensor lv = Tensor::Full({2, 1}, std::log(1e-4));
  const IndexCodeReport r = IndexCodeTerms(mu, lv, 20000, rng);
  EXPECT_LE(std::abs(r.mutual_info - std::log(2.0)), 3 * r.mutual_info_se + 1e-12);
  EXPECT_NEAR(r.mutual_info, std::log(2.0), 1e-9);
}

TEST(IndexCodeTest, DecompositionIdentity) {
  RngStream rng(22, "ident");
  const Tensor mu = RandomNormal({32, 2}, rng);
  const Tensor lv = RandomUniform({32, 2}, -2.0, 0.5, rng);
  const IndexCodeReport r = IndexCodeTerms(mu, lv, 20000, rng);
  EXPECT_LE(std::abs(r.identity_residual), 3 * r.identity_residual_se);
  EXPECT_LE(std::abs(r.mutual_info - r.mutual_info_direct),
            3 * std::hypot(r.mutual_info_se, r.mutual_info_direct_se));
  EXPECT_GE(r.mutual_info, -3 * r.mutual_info_se);
  EXPECT_LE(r.mutual_info, r.log_n + 3 * r.mutual_info_se);
  EXPECT_GE(r.cond_entropy, -3 * r.cond_entropy_se);
  EXPECT_LE(r.cond_entropy, r.log_n + 3 * r.cond_entropy_se);
}

TEST(IndexCodeTest, RejectsSingleton) {
  RngStream rng(23, "one");
  EXPECT_THROW(IndexCodeTerms(Tensor({1, 2}), Tensor({1, 2}), 100, rng), TensorError);
}

// ------------------------------------------------------------- generate

TEST(GenerateTest, EmptyDeterministicAndInRange) {
  RngStream init(24, "gen");
  const VaeModel m = MakeMnistVae(8, Likelihood::kBernoulli, {1.0, LipschitzMode::kNone}, init);
  RngStream r0(1, "g");
  EXPECT_EQ(Generate(m, 0, r0).shape(), (Shape{0, 28, 28, 1}));
  RngStream r1(2, "g"), r2(2, "g");
  const Tensor a = Generate(m, 3, r1), b = Generate(m, 3, r2);
  EXPECT_EQ(a, b);
  for (double v : a.values()) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
  RngStream r3(2, "g");
  const Tensor bits = Generate(m, 2, r3, true);
  for (double v : bits.values()) EXPECT_TRUE(v == 0.0 || v == 1.0);
}

TEST(GenerateTest, ChunkedDecodingMatchesSingleBatch) {
  RngStream init(25, "gen");
  const VaeModel m = MakeMlpVae(5, 16, 3, Likelihood::kGaussianUnitCov,
                                {1.0, LipschitzMode::kNone}, init);
  RngStream r1(3, "g"), r2(3, "g");
  // More rows than one decoding chunk.
  const Tensor a = Generate(m, 600, r1);
  const Tensor b = m.decoder.Forward(RandomNormal({600, 3}, r2));
  ASSERT_EQ(a.shape(), b.shape());
  for (int64_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
}

}  // namespace
}  // namespace lvae::vae
