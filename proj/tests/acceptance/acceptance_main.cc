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

// Acceptance harness: prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "absl/strings/str_format.h"
#include "lvae/data/dataset.h"
#include "lvae/data/idx.h"
#include "lvae/experiment/commands.h"
#include "lvae/experiment/config.h"
#include "lvae/mia/attack.h"
#include "lvae/nn/network.h"
#include "lvae/nn/spectral_norm.h"
#include "lvae/privacy/privacy_math.h"
#include "lvae/tensor/ops.h"
#include "lvae/training/train.h"
#include "lvae/vae/diagnostics.h"
#include "support/oracles.h"

namespace lvae::acceptance {
namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

Var C(Tensor t) { return Var::Constant(std::move(t)); }

double Inner(const Tensor& a, const Tensor& b) {
  double s = 0.0;
  for (int64_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// ---------------------------------------------------------------------- 1

int64_t CountParameters(const nn::Network& net) {
  int64_t n = 0;
  for (const Tensor* t : net.Parameters()) n += t->size();
  return n;
}

// Zero to two convolutional layers (plain or transposed) followed by two
// dense layers; activations drawn from relu and sigmoid.
nn::Network RandomNetwork(RngStream& rng) {
  auto activation = [&rng] {
    return rng.NextBelow(2) == 0 ? nn::Activation::kRelu : nn::Activation::kSigmoid;
  };
  auto pick = [&rng](int64_t lo, int64_t hi) {
    return lo + static_cast<int64_t>(rng.NextBelow(hi - lo + 1));
  };
  while (true) {
    const int64_t h = pick(2, 6), w = pick(2, 6);
    Shape shape = {h, w, pick(1, 2)};
    std::vector<nn::Layer> layers;
    const int64_t convs = pick(0, 2);
    for (int64_t i = 0; i < convs; ++i) {
      const int64_t out_c = pick(1, 3), kernel = pick(1, 3), stride = pick(1, 2);
      layers.push_back(rng.NextBelow(2) == 0
                           ? nn::Layer::Conv2D(shape, out_c, kernel, stride, Padding::kSame,
                                               activation(), rng)
                           : nn::Layer::Conv2DTranspose(shape, out_c, kernel, stride,
                                                        Padding::kSame, activation(), rng));
      shape = layers.back().output_shape();
    }
    const int64_t hidden = pick(2, 8);
    layers.push_back(nn::Layer::Dense(NumElements(shape), hidden, activation(), rng));
    layers.push_back(nn::Layer::Dense(hidden, pick(1, 3), nn::Activation::kNone, rng));
    nn::Network net(std::move(layers), nn::LipschitzMode::kNone, 1.0);
    if (CountParameters(net) <= 1000) return net;
  }
}

Outcome AutodiffCriterion() {
  const Clock::time_point start = Clock::now();
  RngStream rng(1, "acceptance/autodiff");
  double worst = 0.0;
  int64_t most_params = 0;
  for (int n = 0; n < 20; ++n) {
    const nn::Network net = RandomNetwork(rng);
    Shape batch = {2};
    batch.insert(batch.end(), net.input_shape().begin(), net.input_shape().end());
    std::vector<Tensor> inputs = {RandomUniform(batch, -1, 1, rng)};
    // Random biases too: zero biases behind dead relus put pre-activations
    // exactly on the kink, where central differences are not a derivative.
    for (const Tensor* p : net.Parameters()) {
      inputs.push_back(p->rank() == 1 ? RandomUniform(p->shape(), -0.5, 0.5, rng) : *p);
    }
    most_params = std::max(most_params, CountParameters(net));
    const testing::ScalarFn fn = [&net](std::span<const Var> v) {
      return SumAll(Square(net.Forward(v[0], v.subspan(1))));
    };
    const double err = testing::RelativeError(testing::TapeGrad(fn, inputs),
                                              testing::FiniteDifferenceGrad(fn, inputs));
    worst = std::max(worst, err);
  }
  const double seconds = Seconds(start);
  return {worst <= 1e-4 && seconds < 10.0,
          absl::StrFormat("20 networks (<= %d parameters), max relative error %.3g, %.2f s",
                          most_params, worst, seconds)};
}

// ---------------------------------------------------------------------- 2

Outcome ConvOracleCriterion() {
  RngStream rng(2, "acceptance/conv");
  double worst = 0.0;
  int cases = 0;
  for (int64_t h = 1; h <= 6; ++h) {
    for (int64_t w = 1; w <= 6; ++w) {
      for (int64_t kh = 1; kh <= 3; ++kh) {
        for (int64_t kw = 1; kw <= 3; ++kw) {
          for (int64_t stride = 1; stride <= 3; ++stride) {
            for (Padding padding : {Padding::kSame, Padding::kValid}) {
              if (padding == Padding::kValid && (kh > h || kw > w)) continue;
              const Tensor k = RandomUniform({kh, kw, 2, 3}, -1, 1, rng);
              const Tensor x = RandomUniform({2, h, w, 2}, -1, 1, rng);
              const Tensor y = Conv2D(C(x), C(k), stride, padding).value();
              const Eigen::MatrixXd m = testing::DenseConvMatrix(h, w, k, stride, padding);
              const int64_t in = h * w * 2, out = m.rows();
              if (y.size() != 2 * out) return {false, "output size disagrees with the oracle"};
              const Tensor v = RandomUniform(y.shape(), -1, 1, rng);
              const Tensor xt = Conv2DTranspose(C(v), C(k), stride, padding, h, w).value();
              for (int64_t b = 0; b < 2; ++b) {
                const Eigen::VectorXd yref =
                    m * Eigen::Map<const Eigen::VectorXd>(x.data() + b * in, in);
                const Eigen::VectorXd tref =
                    m.transpose() * Eigen::Map<const Eigen::VectorXd>(v.data() + b * out, out);
                for (int64_t i = 0; i < out; ++i) {
                  worst = std::max(worst, std::abs(y[b * out + i] - yref[i]));
                }
                for (int64_t i = 0; i < in; ++i) {
                  worst = std::max(worst, std::abs(xt[b * in + i] - tref[i]));
                }
              }
              const Tensor kg = Conv2DKernelGrad(C(x), C(v), kh, kw, stride, padding).value();
              worst = std::max(worst, std::abs(Inner(y, v) - Inner(x, xt)));
              worst = std::max(worst, std::abs(Inner(y, v) - Inner(k, kg)));
              ++cases;
            }
          }
        }
      }
    }
  }
  return {worst <= 1e-10,
          absl::StrFormat("%d geometries, max abs deviation %.3g (incl. adjoint identities)",
                          cases, worst)};
}

// ---------------------------------------------------------------------- 3

Eigen::MatrixXd DenseOperator(const Tensor& w) {
  Eigen::MatrixXd m(w.dim(1), w.dim(0));
  for (int64_t i = 0; i < w.dim(0); ++i) {
    for (int64_t j = 0; j < w.dim(1); ++j) m(j, i) = w[i * w.dim(1) + j];
  }
  return m;
}

Eigen::MatrixXd LayerMatrix(const nn::Layer& layer, const Tensor& w) {
  switch (layer.kind()) {
    case nn::LayerKind::kDense:
      return DenseOperator(w);
    case nn::LayerKind::kConv2D:
      return testing::DenseConvMatrix(layer.input_shape()[0], layer.input_shape()[1], w,
                                      layer.stride(), layer.padding());
    case nn::LayerKind::kConv2DTranspose:
      break;
  }
  return testing::DenseConvMatrix(layer.output_shape()[0], layer.output_shape()[1], w,
                                  layer.stride(), layer.padding())
      .transpose();
}

Outcome SpectralNormCriterion() {
  RngStream rng(3, "acceptance/spectral");
  double dense_err = 0.0, conv_err = 0.0;
  auto check = [&](nn::Layer layer, double& err) {
    const double ref = testing::SpectralNormOracle(LayerMatrix(layer, layer.weight()));
    const double estimate = nn::RefineSpectralState(layer, 200, rng);
    err = std::max(err, std::abs(estimate - ref) / ref);
    // The state already carries 200 steps; one more before normalizing.
    const nn::Layer normalized = nn::SpectralNormalize(layer, 1);
    err = std::max(err, std::abs(testing::SpectralNormOracle(
                                     LayerMatrix(normalized, normalized.weight())) -
                                 1.0));
  };
  for (auto [in, out] : {std::pair<int64_t, int64_t>{6, 8}, {10, 10}, {32, 16}, {5, 40}}) {
    check(nn::Layer::Dense(in, out, nn::Activation::kNone, rng), dense_err);
  }
  for (int64_t stride : {1, 2}) {
    check(nn::Layer::Conv2D({8, 8, 2}, 3, 3, stride, Padding::kSame, nn::Activation::kRelu, rng),
          conv_err);
    check(nn::Layer::Conv2DTranspose({4, 4, 3}, 2, 3, stride, Padding::kSame,
                                     nn::Activation::kNone, rng),
          conv_err);
  }
  return {dense_err <= 1e-6 && conv_err <= 1e-3,
          absl::StrFormat("dense max rel error %.3g (<= 1e-6), conv max rel error %.3g (<= 1e-3)",
                          dense_err, conv_err)};
}

// ---------------------------------------------------------------------- 4

Outcome LipschitzCriterion() {
  const Tensor x = data::GaussianMixture2d(1000, 4, 4)->data.x;
  std::string detail;
  bool pass = true;
  for (double L : {0.5, 1.0, 5.0}) {
    RngStream init(4, "acceptance/lipschitz/init");
    vae::VaeModel model = vae::MakeMlpVae(2, 32, 2, vae::Likelihood::kGaussianUnitCov,
                                          {L, nn::LipschitzMode::kSpectralNorm}, init);
    training::TrainConfig cfg;
    cfg.variant = training::Variant::kLvaeSn;
    cfg.epochs = 5;
    cfg.batch_size = 50;
    cfg.ratio_pairs = 10000;
    absl::StatusOr<training::TrainHistory> history = training::Train(model, x, cfg, 4);
    if (!history.ok()) return {false, std::string(history.status().message())};
    double worst = 0.0;
    for (const training::EpochRecord& r : history->epochs) {
      worst = std::max(worst, r.lipschitz_ratio);
      pass = pass && r.lipschitz_ratio <= L * 1.02;
    }
    detail += absl::StrFormat("%sL=%g max ratio %.6f", detail.empty() ? "" : ", ", L, worst);
  }
  return {pass, detail + " over 5 epochs, 1e4 pairs each"};
}

// ---------------------------------------------------------------------- 5

Outcome IndexCodeCriterion() {
  RngStream rng(5, "acceptance/index_code");
  const Tensor mu = RandomNormal({32, 2}, rng);
  const Tensor logvar = RandomUniform({32, 2}, -2.0, 0.5, rng);
  const vae::IndexCodeReport r = vae::IndexCodeTerms(mu, logvar, 20000, rng);
  const double mi_gap = std::abs(r.mutual_info - r.mutual_info_direct);
  const double mi_se = std::hypot(r.mutual_info_se, r.mutual_info_direct_se);
  return {std::abs(r.identity_residual) <= 3 * r.identity_residual_se && mi_gap <= 3 * mi_se,
          absl::StrFormat("identity residual %.3g (3 SE = %.3g), MI estimators differ by %.3g "
                          "(3 SE = %.3g)",
                          r.identity_residual, 3 * r.identity_residual_se, mi_gap, 3 * mi_se)};
}

// ---------------------------------------------------------------------- 6

Outcome TradeoffCriterion() {
  double worst_margin = 1.0, worst_inverse = 0.0, worst_symmetry = 0.0;
  const std::vector<double> grid = privacy::UniformGrid(1001);
  for (double eps : {0.0, 0.5, 1.0, 2.0, 14.14}) {
    for (double delta : {0.0, 1e-5, 0.01}) {
      const privacy::KairouzResult k =
          *privacy::KairouzCheck(eps, delta, *privacy::FEpsDeltaCurve(eps, delta, 1001));
      worst_margin = std::min(worst_margin, k.worst_margin);
    }
    for (double a : grid) {
      const double b = *privacy::FEpsDelta(eps, 0, a);
      worst_inverse = std::max(worst_inverse, std::abs(*privacy::FEpsDelta(eps, 0, b) - a));
    }
  }
  for (double mu : {0.1, 0.5, 1.0, 2.0, 4.0}) {
    for (double a : grid) {
      const double b = *privacy::GdpTradeoff(mu, a);
      worst_symmetry = std::max(worst_symmetry, std::abs(*privacy::GdpTradeoff(mu, b) - a));
    }
  }
  return {worst_margin >= -1e-12 && worst_inverse <= 1e-9 && worst_symmetry <= 1e-9,
          absl::StrFormat("worst kairouz margin %.3g, self-inverse error %.3g, G_mu symmetry "
                          "error %.3g",
                          worst_margin, worst_inverse, worst_symmetry)};
}

// ---------------------------------------------------------------------- 7

Outcome AccountantCriterion() {
  double exact_err = 0.0;
  for (auto [sigma, steps] :
       {std::pair<double, int64_t>{1.0, 1}, {2.0, 4}, {1.1, 100}, {0.7, 2500}}) {
    const double mu = *privacy::DpsgdMu(1.0, sigma, steps);
    const double exact = std::sqrt(static_cast<double>(steps)) / sigma;
    exact_err = std::max(exact_err, std::abs(mu - exact) / exact);
  }
  // delta(eps) of T = 4 Gaussian mechanisms with sigma = 2, against the
  // simulated privacy-loss random variable.
  RngStream rng(7, "acceptance/accountant");
  double mc_err = 0.0;
  const double mu = *privacy::DpsgdMu(1.0, 2.0, 4);
  for (double eps : {0.0, 0.25, 0.5, 1.0, 2.0, 3.0}) {
    const testing::McDelta mc = testing::GaussianPrivacyLossDelta(4, 2.0, eps, 1000000, rng);
    mc_err = std::max(mc_err, std::abs(*privacy::GdpToEpsDelta(mu, eps) - mc.delta));
  }
  bool monotone = true;
  double previous = 0.0;
  for (int64_t steps : {1, 10, 100, 1000, 10000}) {
    const double eps = *privacy::DpsgdBudget(0.01, 1.1, steps, 1e-5);
    monotone = monotone && eps > previous;
    previous = eps;
  }
  previous = std::numeric_limits<double>::infinity();
  for (double sigma : {0.8, 1.0, 2.0, 4.0, 16.0}) {
    const double eps = *privacy::DpsgdBudget(0.01, sigma, 1000, 1e-5);
    monotone = monotone && eps < previous;
    previous = eps;
  }
  return {exact_err <= 1e-12 && mc_err <= 0.01 && monotone,
          absl::StrFormat("p=1 relative error %.3g, max |delta - MC delta| %.3g over 1e6 trials, "
                          "monotone %s",
                          exact_err, mc_err, monotone ? "yes" : "no")};
}

// ---------------------------------------------------------------------- 8

std::vector<mia::AttackRecord> Records(const std::vector<double>& members,
                                       const std::vector<double>& nonmembers) {
  std::vector<mia::AttackRecord> out;
  int64_t id = 0;
  for (double s : members) out.push_back({id++, true, s});
  for (double s : nonmembers) out.push_back({id++, false, s});
  return out;
}

Outcome MiaCalibrationCriterion() {
  RngStream rng(8, "acceptance/mia");
  const double eps = 1.0, keep = std::exp(eps) / (1 + std::exp(eps));
  std::vector<double> m, nm;
  for (int i = 0; i < 1000; ++i) m.push_back(rng.NextUniform() < keep ? 0.0 : 1.0);
  for (int i = 0; i < 1000; ++i) nm.push_back(rng.NextUniform() < keep ? 1.0 : 0.0);
  const mia::EmpiricalTradeoff rr = *mia::ComputeTradeoff(Records(m, nm));
  const mia::BoundViolation v = *mia::ComputeBoundViolation(
      rr.EnvelopeCurve(1001), *privacy::FEpsDeltaCurve(eps, 0, 1001), 1000, 1000);
  bool within = true;
  for (size_t i = 0; i < v.margins.size(); ++i) within = within && v.margins[i] >= -3 * v.ses[i];

  std::vector<double> a, b;
  for (int i = 0; i < 1000; ++i) a.push_back(std::abs(rng.NextNormal()));
  for (int i = 0; i < 1000; ++i) b.push_back(std::abs(rng.NextNormal()));
  const double auc = mia::AttackAuc(*mia::ComputeTradeoff(Records(a, b)));
  const double se = mia::NullAucSe(1000, 1000);
  return {within && std::abs(auc - 0.5) <= 3 * se,
          absl::StrFormat("randomized response worst z %.3f (>= -3), null AUC %.4f (0.5 +- %.4f)",
                          v.worst_z, auc, 3 * se)};
}

// ---------------------------------------------------------------------- 9

std::map<std::string, double> KeyValues(const std::string& text) {
  std::map<std::string, double> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    const size_t eq = line.find('=');
    if (eq != std::string::npos) {
      out[line.substr(0, eq)] = std::strtod(line.c_str() + eq + 1, nullptr);
    }
  }
  return out;
}

// Standard normal quantile by bisection on erfc.
double NormalQuantile(double p) {
  double lo = -40, hi = 40;
  for (int i = 0; i < 200; ++i) {
    const double mid = (lo + hi) / 2;
    (0.5 * std::erfc(-mid / std::numbers::sqrt2) < p ? lo : hi) = mid;
  }
  return (lo + hi) / 2;
}

absl::StatusOr<std::string> RunBudget() {
  absl::StatusOr<experiment::ExperimentConfig> config = experiment::ResolveConfig(
      std::nullopt,
      {"latent_dim=2", "lipschitz.L=1", "budget.R_x=1", "budget.delta_z=0.01", "budget.vol_A=10",
       "budget.vol_B=1", "budget.mc_samples=100", "budget.mc_sample_std=1",
       "budget.mc_confidence=0.95"},
      std::nullopt);
  if (!config.ok()) return config.status();
  std::ostringstream out;
  if (absl::Status s = experiment::CmdBudget(*config, out); !s.ok()) return s;
  return out.str();
}

Outcome BudgetCriterion(std::string& printed) {
  absl::StatusOr<std::string> text = RunBudget();
  if (!text.ok()) return {false, std::string(text.status().message())};
  printed = *text;
  std::map<std::string, double> kv = KeyValues(*text);
  // Closed forms for d = 2: the chi-square tail is exp(-r^2 / 2).
  const double r_x = 1, L = 1, delta_z = 0.01, vol_a = 10, vol_b = 1;
  const double r_z = std::sqrt(-2 * std::log(delta_z));
  const double c = r_x * r_x + 2 * L * r_z * r_x;
  const double eps = 2 * c;
  const double mc = NormalQuantile(0.975) * 1.0 / std::sqrt(100.0);
  const double weight = 2 * std::sqrt(eps) * vol_b / vol_a;
  const std::map<std::string, double> expected = {
      {"R_z", r_z},       {"C", c},           {"eps_encoder", eps},
      {"mc_error", mc},   {"weight_term", weight}, {"delta_bar", delta_z + 2 * mc + weight}};
  double worst = 0.0;
  for (const auto& [key, value] : expected) {
    if (!kv.contains(key)) return {false, "missing " + key};
    worst = std::max(worst, std::abs(kv[key] - value));
  }
  // Printed values against the rounded published ones.
  const double rounded = std::max({std::abs(kv["R_z"] - 3.0349), std::abs(kv["C"] - 7.0698),
                                   std::abs(kv["eps_encoder"] - 14.1396)});
  return {worst <= 1e-6 && rounded <= 5e-4,
          absl::StrFormat("R_z=%.6f C=%.6f eps=%.6f delta_bar=%.6f; max deviation from "
                          "re-computation %.3g, from rounded reference %.2g",
                          kv["R_z"], kv["C"], kv["eps_encoder"], kv["delta_bar"], worst,
                          rounded)};
}

// --------------------------------------------------------------------- 10

struct RunResult {
  double outlier_bce = 0.0;
  double auc = 0.0;
  double cond_entropy = 0.0;
  double train_seconds = 0.0;
  // CSV outputs keyed by file name; the synthetic set is kept as a digest.
  std::map<std::string, std::string> csv;
};

std::string Slurp(const std::string& path) {
  absl::StatusOr<std::string> bytes = data::ReadFileBytes(path);
  return bytes.ok() ? *bytes : std::string();
}

std::map<std::string, double> ReadMetrics(const std::string& path) {
  std::map<std::string, double> out;
  std::istringstream in(Slurp(path));
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    const size_t comma = line.find(',');
    if (comma != std::string::npos) {
      out[line.substr(0, comma)] = std::strtod(line.c_str() + comma + 1, nullptr);
    }
  }
  return out;
}

// FNV-1a, enough to compare large files across runs.
std::string Digest(const std::string& bytes) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) h = (h ^ c) * 1099511628211ull;
  return absl::StrFormat("%016x", h);
}

absl::StatusOr<RunResult> RunPipeline(const std::string& variant, uint64_t seed, int epochs,
                                      const std::string& data_dir, const std::string& dir) {
  std::filesystem::remove_all(dir);
  absl::StatusOr<experiment::ExperimentConfig> config = experiment::ResolveConfig(
      std::nullopt,
      {"variant=" + variant, "epochs=" + std::to_string(epochs), "dataset.path=" + data_dir},
      seed);
  if (!config.ok()) return config.status();
  std::ostringstream log;
  RunResult r;
  const Clock::time_point start = Clock::now();
  if (absl::Status s = experiment::CmdTrain(*config, dir + "/train", log); !s.ok()) return s;
  r.train_seconds = Seconds(start);
  if (absl::Status s = experiment::CmdGenerate(dir + "/train/model.lvae",
                                               config->attack.n_synthetic, std::nullopt,
                                               dir + "/generate", log);
      !s.ok()) {
    return s;
  }
  const std::string synthetic = dir + "/generate/synthetic.csv";
  if (absl::Status s = experiment::CmdAttack(*config, synthetic, dir + "/attack", log); !s.ok()) {
    return s;
  }
  r.csv["synthetic.csv"] = Digest(Slurp(synthetic));
  std::filesystem::remove(synthetic);
  std::ostringstream report;
  if (absl::Status s = experiment::CmdReport(dir + "/attack/scores.csv", std::nullopt, 0.0,
                                             dir + "/report", report);
      !s.ok()) {
    return s;
  }
  const std::map<std::string, double> auc = KeyValues(report.str());
  if (!auc.contains("auc")) return absl::InternalError("report printed no auc");
  r.auc = auc.at("auc");
  const std::map<std::string, double> diag = ReadMetrics(dir + "/train/diagnostics.csv");
  if (!diag.contains("outlier_bce_per_pixel") || !diag.contains("cond_entropy")) {
    return absl::InternalError("diagnostics.csv lacks the outlier or entropy rows");
  }
  r.outlier_bce = diag.at("outlier_bce_per_pixel");
  r.cond_entropy = diag.at("cond_entropy");
  for (const char* f : {"train/history.csv", "train/diagnostics.csv", "attack/scores.csv",
                        "report/curve.csv"}) {
    r.csv[f] = Slurp(dir + "/" + f);
  }
  return r;
}

const std::vector<std::string> kVariants = {"vanilla", "lvae-gp", "lvae-sn"};

struct MnistRuns {
  // results[variant][seed index]
  std::map<std::string, std::vector<RunResult>> results;
};

Outcome EndToEndCriterion(const std::vector<uint64_t>& seeds, int epochs,
                          const std::string& data_dir, const std::string& work,
                          MnistRuns& runs) {
  if (!data::LoadMnist(data_dir, "t10k").ok()) {
    return {false, "MNIST files not found in " + data_dir};
  }
  std::string table = "seed,variant,outlier_bce,auc,cond_entropy\n";
  double slowest = 0.0;
  for (uint64_t seed : seeds) {
    for (const std::string& v : kVariants) {
      absl::StatusOr<RunResult> r = RunPipeline(
          v, seed, epochs, data_dir, absl::StrFormat("%s/c10/seed%d/%s", work, seed, v));
      if (!r.ok()) return {false, absl::StrFormat("%s seed %d: %s", v, seed, r.status().message())};
      std::cout << absl::StrFormat("  seed %d %-8s outlier_bce=%.4f auc=%.4f H(N|Z)=%.4f "
                                   "train=%.0f s\n",
                                   seed, v, r->outlier_bce, r->auc, r->cond_entropy,
                                   r->train_seconds)
                << std::flush;
      table += absl::StrFormat("%d,%s,%.17g,%.17g,%.17g\n", seed, v, r->outlier_bce, r->auc,
                               r->cond_entropy);
      slowest = std::max(slowest, r->train_seconds);
      runs.results[v].push_back(*std::move(r));
    }
  }
  std::ofstream(work + "/criterion10.csv", std::ios::binary) << table;
  auto mean = [&](const std::string& v, double RunResult::*field) {
    double s = 0.0;
    for (const RunResult& r : runs.results[v]) s += r.*field;
    return s / static_cast<double>(runs.results[v].size());
  };
  const double bce_v = mean("vanilla", &RunResult::outlier_bce);
  const double bce_gp = mean("lvae-gp", &RunResult::outlier_bce);
  const double bce_sn = mean("lvae-sn", &RunResult::outlier_bce);
  const double auc_v = mean("vanilla", &RunResult::auc);
  const double auc_gp = mean("lvae-gp", &RunResult::auc);
  const double auc_sn = mean("lvae-sn", &RunResult::auc);
  const double h_v = mean("vanilla", &RunResult::cond_entropy);
  const double h_gp = mean("lvae-gp", &RunResult::cond_entropy);
  const double h_sn = mean("lvae-sn", &RunResult::cond_entropy);
  const bool a = bce_gp >= 2 * bce_v && bce_sn >= 2 * bce_v;
  const bool b = auc_v >= auc_gp && auc_v >= auc_sn;
  const bool c = h_gp >= h_v && h_sn >= h_v;
  const bool time_ok = slowest <= 1800;
  return {a && b && c && time_ok,
          absl::StrFormat("(a) outlier BCE vanilla %.4f, gp %.4f, sn %.4f [%s]; "
                          "(b) AUC vanilla %.4f, gp %.4f, sn %.4f [%s]; "
                          "(c) H(N|Z) vanilla %.4f, gp %.4f, sn %.4f [%s]; "
                          "slowest training %.0f s [%s]; %d epochs, %d seeds",
                          bce_v, bce_gp, bce_sn, a ? "ok" : "fail", auc_v, auc_gp, auc_sn,
                          b ? "ok" : "fail", h_v, h_gp, h_sn, c ? "ok" : "fail", slowest,
                          time_ok ? "ok" : "fail", epochs, seeds.size())};
}

// --------------------------------------------------------------------- 11

Outcome ReproducibilityCriterion(const std::string& first_budget, const MnistRuns& runs,
                                 uint64_t seed, int epochs, const std::string& data_dir,
                                 const std::string& work) {
  absl::StatusOr<std::string> budget = RunBudget();
  if (!budget.ok()) return {false, std::string(budget.status().message())};
  std::vector<std::string> mismatches;
  if (*budget != first_budget) mismatches.push_back("budget output");
  int compared = 1;
  for (const std::string& v : kVariants) {
    const auto it = runs.results.find(v);
    if (it == runs.results.end() || it->second.empty()) {
      return {false, "criterion 10 produced no run to repeat"};
    }
    absl::StatusOr<RunResult> again =
        RunPipeline(v, seed, epochs, data_dir, absl::StrFormat("%s/c11/%s", work, v));
    if (!again.ok()) return {false, std::string(again.status().message())};
    for (const auto& [file, bytes] : it->second.front().csv) {
      ++compared;
      const auto other = again->csv.find(file);
      if (other == again->csv.end() || other->second != bytes) {
        mismatches.push_back(v + "/" + file);
      }
    }
  }
  std::string detail = absl::StrFormat("%d outputs compared (seed %d)", compared, seed);
  for (const std::string& m : mismatches) detail += "; differs: " + m;
  return {mismatches.empty(), detail};
}

// ------------------------------------------------------------------- main

std::string DefaultDataDir() {
  if (const char* env = std::getenv("LVAE_DATA_DIR"); env != nullptr && *env != '\0') return env;
  return LVAE_DEFAULT_DATA_DIR;
}

int Main(int argc, char** argv) {
  CLI::App app("LVAE acceptance criteria");
  std::vector<int> only;
  std::string work = "acceptance_work";
  std::string data_dir = DefaultDataDir();
  int epochs = LVAE_ACCEPTANCE_EPOCHS;
  std::vector<uint64_t> seeds = {1, 2, 3};
  app.add_option("--criteria", only, "Criteria to run (default: all)")->delimiter(',');
  app.add_option("--work-dir", work, "Scratch directory for the MNIST runs");
  app.add_option("--data-dir", data_dir, "Directory holding the MNIST IDX files");
  app.add_option("--epochs", epochs, "Training epochs for the MNIST runs")
      ->check(CLI::Range(1, 10));
  app.add_option("--seeds", seeds, "Seeds for the MNIST runs")->delimiter(',');
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  const std::set<int> selected(only.begin(), only.end());
  auto wanted = [&](int n) { return selected.empty() || selected.contains(n); };
  std::filesystem::create_directories(work);

  int failures = 0;
  auto run = [&](int n, const std::string& name, const std::function<Outcome()>& fn) {
    if (!wanted(n)) return;
    const Clock::time_point start = Clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::cout << absl::StrFormat("%s criterion %d (%s): %s [%.1f s]\n", o.pass ? "PASS" : "FAIL",
                                 n, name, o.detail, Seconds(start))
              << std::flush;
  };

  std::string budget;
  MnistRuns runs;
  run(1, "autodiff vs finite differences", AutodiffCriterion);
  run(2, "convolution dense-matrix oracle", ConvOracleCriterion);
  run(3, "spectral norm vs eigensolve", SpectralNormCriterion);
  run(4, "Lipschitz guarantee on toy run", LipschitzCriterion);
  run(5, "index-code decomposition", IndexCodeCriterion);
  run(6, "trade-off function suite", TradeoffCriterion);
  run(7, "accountant", AccountantCriterion);
  run(8, "MIA calibration", MiaCalibrationCriterion);
  run(9, "budget pipeline arithmetic", [&] { return BudgetCriterion(budget); });
  run(10, "end-to-end MNIST", [&] {
    return EndToEndCriterion(seeds, epochs, data_dir, work, runs);
  });
  run(11, "reproducibility", [&]() -> Outcome {
    if (budget.empty()) {
      absl::StatusOr<std::string> b = RunBudget();
      if (!b.ok()) return {false, std::string(b.status().message())};
      budget = *b;
    }
    if (runs.results.empty()) {
      Outcome first = EndToEndCriterion({seeds.front()}, epochs, data_dir, work, runs);
      if (runs.results.empty()) return {false, "first run failed: " + first.detail};
    }
    return ReproducibilityCriterion(budget, runs, seeds.front(), epochs, data_dir, work);
  });
  return failures == 0 ? 0 : 1;
}

}  // namespace
}  // namespace lvae::acceptance

int main(int argc, char** argv) { return lvae::acceptance::Main(argc, argv); }
