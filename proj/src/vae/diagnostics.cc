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

#include "lvae/vae/diagnostics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "lvae/tensor/ops.h"

namespace lvae::vae {
namespace {

constexpr int64_t kRatioChunk = 256;
constexpr double kNearOffset = 1e-3;

Tensor Rows(const Tensor& t, int64_t begin, int64_t count) {
  const int64_t width = t.size() / t.dim(0);
  Shape shape = t.shape();
  shape[0] = count;
  return Tensor(shape, std::vector<double>(t.data() + begin * width,
                                           t.data() + (begin + count) * width));
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe Summarize(const std::vector<double>& xs) {
  const double n = static_cast<double>(xs.size());
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, xs.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0};
}

// Diagonal Gaussian mixture components with cached normalisers.
class Mixture {
 public:
  Mixture(const Tensor& mu, const Tensor& logvar)
      : n_(mu.dim(0)), d_(mu.dim(1)), mu_(mu), inv_var_(mu.shape()), log_norm_(n_) {
    for (int64_t i = 0; i < n_; ++i) {
      double c = 0.0;
      for (int64_t j = 0; j < d_; ++j) {
        const double lv = logvar[i * d_ + j];
        inv_var_[i * d_ + j] = std::exp(-lv);
        c -= 0.5 * (std::log(2.0 * std::numbers::pi) + lv);
      }
      log_norm_[i] = c;
    }
  }

  double LogComponent(int64_t i, const double* z) const {
    double q = 0.0;
    for (int64_t j = 0; j < d_; ++j) {
      const double r = z[j] - mu_[i * d_ + j];
      q += r * r * inv_var_[i * d_ + j];
    }
    return log_norm_[i] - 0.5 * q;
  }

  // log((1/N) sum_i q_i(z)).
  double LogAverage(const double* z, std::vector<double>& scratch) const {
    scratch.resize(n_);
    double top = -std::numeric_limits<double>::infinity();
    for (int64_t i = 0; i < n_; ++i) {
      scratch[i] = LogComponent(i, z);
      top = std::max(top, scratch[i]);
    }
    double s = 0.0;
    for (int64_t i = 0; i < n_; ++i) s += std::exp(scratch[i] - top);
    return top + std::log(s) - std::log(static_cast<double>(n_));
  }

  void Sample(int64_t i, RngStream& rng, double* z) const {
    for (int64_t j = 0; j < d_; ++j) {
      z[j] = mu_[i * d_ + j] + rng.NextNormal() / std::sqrt(inv_var_[i * d_ + j]);
    }
  }

  int64_t n() const { return n_; }
  int64_t d() const { return d_; }

 private:
  int64_t n_, d_;
  const Tensor& mu_;
  Tensor inv_var_;
  std::vector<double> log_norm_;
};

double LogPrior(const double* z, int64_t d) {
  double q = 0.0;
  for (int64_t j = 0; j < d; ++j) q += z[j] * z[j];
  return -0.5 * (static_cast<double>(d) * std::log(2.0 * std::numbers::pi) + q);
}

}  // namespace

double LipschitzRatio(const BatchFn& f, int64_t input_dim, int64_t n_pairs,
                      RngStream& rng) {
  if (n_pairs < 1 || input_dim < 1) throw TensorError("need pairs and a positive dimension");
  RngStream base = rng.Fork("base");
  RngStream partner = rng.Fork("partner");
  const int64_t independent = n_pairs / 2;
  double worst = 0.0;
  for (int64_t start = 0; start < n_pairs; start += kRatioChunk) {
    const int64_t count = std::min(kRatioChunk, n_pairs - start);
    const Tensor z1 = RandomNormal({count, input_dim}, base);
    Tensor z2 = RandomNormal({count, input_dim}, partner);
    for (int64_t p = 0; p < count; ++p) {
      if (start + p < independent) continue;
      for (int64_t j = 0; j < input_dim; ++j) {
        z2[p * input_dim + j] = z1[p * input_dim + j] + kNearOffset * z2[p * input_dim + j];
      }
    }
    const Tensor y1 = f(z1), y2 = f(z2);
    const int64_t width = y1.size() / count;
    for (int64_t p = 0; p < count; ++p) {
      double dz = 0.0, dy = 0.0;
      for (int64_t j = 0; j < input_dim; ++j) {
        const double r = z1[p * input_dim + j] - z2[p * input_dim + j];
        dz += r * r;
      }
      for (int64_t j = 0; j < width; ++j) {
        const double r = y1[p * width + j] - y2[p * width + j];
        dy += r * r;
      }
      if (dz > 0.0) worst = std::max(worst, std::sqrt(dy / dz));
    }
  }
  return worst;
}

IndexCodeReport IndexCodeTerms(const Tensor& mu, const Tensor& logvar,
                               int64_t n_mc_samples, RngStream& rng) {
  if (mu.rank() != 2 || mu.shape() != logvar.shape()) {
    throw TensorError("index-code terms need matching [N, d] mu and logvar");
  }
  if (mu.dim(0) < 2) throw TensorError("index-code terms need at least two data points");
  if (n_mc_samples < 2) throw TensorError("need at least two Monte Carlo samples");
  const Mixture q(mu, logvar);
  const int64_t n = q.n(), d = q.d();
  IndexCodeReport r;
  r.n = n;
  r.log_n = std::log(static_cast<double>(n));

  double kl_sum = 0.0;
  for (int64_t k = 0; k < n * d; ++k) {
    kl_sum += 0.5 * (mu[k] * mu[k] + std::exp(logvar[k]) - logvar[k] - 1.0);
  }
  r.avg_pointwise_kl = kl_sum / static_cast<double>(n);

  // Joint samples (i, z) with i uniform.
  RngStream joint = rng.Fork("joint");
  std::vector<double> kl_avg(n_mc_samples), cond(n_mc_samples), direct_kl(n_mc_samples);
  std::vector<double> z(d), scratch;
  for (int64_t s = 0; s < n_mc_samples; ++s) {
    const int64_t i = static_cast<int64_t>(joint.NextBelow(static_cast<uint64_t>(n)));
    q.Sample(i, joint, z.data());
    const double log_avg = q.LogAverage(z.data(), scratch);
    const double log_i = scratch[i];
    const double log_p = LogPrior(z.data(), d);
    kl_avg[s] = log_avg - log_p;
    cond[s] = r.log_n + log_avg - log_i;
    direct_kl[s] = log_i - log_p;
  }
  const MeanSe a = Summarize(kl_avg), h = Summarize(cond), k = Summarize(direct_kl);
  r.kl_avg_to_prior = a.mean;
  r.kl_avg_to_prior_se = a.se;
  r.cond_entropy = h.mean;
  r.cond_entropy_se = h.se;
  r.mutual_info = r.log_n - h.mean;
  r.mutual_info_se = h.se;
  r.identity_residual = r.avg_pointwise_kl - k.mean;
  r.identity_residual_se = k.se;

  // Stratified: the same number of draws from every component.
  RngStream strat = rng.Fork("stratified");
  const int64_t per = std::max<int64_t>(2, (n_mc_samples + n - 1) / n);
  double total = 0.0, var_sum = 0.0;
  std::vector<double> vals(per);
  for (int64_t i = 0; i < n; ++i) {
    for (int64_t s = 0; s < per; ++s) {
      q.Sample(i, strat, z.data());
      vals[s] = q.LogComponent(i, z.data()) - q.LogAverage(z.data(), scratch);
    }
    const MeanSe m = Summarize(vals);
    total += m.mean;
    var_sum += m.se * m.se;
  }
  r.mutual_info_direct = total / static_cast<double>(n);
  r.mutual_info_direct_se = std::sqrt(var_sum) / static_cast<double>(n);
  return r;
}

EncoderOutput EncodeAll(const VaeModel& model, const Tensor& data, int64_t chunk) {
  NoGradGuard no_grad;
  const BoundParams params = Constants(model);
  const int64_t n = data.dim(0), d = model.latent_dim;
  Tensor mu({n, d}), logvar({n, d});
  for (int64_t start = 0; start < n; start += chunk) {
    const int64_t count = std::min(chunk, n - start);
    const EncoderOutput e = Encode(model, Var::Constant(Rows(data, start, count)), params.encoder);
    std::copy(e.mu.value().data(), e.mu.value().data() + count * d, mu.data() + start * d);
    std::copy(e.logvar.value().data(), e.logvar.value().data() + count * d,
              logvar.data() + start * d);
  }
  return {Var::Constant(std::move(mu)), Var::Constant(std::move(logvar))};
}

IndexCodeReport IndexCodeTerms(const VaeModel& model, const Tensor& data,
                               int64_t n_mc_samples, RngStream& rng) {
  const EncoderOutput e = EncodeAll(model, data);
  return IndexCodeTerms(e.mu.value(), e.logvar.value(), n_mc_samples, rng);
}

}  // namespace lvae::vae
