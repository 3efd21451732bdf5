// Copyright (c) the SFC Project Authors.
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

#include "sfc/losses.h"

#include <algorithm>
#include <cmath>

#include "sfc/common.h"
#include "sfc/transforms.h"

namespace sfc {

double CrossEntropySum(const Tensor& logits, const std::vector<int>& labels,
                       Tensor* grad_logits) {
  Check(logits.ndim() == 2, "logits must be (N, classes)");
  const int n = logits.dim(0), c = logits.dim(1);
  Check(static_cast<int>(labels.size()) == n, "label count mismatch");
  if (grad_logits) *grad_logits = Tensor(logits.shape());
  double loss = 0.0;
  for (int i = 0; i < n; ++i) {
    const int y = labels[i];
    Check(y >= 0 && y < c, "label out of range");
    double maxv = logits.At(i, 0);
    for (int j = 1; j < c; ++j) maxv = std::max<double>(maxv, logits.At(i, j));
    double sum = 0.0;
    for (int j = 0; j < c; ++j) sum += std::exp(static_cast<double>(logits.At(i, j)) - maxv);
    const double lse = maxv + std::log(sum);
    const double p = std::max(std::exp(static_cast<double>(logits.At(i, y)) - lse),
                              kSoftmaxEpsilon);
    loss -= std::log(p);
    if (grad_logits) {
      for (int j = 0; j < c; ++j) {
        const double q = std::exp(static_cast<double>(logits.At(i, j)) - lse);
        grad_logits->At(i, j) = static_cast<float>(q - (j == y ? 1.0 : 0.0));
      }
    }
  }
  return loss;
}

double MultitaskLoss(const Tensor& logits, const std::vector<int>& labels,
                     const Tensor& x_trans, const Tensor& x_s, double lambda_s,
                     Tensor* grad_logits, Tensor* grad_x_trans) {
  Check(lambda_s >= 0.0, "lambda_s must be nonnegative");
  Check(x_trans.SameShape(x_s), "x_trans / x_s shape mismatch");
  const double ce = CrossEntropySum(logits, labels, grad_logits);
  double satd;
  if (grad_x_trans) {
    satd = SatdWithGrad(x_trans, x_s, grad_x_trans);
    for (size_t i = 0; i < grad_x_trans->size(); ++i) {
      (*grad_x_trans)[i] *= static_cast<float>(lambda_s);
    }
  } else {
    satd = Satd(x_s, x_trans);
  }
  return ce + lambda_s * satd;
}

FeatureCodecLossParts FeatureCodecLoss(
    const Tensor& f_raw, const Tensor& f_rec, const Tensor& c_noisy,
    const Tensor& x_s, const Tensor& x_trans, double lambda1, double lambda2,
    Tensor* grad_f_rec, Tensor* grad_c, Tensor* grad_x_trans) {
  Check(f_raw.SameShape(f_rec), "f_raw / f_rec shape mismatch");
  Check(f_raw.ndim() == 2 && c_noisy.ndim() == 2, "features must be (N, D)");
  Check(c_noisy.dim(0) == f_raw.dim(0), "batch mismatch");
  const int n = f_raw.dim(0);
  FeatureCodecLossParts parts;

  double fid = 0.0;
  for (size_t i = 0; i < f_raw.size(); ++i) {
    const double d = static_cast<double>(f_raw[i]) - f_rec[i];
    fid += d * d;
  }
  parts.fidelity = fid / n;

  double l1 = 0.0;
  for (size_t i = 0; i < c_noisy.size(); ++i) l1 += std::fabs(static_cast<double>(c_noisy[i]));
  parts.rate = l1 / n;

  if (grad_x_trans) {
    parts.guidance = SatdWithGrad(x_trans, x_s, grad_x_trans);
    for (size_t i = 0; i < grad_x_trans->size(); ++i) {
      (*grad_x_trans)[i] *= static_cast<float>(lambda2);
    }
  } else {
    parts.guidance = Satd(x_s, x_trans);
  }

  if (grad_f_rec) {
    *grad_f_rec = Tensor(f_rec.shape());
    const float scale = 2.0f / static_cast<float>(n);
    for (size_t i = 0; i < f_rec.size(); ++i) {
      (*grad_f_rec)[i] = scale * (f_rec[i] - f_raw[i]);
    }
  }
  if (grad_c) {
    *grad_c = Tensor(c_noisy.shape());
    const float scale = static_cast<float>(lambda1) / static_cast<float>(n);
    for (size_t i = 0; i < c_noisy.size(); ++i) {
      (*grad_c)[i] =
          scale * (c_noisy[i] > 0.0f ? 1.0f : (c_noisy[i] < 0.0f ? -1.0f : 0.0f));
    }
  }

  parts.total = parts.fidelity + lambda1 * parts.rate + lambda2 * parts.guidance;
  return parts;
}

double GeneratorLoss(const std::vector<Tensor>& levels,
                     const std::vector<Tensor>& targets,
                     std::vector<Tensor>* grad_levels) {
  Check(levels.size() == targets.size(), "level/target count mismatch");
  Check(!levels.empty(), "no pyramid levels");
  if (grad_levels) grad_levels->assign(levels.size(), Tensor());
  double total = 0.0;
  for (size_t l = 0; l < levels.size(); ++l) {
    if (grad_levels) {
      total += SatdWithGrad(levels[l], targets[l], &(*grad_levels)[l]);
    } else {
      total += Satd(levels[l], targets[l]);
    }
  }
  return total;
}

double RdLoss(const Tensor& x_norm, const Tensor& x_norm_hat,
              const std::vector<double>& latent_likelihoods,
              double rate_weight, int* floored_count) {
  Check(x_norm.SameShape(x_norm_hat), "rd_loss shape mismatch");
  Check(x_norm.ndim() == 3, "rd_loss expects a single (H,W,C) image");
  Check(rate_weight > 0.0, "rate_weight must be positive");
  const double pixels = static_cast<double>(x_norm.dim(0)) * x_norm.dim(1);
  double bits = 0.0;
  int floored = 0;
  for (double p : latent_likelihoods) {
    Check(p <= 1.0, "likelihood above 1");
    if (p < kLikelihoodFloor) {
      p = kLikelihoodFloor;
      ++floored;
    }
    bits -= std::log2(p);
  }
  if (floored_count) *floored_count = floored;
  return rate_weight * bits / pixels + Satd(x_norm, x_norm_hat);
}

}  // namespace sfc
