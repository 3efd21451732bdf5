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

#ifndef SFC_ENHANCEMENT_H_
#define SFC_ENHANCEMENT_H_

#include <memory>
#include <vector>

#include "sfc/checkpoint.h"
#include "sfc/config.h"
#include "sfc/extractor.h"
#include "sfc/nn.h"
#include "sfc/transforms.h"

namespace sfc {

// Scale-table discretization for the conditionally Gaussian main latent:
// sigma is clamped to [kSigmaMin, kSigmaMax] and binned log-uniformly so the
// encoder and decoder address identical coding tables.
inline constexpr double kSigmaMin = 0.03;
inline constexpr double kSigmaMax = 128.0;
inline constexpr int kSigmaBins = 64;

// Variational residual codec: three stride-2 conv analysis stages with GDN,
// mirrored IGDN synthesis, and a two-stage hyper transform predicting the
// scale of a zero-mean Gaussian entropy model for the main latent. The hyper
// latent is coded with a learned per-channel factorized Gaussian.
class EnhancementCodec {
 public:
  EnhancementCodec(const EnhancementConfig& cfg, Rng& rng);

  const EnhancementConfig& config() const { return cfg_; }
  uint16_t model_id() const { return model_id_; }
  void set_model_id(uint16_t id) { model_id_ = id; }

  // Payload: model-ID u16 | latent dims (2 varints) | side info (8 bytes,
  // f32 r_min then r_max) | hyper block (varint length + bytes) | main block
  // (varint length + bytes) | CRC-32C.
  Bytes EncodeEnhancement(const Tensor& x, const Tensor& x_base) const;
  Tensor DecodeEnhancement(const Bytes& payload, const Tensor& x_base) const;
  // Denormalized synthesized residual before the Eq.-6 addition and clamp.
  Tensor DecodeEnhancementResidual(const Bytes& payload) const;

  // Transform stages (batched, (N,S,S,C) maps).
  Tensor Analysis(const Tensor& norm) const;
  Tensor Synthesis(const Tensor& y) const;
  Tensor HyperAnalysis(const Tensor& y_abs) const;
  Tensor HyperSynthesis(const Tensor& z) const;  // raw log-scale map

  nn::Sequential& analysis() { return g_a_; }
  nn::Sequential& synthesis() { return g_s_; }
  nn::Sequential& hyper_analysis() { return h_a_; }
  nn::Sequential& hyper_synthesis() { return h_s_; }
  nn::Parameter& z_mean() { return z_mu_; }
  nn::Parameter& z_log_sigma() { return z_log_sigma_; }
  std::vector<nn::Parameter*> Params();

  Checkpoint ToCheckpoint() const;
  static std::unique_ptr<EnhancementCodec> FromCheckpoint(const Checkpoint& ck);

 private:
  EnhancementConfig cfg_;
  uint16_t model_id_ = 0;
  nn::Sequential g_a_, g_s_, h_a_, h_s_;
  nn::Parameter z_mu_;         // (Cz)
  nn::Parameter z_log_sigma_;  // (Cz)
};

// Unit-bin Gaussian integral and partials, shared by training and coding:
// p = Phi((v + 0.5 - mu) / sigma) - Phi((v - 0.5 - mu) / sigma).
struct GaussianBin {
  double p;
  double dp_dv;
  double dp_dmu;
  double dp_dsigma;
};
GaussianBin GaussianBinLikelihood(double v, double mu, double sigma);

struct EnhancementTrainResult {
  std::vector<EpochLog> log;
  double val_bpp = 0.0;   // coded payload bits per pixel on the val pairs
  double val_satd = 0.0;  // distortion in the normalized domain
  double val_psnr = 0.0;  // x_rec vs x after the full decode path
};

// Trains one operating point on (x, x_base) image pairs at the given
// rate_weight; deterministic in the seed.
EnhancementTrainResult TrainEnhancement(EnhancementCodec* codec,
                                        const Tensor& train_x,
                                        const Tensor& train_xbase,
                                        const Tensor& val_x,
                                        const Tensor& val_xbase,
                                        double rate_weight, uint64_t seed);

}  // namespace sfc

#endif  // SFC_ENHANCEMENT_H_
