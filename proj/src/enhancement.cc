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

#include "sfc/enhancement.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "sfc/entropy.h"
#include "sfc/kernels.h"
#include "sfc/losses.h"
#include "sfc/range_coder.h"

using json = nlohmann::json;

namespace sfc {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;
constexpr double kLn2 = 0.69314718055994530942;

double NormalPdf(double t) { return kInvSqrt2Pi * std::exp(-0.5 * t * t); }

// Log-uniform sigma grid shared by encoder and decoder.
double SigmaOfBin(int bin) {
  const double step =
      (std::log(kSigmaMax) - std::log(kSigmaMin)) / (kSigmaBins - 1);
  return std::exp(std::log(kSigmaMin) + step * bin);
}

int BinOfSigma(double sigma) {
  const double s = std::clamp(sigma, kSigmaMin, kSigmaMax);
  const double step =
      (std::log(kSigmaMax) - std::log(kSigmaMin)) / (kSigmaBins - 1);
  const int bin = static_cast<int>(std::lround((std::log(s) - std::log(kSigmaMin)) / step));
  return std::clamp(bin, 0, kSigmaBins - 1);
}

// Coding tables for the sigma grid over the clipped integer alphabet.
struct ScaleTables {
  explicit ScaleTables(int clip) : clip_(clip) {
    const int a = 2 * clip + 1;
    cum.resize(kSigmaBins);
    total.resize(kSigmaBins);
    for (int b = 0; b < kSigmaBins; ++b) {
      const double sigma = SigmaOfBin(b);
      std::vector<double> w(static_cast<size_t>(a));
      for (int s = -clip; s <= clip; ++s) {
        w[static_cast<size_t>(s + clip)] =
            GaussianBinLikelihood(s, 0.0, sigma).p;
      }
      BuildQuantizedCdf(w, &cum[static_cast<size_t>(b)], &total[static_cast<size_t>(b)]);
    }
  }
  int clip_;
  std::vector<std::vector<uint32_t>> cum;
  std::vector<uint32_t> total;
};

// Per-channel tables for the factorized hyper prior.
struct ChannelTables {
  ChannelTables(const Tensor& mu, const Tensor& log_sigma, int clip) {
    const int c = mu.dim(0);
    cum.resize(static_cast<size_t>(c));
    total.resize(static_cast<size_t>(c));
    const int a = 2 * clip + 1;
    for (int ch = 0; ch < c; ++ch) {
      const double m = mu.At(ch);
      const double s = std::clamp(std::exp(static_cast<double>(log_sigma.At(ch))),
                                  kSigmaMin, kSigmaMax);
      std::vector<double> w(static_cast<size_t>(a));
      for (int v = -clip; v <= clip; ++v) {
        w[static_cast<size_t>(v + clip)] = GaussianBinLikelihood(v, m, s).p;
      }
      BuildQuantizedCdf(w, &cum[static_cast<size_t>(ch)], &total[static_cast<size_t>(ch)]);
    }
  }
  std::vector<std::vector<uint32_t>> cum;
  std::vector<uint32_t> total;
};

void EncodeSymbols(RangeEncoder* enc, const std::vector<int32_t>& symbols,
                   const std::vector<const uint32_t*>& cums,
                   const std::vector<uint32_t>& totals, int clip) {
  for (size_t i = 0; i < symbols.size(); ++i) {
    const size_t idx = static_cast<size_t>(symbols[i] + clip);
    enc->Encode(cums[i][idx], cums[i][idx + 1] - cums[i][idx], totals[i]);
  }
}

std::vector<int32_t> DecodeSymbols(RangeDecoder* dec, size_t count,
                                   const std::vector<const uint32_t*>& cums,
                                   const std::vector<uint32_t>& totals,
                                   int clip) {
  std::vector<int32_t> out(count);
  const int a = 2 * clip + 1;
  for (size_t i = 0; i < count; ++i) {
    const uint32_t f = dec->DecodeFreq(totals[i]);
    int lo = 0, hi = a;
    while (hi - lo > 1) {
      const int mid = (lo + hi) / 2;
      if (cums[i][mid] <= f) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    dec->Consume(cums[i][lo], cums[i][lo + 1] - cums[i][lo]);
    out[i] = lo - clip;
  }
  return out;
}

std::vector<int32_t> RoundClip(const Tensor& t, int clip) {
  std::vector<int32_t> out(t.size());
  for (size_t i = 0; i < t.size(); ++i) {
    const long v = std::lround(t[i]);
    out[i] = static_cast<int32_t>(std::clamp<long>(v, -clip, clip));
  }
  return out;
}

Tensor FromSymbols(const std::vector<int32_t>& symbols, std::vector<int> shape) {
  Tensor t(std::move(shape));
  Check(t.size() == symbols.size(), "symbol count mismatch");
  for (size_t i = 0; i < symbols.size(); ++i) {
    t[i] = static_cast<float>(symbols[i]);
  }
  return t;
}

}  // namespace

GaussianBin GaussianBinLikelihood(double v, double mu, double sigma) {
  const double a = (v + 0.5 - mu) / sigma;
  const double b = (v - 0.5 - mu) / sigma;
  double p;
  if (a + b >= 0.0) {
    // Right half: difference of upper tails keeps precision.
    p = 0.5 * (std::erfc(b * kInvSqrt2) - std::erfc(a * kInvSqrt2));
  } else {
    p = 0.5 * (std::erfc(-a * kInvSqrt2) - std::erfc(-b * kInvSqrt2));
  }
  const double pa = NormalPdf(a);
  const double pb = NormalPdf(b);
  GaussianBin out;
  out.p = std::max(p, 0.0);
  out.dp_dv = (pa - pb) / sigma;
  out.dp_dmu = -out.dp_dv;
  out.dp_dsigma = -(a * pa - b * pb) / sigma;
  return out;
}

EnhancementCodec::EnhancementCodec(const EnhancementConfig& cfg, Rng& rng)
    : cfg_(cfg) {
  cfg_.Validate();
  const int c1 = cfg_.analysis_channels[0];
  const int c2 = cfg_.analysis_channels[1];
  const int cy = cfg_.analysis_channels[2];
  const int k = cfg_.kernel;
  const int hk = cfg_.hyper_kernel;

  g_a_.Emplace<nn::Conv2d>(k, cfg_.channels, c1, 2, rng);
  g_a_.Emplace<nn::Gdn>(c1, /*inverse=*/false);
  g_a_.Emplace<nn::Conv2d>(k, c1, c2, 2, rng);
  g_a_.Emplace<nn::Gdn>(c2, /*inverse=*/false);
  g_a_.Emplace<nn::Conv2d>(k, c2, cy, 2, rng);

  g_s_.Emplace<nn::ConvTranspose2d>(k, cy, c2, 2, rng);
  g_s_.Emplace<nn::Gdn>(c2, /*inverse=*/true);
  g_s_.Emplace<nn::ConvTranspose2d>(k, c2, c1, 2, rng);
  g_s_.Emplace<nn::Gdn>(c1, /*inverse=*/true);
  g_s_.Emplace<nn::ConvTranspose2d>(k, c1, cfg_.channels, 2, rng);

  h_a_.Emplace<nn::Conv2d>(hk, cy, cfg_.hyper_channels, 1, rng);
  h_a_.Emplace<nn::Relu>();
  h_a_.Emplace<nn::Conv2d>(hk, cfg_.hyper_channels, cfg_.hyper_latent_channels, 2, rng);

  h_s_.Emplace<nn::ConvTranspose2d>(hk, cfg_.hyper_latent_channels,
                                    cfg_.hyper_channels, 2, rng);
  h_s_.Emplace<nn::Relu>();
  h_s_.Emplace<nn::Conv2d>(hk, cfg_.hyper_channels, cy, 1, rng);

  z_mu_.SetShape({cfg_.hyper_latent_channels});
  z_log_sigma_.SetShape({cfg_.hyper_latent_channels});
  // Start the factorized prior wide (sigma = e) so early large latents keep
  // nonzero likelihood.
  for (size_t i = 0; i < z_log_sigma_.value.size(); ++i) {
    z_log_sigma_.value[i] = 1.0f;
  }
}

Tensor EnhancementCodec::Analysis(const Tensor& norm) const {
  return g_a_.Apply(norm);
}
Tensor EnhancementCodec::Synthesis(const Tensor& y) const {
  return g_s_.Apply(y);
}
Tensor EnhancementCodec::HyperAnalysis(const Tensor& y_abs) const {
  return h_a_.Apply(y_abs);
}
Tensor EnhancementCodec::HyperSynthesis(const Tensor& z) const {
  return h_s_.Apply(z);
}

std::vector<nn::Parameter*> EnhancementCodec::Params() {
  std::vector<nn::Parameter*> out;
  g_a_.CollectParams("g_a", &out);
  g_s_.CollectParams("g_s", &out);
  h_a_.CollectParams("h_a", &out);
  h_s_.CollectParams("h_s", &out);
  z_mu_.name = "z_prior.mu";
  z_log_sigma_.name = "z_prior.log_sigma";
  out.push_back(&z_mu_);
  out.push_back(&z_log_sigma_);
  return out;
}

Bytes EnhancementCodec::EncodeEnhancement(const Tensor& x,
                                          const Tensor& x_base) const {
  Check(x.SameShape(x_base), "x / x_base shape mismatch");
  Check(x.ndim() == 3 && x.dim(0) == cfg_.image_size &&
            x.dim(1) == cfg_.image_size,
        "enhancement image size mismatch");
  Tensor resi(x.shape());
  for (size_t i = 0; i < x.size(); ++i) resi[i] = x[i] - x_base[i];
  auto [norm, side] = MinmaxNormalize(resi);

  const Tensor batch = norm.Reshaped({1, x.dim(0), x.dim(1), x.dim(2)});
  const Tensor y = g_a_.Apply(batch);
  Tensor y_abs(y.shape());
  for (size_t i = 0; i < y.size(); ++i) y_abs[i] = std::fabs(y[i]);
  const Tensor z = h_a_.Apply(y_abs);

  const int clip = cfg_.latent_clip;
  const auto z_sym = RoundClip(z, clip);
  const Tensor z_hat = FromSymbols(z_sym, z.shape());
  const Tensor log_sigma = h_s_.Apply(z_hat);
  const auto y_sym = RoundClip(y, clip);

  // Hyper block under the factorized per-channel prior.
  const ChannelTables ztab(z_mu_.value, z_log_sigma_.value, clip);
  const int cz = cfg_.hyper_latent_channels;
  Bytes hyper_block;
  {
    RangeEncoder enc;
    std::vector<const uint32_t*> cums(z_sym.size());
    std::vector<uint32_t> totals(z_sym.size());
    for (size_t i = 0; i < z_sym.size(); ++i) {
      const int ch = static_cast<int>(i % static_cast<size_t>(cz));
      cums[i] = ztab.cum[static_cast<size_t>(ch)].data();
      totals[i] = ztab.total[static_cast<size_t>(ch)];
    }
    EncodeSymbols(&enc, z_sym, cums, totals, clip);
    hyper_block = enc.Finish();
  }

  // Main block under the scale-conditioned Gaussian.
  static_assert(kSigmaBins > 1);
  const ScaleTables ytab(clip);
  Bytes main_block;
  {
    RangeEncoder enc;
    std::vector<const uint32_t*> cums(y_sym.size());
    std::vector<uint32_t> totals(y_sym.size());
    for (size_t i = 0; i < y_sym.size(); ++i) {
      const int bin = BinOfSigma(std::exp(static_cast<double>(
          std::clamp(log_sigma[i], std::log((float)kSigmaMin),
                     std::log((float)kSigmaMax)))));
      cums[i] = ytab.cum[static_cast<size_t>(bin)].data();
      totals[i] = ytab.total[static_cast<size_t>(bin)];
    }
    EncodeSymbols(&enc, y_sym, cums, totals, clip);
    main_block = enc.Finish();
  }

  ByteWriter w;
  w.U16(model_id_);
  w.Varint(static_cast<uint64_t>(y.dim(1)));
  w.Varint(static_cast<uint64_t>(y.dim(2)));
  w.F32(side.r_min);
  w.F32(side.r_max);
  w.Varint(hyper_block.size());
  w.Raw(hyper_block);
  w.Varint(main_block.size());
  w.Raw(main_block);
  w.U32(Crc32c(w.bytes()));
  return w.Take();
}

namespace {

struct ParsedPayload {
  uint16_t model_id;
  int yh, yw;
  NormalizationSideInfo side;
  Bytes hyper_block;
  Bytes main_block;
};

ParsedPayload ParsePayload(const Bytes& payload) {
  if (payload.size() < 4) throw DecodeError("enhancement payload too short");
  const size_t body = payload.size() - 4;
  const uint32_t stored = static_cast<uint32_t>(payload[body]) |
                          static_cast<uint32_t>(payload[body + 1]) << 8 |
                          static_cast<uint32_t>(payload[body + 2]) << 16 |
                          static_cast<uint32_t>(payload[body + 3]) << 24;
  if (Crc32c(payload.data(), body) != stored) {
    throw DecodeError("enhancement payload checksum mismatch");
  }
  ByteReader r(payload.data(), body);
  ParsedPayload out;
  out.model_id = r.U16();
  out.yh = static_cast<int>(r.Varint());
  out.yw = static_cast<int>(r.Varint());
  out.side.r_min = r.F32();
  out.side.r_max = r.F32();
  const size_t hlen = r.Varint();
  out.hyper_block = r.Raw(hlen);
  const size_t mlen = r.Varint();
  out.main_block = r.Raw(mlen);
  if (!r.AtEnd()) throw DecodeError("trailing bytes in enhancement payload");
  return out;
}

}  // namespace

Tensor EnhancementCodec::DecodeEnhancementResidual(const Bytes& payload) const {
  const ParsedPayload p = ParsePayload(payload);
  if (p.model_id != model_id_) {
    throw DecodeError("enhancement payload was coded with a different model");
  }
  const int clip = cfg_.latent_clip;
  const int cy = cfg_.analysis_channels[2];
  const int cz = cfg_.hyper_latent_channels;
  const int zh = p.yh / 2, zw = p.yw / 2;

  const ChannelTables ztab(z_mu_.value, z_log_sigma_.value, clip);
  const size_t z_count = static_cast<size_t>(zh) * zw * cz;
  std::vector<const uint32_t*> zcums(z_count);
  std::vector<uint32_t> ztotals(z_count);
  for (size_t i = 0; i < z_count; ++i) {
    const int ch = static_cast<int>(i % static_cast<size_t>(cz));
    zcums[i] = ztab.cum[static_cast<size_t>(ch)].data();
    ztotals[i] = ztab.total[static_cast<size_t>(ch)];
  }
  RangeDecoder zdec(p.hyper_block);
  const auto z_sym = DecodeSymbols(&zdec, z_count, zcums, ztotals, clip);
  const Tensor z_hat = FromSymbols(z_sym, {1, zh, zw, cz});

  const Tensor log_sigma = h_s_.Apply(z_hat);
  Check(log_sigma.dim(1) == p.yh && log_sigma.dim(2) == p.yw,
        "hyper synthesis size mismatch");

  const ScaleTables ytab(clip);
  const size_t y_count = static_cast<size_t>(p.yh) * p.yw * cy;
  std::vector<const uint32_t*> ycums(y_count);
  std::vector<uint32_t> ytotals(y_count);
  for (size_t i = 0; i < y_count; ++i) {
    const int bin = BinOfSigma(std::exp(static_cast<double>(
        std::clamp(log_sigma[i], std::log((float)kSigmaMin),
                   std::log((float)kSigmaMax)))));
    ycums[i] = ytab.cum[static_cast<size_t>(bin)].data();
    ytotals[i] = ytab.total[static_cast<size_t>(bin)];
  }
  RangeDecoder ydec(p.main_block);
  const auto y_sym = DecodeSymbols(&ydec, y_count, ycums, ytotals, clip);
  const Tensor y_hat = FromSymbols(y_sym, {1, p.yh, p.yw, cy});

  const Tensor norm_hat = g_s_.Apply(y_hat);
  const Tensor image = norm_hat.Reshaped(
      {norm_hat.dim(1), norm_hat.dim(2), norm_hat.dim(3)});
  return MinmaxDenormalize(image, p.side);
}

Tensor EnhancementCodec::DecodeEnhancement(const Bytes& payload,
                                           const Tensor& x_base) const {
  const Tensor resi = DecodeEnhancementResidual(payload);
  Check(resi.SameShape(x_base), "decoded residual shape mismatch");
  Tensor out(x_base.shape());
  for (size_t i = 0; i < out.size(); ++i) {
    out[i] = std::clamp(x_base[i] + resi[i], 0.0f, 1.0f);
  }
  return out;
}

Checkpoint EnhancementCodec::ToCheckpoint() const {
  json cfg;
  cfg["enhancement"] = json::parse(cfg_.ToJson());
  cfg["model_id"] = model_id_;
  auto* self = const_cast<EnhancementCodec*>(this);
  return Checkpoint::FromParams("enhancement", cfg.dump(), self->Params());
}

std::unique_ptr<EnhancementCodec> EnhancementCodec::FromCheckpoint(
    const Checkpoint& ck) {
  Check(ck.stage == "enhancement", "checkpoint is not an enhancement codec");
  const json cfg = json::parse(ck.config_json);
  const EnhancementConfig c = EnhancementConfig::FromJson(cfg.at("enhancement").dump());
  Rng rng(0);
  auto codec = std::make_unique<EnhancementCodec>(c, rng);
  codec->set_model_id(cfg.at("model_id").get<uint16_t>());
  ck.ToParams(codec->Params());
  return codec;
}

EnhancementTrainResult TrainEnhancement(EnhancementCodec* codec,
                                        const Tensor& train_x,
                                        const Tensor& train_xbase,
                                        const Tensor& val_x,
                                        const Tensor& val_xbase,
                                        double rate_weight, uint64_t seed) {
  const EnhancementConfig& cfg = codec->config();
  Check(train_x.SameShape(train_xbase), "train pair shape mismatch");
  const int n = train_x.dim(0);
  const int s = cfg.image_size;
  const int c = cfg.channels;
  Check(n > 0, "empty training set");
  Check(rate_weight > 0.0, "rate_weight must be positive");

  // Per-image normalized residuals, computed once.
  Tensor norm_all({n, s, s, c});
  for (int i = 0; i < n; ++i) {
    Tensor resi({s, s, c});
    const size_t off = static_cast<size_t>(i) * s * s * c;
    for (size_t j = 0; j < resi.size(); ++j) {
      resi[j] = train_x[off + j] - train_xbase[off + j];
    }
    auto [norm, side] = MinmaxNormalize(resi);
    norm_all.SetSlice(i, norm);
  }

  auto params = codec->Params();
  nn::Adam adam(cfg.learning_rate);
  Rng rng(seed);
  Rng noise = rng.Fork("latent-noise");
  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);

  const float log_lo = std::log(static_cast<float>(kSigmaMin));
  const float log_hi = std::log(static_cast<float>(kSigmaMax));

  EnhancementTrainResult result;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.Shuffle(order);
    double epoch_loss = 0.0;
    int batches = 0;
    for (int start = 0; start < n; start += cfg.batch_size) {
      const int bs = std::min(cfg.batch_size, n - start);
      Tensor nb({bs, s, s, c});
      for (int i = 0; i < bs; ++i) {
        nb.SetSlice(i, norm_all.Slice(order[static_cast<size_t>(start + i)]));
      }

      nn::Adam::ZeroGrads(params);
      Tensor y = codec->analysis().ForwardStored(nb);
      Tensor y_abs(y.shape());
      for (size_t i = 0; i < y.size(); ++i) y_abs[i] = std::fabs(y[i]);
      Tensor z = codec->hyper_analysis().ForwardStored(y_abs);

      Tensor z_noisy(z.shape());
      for (size_t i = 0; i < z.size(); ++i) {
        z_noisy[i] = z[i] + static_cast<float>(noise.NextUniform(-0.5, 0.5));
      }
      Tensor t_raw = codec->hyper_synthesis().ForwardStored(z_noisy);

      Tensor y_noisy(y.shape());
      for (size_t i = 0; i < y.size(); ++i) {
        y_noisy[i] = y[i] + static_cast<float>(noise.NextUniform(-0.5, 0.5));
      }
      Tensor x_hat = codec->synthesis().ForwardStored(y_noisy);

      Tensor g_xhat;
      const double satd = SatdWithGrad(x_hat, nb, &g_xhat);

      // Rate of the main latent under the predicted scales.
      const double rw_norm = rate_weight / (static_cast<double>(bs) * s * s);
      double bits = 0.0;
      Tensor g_ynoisy(y.shape());
      Tensor g_t(t_raw.shape());
      for (size_t i = 0; i < y.size(); ++i) {
        const float tc = std::clamp(t_raw[i], log_lo, log_hi);
        const double sigma = std::exp(static_cast<double>(tc));
        const auto bin = GaussianBinLikelihood(y_noisy[i], 0.0, sigma);
        const double p = std::max(bin.p, kLikelihoodFloor);
        bits -= std::log2(p);
        const double scale = -rw_norm / (p * kLn2);
        g_ynoisy[i] = static_cast<float>(scale * bin.dp_dv);
        const bool inside = t_raw[i] > log_lo && t_raw[i] < log_hi;
        g_t[i] = inside ? static_cast<float>(scale * bin.dp_dsigma * sigma) : 0.0f;
      }

      // Rate of the hyper latent under the factorized prior.
      const int cz = cfg.hyper_latent_channels;
      Tensor g_znoisy(z.shape());
      for (size_t i = 0; i < z.size(); ++i) {
        const int ch = static_cast<int>(i % static_cast<size_t>(cz));
        const double mu = codec->z_mean().value.At(ch);
        const double sg = std::clamp(
            std::exp(static_cast<double>(codec->z_log_sigma().value.At(ch))),
            kSigmaMin, kSigmaMax);
        const auto bin = GaussianBinLikelihood(z_noisy[i], mu, sg);
        const double p = std::max(bin.p, kLikelihoodFloor);
        bits -= std::log2(p);
        const double scale = -rw_norm / (p * kLn2);
        g_znoisy[i] = static_cast<float>(scale * bin.dp_dv);
        codec->z_mean().grad.At(ch) += static_cast<float>(scale * bin.dp_dmu);
        codec->z_log_sigma().grad.At(ch) +=
            static_cast<float>(scale * bin.dp_dsigma * sg);
      }

      const double loss =
          rate_weight * bits / (static_cast<double>(bs) * s * s) + satd;
      epoch_loss += loss;
      ++batches;

      // Backward: distortion into the synthesis path plus rate into both
      // latents; noise injection is additive, gradients pass through.
      Tensor g_y = codec->synthesis().BackwardStored(g_xhat);
      for (size_t i = 0; i < g_y.size(); ++i) g_y[i] += g_ynoisy[i];

      Tensor g_z = codec->hyper_synthesis().BackwardStored(g_t);
      for (size_t i = 0; i < g_z.size(); ++i) g_z[i] += g_znoisy[i];
      Tensor g_yabs = codec->hyper_analysis().BackwardStored(g_z);
      for (size_t i = 0; i < g_y.size(); ++i) {
        g_y[i] += g_yabs[i] * (y[i] > 0.0f ? 1.0f : (y[i] < 0.0f ? -1.0f : 0.0f));
      }
      codec->analysis().BackwardStored(g_y);

      adam.Step(params);
      codec->analysis().Project();
      codec->synthesis().Project();
    }
    result.log.push_back({epoch, epoch_loss / batches, cfg.learning_rate});
  }

  // Validation through the real coding path.
  const int vn = val_x.dim(0);
  double bpp = 0.0, vsatd = 0.0, psnr = 0.0;
  for (int i = 0; i < vn; ++i) {
    const Tensor x = val_x.Slice(i);
    const Tensor xb = val_xbase.Slice(i);
    const Bytes payload = codec->EncodeEnhancement(x, xb);
    const Tensor x_rec = codec->DecodeEnhancement(payload, xb);
    bpp += 8.0 * static_cast<double>(payload.size()) / (s * s);
    Tensor resi(x.shape());
    for (size_t j = 0; j < resi.size(); ++j) resi[j] = x[j] - xb[j];
    auto [normed, side] = MinmaxNormalize(resi);
    Tensor rec_resi = codec->DecodeEnhancementResidual(payload);
    auto [rec_norm, side2] = MinmaxNormalize(rec_resi);
    vsatd += Satd(normed, rec_norm);
    double mse = 0.0;
    for (size_t j = 0; j < x.size(); ++j) {
      const double d = static_cast<double>(x[j]) - x_rec[j];
      mse += d * d;
    }
    mse /= static_cast<double>(x.size());
    psnr += mse > 0.0 ? 10.0 * std::log10(1.0 / mse) : 99.0;
  }
  result.val_bpp = bpp / vn;
  result.val_satd = vsatd / vn;
  result.val_psnr = psnr / vn;
  return result;
}

}  // namespace sfc
