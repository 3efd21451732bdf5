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

#include "sfc/nn.h"

#include <cmath>
#include <cstring>

#include "sfc/common.h"
#include "sfc/kernels.h"

namespace sfc {
namespace nn {

namespace {

constexpr float kBetaMin = 1e-6f;

// (rows, C) view of (N, C) or (N, H, W, C).
int TrailingChannels(const Tensor& x) { return x.dim(x.ndim() - 1); }
int LeadingRows(const Tensor& x) {
  return static_cast<int>(x.size()) / TrailingChannels(x);
}

}  // namespace

void GlorotInit(Tensor* t, int fan_in, int fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / (fan_in + fan_out));
  for (size_t i = 0; i < t->size(); ++i) {
    (*t)[i] = static_cast<float>(rng.NextUniform(-limit, limit));
  }
}

// ---------------------------------------------------------------------------
// Linear

Linear::Linear(int in_dim, int out_dim, Rng& rng) : in_(in_dim), out_(out_dim) {
  w_.SetShape({in_, out_});
  b_.SetShape({out_});
  GlorotInit(&w_.value, in_, out_, rng);
}

Tensor Linear::Apply(const Tensor& x) const {
  Check(x.ndim() == 2 && x.dim(1) == in_, "linear input shape mismatch");
  const int n = x.dim(0);
  Tensor y({n, out_});
  kernels::Gemm(x.data(), w_.value.data(), y.data(), n, in_, out_);
  kernels::AddBiasRows(y.data(), b_.value.data(), n, out_);
  return y;
}

Tensor Linear::Backward(const Tensor& gy, const Tensor& cache) {
  const int n = cache.dim(0);
  kernels::GemmTN(cache.data(), gy.data(), w_.grad.data(), in_, n, out_,
                  /*accumulate=*/true);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < out_; ++j) b_.grad[static_cast<size_t>(j)] += gy.At(i, j);
  }
  Tensor gx({n, in_});
  kernels::GemmNT(gy.data(), w_.value.data(), gx.data(), n, out_, in_);
  return gx;
}

void Linear::CollectParams(const std::string& prefix,
                           std::vector<Parameter*>* out) {
  w_.name = prefix + ".w";
  b_.name = prefix + ".b";
  out->push_back(&w_);
  out->push_back(&b_);
}

// ---------------------------------------------------------------------------
// Relu / Clamp01

Tensor Relu::Apply(const Tensor& x) const {
  Tensor y(x.shape());
  kernels::ReluForward(x.data(), y.data(), x.size());
  return y;
}

Tensor Relu::Backward(const Tensor& gy, const Tensor& cache) {
  Tensor gx(cache.shape());
  kernels::ReluBackward(cache.data(), gy.data(), gx.data(), cache.size());
  return gx;
}

Tensor Clamp01::Apply(const Tensor& x) const {
  Tensor y(x.shape());
  kernels::Clamp01Forward(x.data(), y.data(), x.size());
  return y;
}

Tensor Clamp01::Backward(const Tensor& gy, const Tensor& cache) {
  Tensor gx(cache.shape());
  kernels::Clamp01Backward(cache.data(), gy.data(), gx.data(), cache.size());
  return gx;
}

// ---------------------------------------------------------------------------
// Conv2d

Conv2d::Conv2d(int kernel, int in_ch, int out_ch, int stride, Rng& rng)
    : k_(kernel), cin_(in_ch), cout_(out_ch), stride_(stride),
      pad_((kernel - 1) / 2) {
  Check(kernel % 2 == 1, "conv kernels must be odd");
  w_.SetShape({k_ * k_ * cin_, cout_});
  b_.SetShape({cout_});
  GlorotInit(&w_.value, k_ * k_ * cin_, k_ * k_ * cout_, rng);
}

Tensor Conv2d::Apply(const Tensor& x) const {
  Check(x.ndim() == 4 && x.dim(3) == cin_, "conv input shape mismatch");
  const int n = x.dim(0), h = x.dim(1), w = x.dim(2);
  const int oh = (h + 2 * pad_ - k_) / stride_ + 1;
  const int ow = (w + 2 * pad_ - k_) / stride_ + 1;
  const int cols = k_ * k_ * cin_;
  Tensor y({n, oh, ow, cout_});
  std::vector<float> colbuf(static_cast<size_t>(oh) * ow * cols);
  for (int img = 0; img < n; ++img) {
    const float* src = x.data() + static_cast<size_t>(img) * h * w * cin_;
    kernels::Im2Col(src, h, w, cin_, k_, stride_, pad_, colbuf.data(), oh, ow);
    float* dst = y.data() + static_cast<size_t>(img) * oh * ow * cout_;
    kernels::Gemm(colbuf.data(), w_.value.data(), dst, oh * ow, cols, cout_);
    kernels::AddBiasRows(dst, b_.value.data(), oh * ow, cout_);
  }
  return y;
}

Tensor Conv2d::Backward(const Tensor& gy, const Tensor& cache) {
  const int n = cache.dim(0), h = cache.dim(1), w = cache.dim(2);
  const int oh = gy.dim(1), ow = gy.dim(2);
  const int cols = k_ * k_ * cin_;
  Tensor gx(cache.shape());
  std::vector<float> colbuf(static_cast<size_t>(oh) * ow * cols);
  std::vector<float> gcolbuf(colbuf.size());
  for (int img = 0; img < n; ++img) {
    const float* src = cache.data() + static_cast<size_t>(img) * h * w * cin_;
    const float* g = gy.data() + static_cast<size_t>(img) * oh * ow * cout_;
    kernels::Im2Col(src, h, w, cin_, k_, stride_, pad_, colbuf.data(), oh, ow);
    kernels::GemmTN(colbuf.data(), g, w_.grad.data(), cols, oh * ow, cout_,
                    /*accumulate=*/true);
    for (int r = 0; r < oh * ow; ++r) {
      for (int f = 0; f < cout_; ++f) {
        b_.grad[static_cast<size_t>(f)] += g[static_cast<size_t>(r) * cout_ + f];
      }
    }
    kernels::GemmNT(g, w_.value.data(), gcolbuf.data(), oh * ow, cout_, cols);
    kernels::Col2Im(gcolbuf.data(), h, w, cin_, k_, stride_, pad_,
                    gx.data() + static_cast<size_t>(img) * h * w * cin_, oh, ow);
  }
  return gx;
}

void Conv2d::CollectParams(const std::string& prefix,
                           std::vector<Parameter*>* out) {
  w_.name = prefix + ".w";
  b_.name = prefix + ".b";
  out->push_back(&w_);
  out->push_back(&b_);
}

// ---------------------------------------------------------------------------
// ConvTranspose2d

ConvTranspose2d::ConvTranspose2d(int kernel, int in_ch, int out_ch, int up,
                                 Rng& rng)
    : k_(kernel), cin_(in_ch), cout_(out_ch), up_(up), pad_((kernel - 1) / 2) {
  Check(kernel % 2 == 1, "deconv kernels must be odd");
  Check(up >= 1, "upsampling factor must be >= 1");
  w_.SetShape({k_ * k_ * cin_, cout_});
  b_.SetShape({cout_});
  GlorotInit(&w_.value, k_ * k_ * cin_ / (up * up), k_ * k_ * cout_, rng);
}

Tensor ConvTranspose2d::Stuff(const Tensor& x) const {
  const int n = x.dim(0), h = x.dim(1), w = x.dim(2);
  Tensor s({n, h * up_, w * up_, cin_});
  for (int img = 0; img < n; ++img) {
    for (int y = 0; y < h; ++y) {
      for (int xx = 0; xx < w; ++xx) {
        const float* srcp =
            x.data() + ((static_cast<size_t>(img) * h + y) * w + xx) * cin_;
        float* dstp =
            s.data() + ((static_cast<size_t>(img) * h * up_ + y * up_) * w * up_ +
                        xx * up_) *
                           cin_;
        std::memcpy(dstp, srcp, sizeof(float) * static_cast<size_t>(cin_));
      }
    }
  }
  return s;
}

Tensor ConvTranspose2d::Apply(const Tensor& x) const {
  Check(x.ndim() == 4 && x.dim(3) == cin_, "deconv input shape mismatch");
  const Tensor stuffed = Stuff(x);
  const int n = x.dim(0), h = stuffed.dim(1), w = stuffed.dim(2);
  const int cols = k_ * k_ * cin_;
  Tensor y({n, h, w, cout_});
  std::vector<float> colbuf(static_cast<size_t>(h) * w * cols);
  for (int img = 0; img < n; ++img) {
    const float* src = stuffed.data() + static_cast<size_t>(img) * h * w * cin_;
    kernels::Im2Col(src, h, w, cin_, k_, 1, pad_, colbuf.data(), h, w);
    float* dst = y.data() + static_cast<size_t>(img) * h * w * cout_;
    kernels::Gemm(colbuf.data(), w_.value.data(), dst, h * w, cols, cout_);
    kernels::AddBiasRows(dst, b_.value.data(), h * w, cout_);
  }
  return y;
}

Tensor ConvTranspose2d::Backward(const Tensor& gy, const Tensor& cache) {
  const Tensor stuffed = Stuff(cache);
  const int n = cache.dim(0), h = stuffed.dim(1), w = stuffed.dim(2);
  const int cols = k_ * k_ * cin_;
  Tensor gstuff(stuffed.shape());
  std::vector<float> colbuf(static_cast<size_t>(h) * w * cols);
  std::vector<float> gcolbuf(colbuf.size());
  for (int img = 0; img < n; ++img) {
    const float* src = stuffed.data() + static_cast<size_t>(img) * h * w * cin_;
    const float* g = gy.data() + static_cast<size_t>(img) * h * w * cout_;
    kernels::Im2Col(src, h, w, cin_, k_, 1, pad_, colbuf.data(), h, w);
    kernels::GemmTN(colbuf.data(), g, w_.grad.data(), cols, h * w, cout_,
                    /*accumulate=*/true);
    for (int r = 0; r < h * w; ++r) {
      for (int f = 0; f < cout_; ++f) {
        b_.grad[static_cast<size_t>(f)] += g[static_cast<size_t>(r) * cout_ + f];
      }
    }
    kernels::GemmNT(g, w_.value.data(), gcolbuf.data(), h * w, cout_, cols);
    kernels::Col2Im(gcolbuf.data(), h, w, cin_, k_, 1, pad_,
                    gstuff.data() + static_cast<size_t>(img) * h * w * cin_, h,
                    w);
  }
  // Un-stuff: gradients at the interleaved sample positions.
  const int sh = cache.dim(1), sw = cache.dim(2);
  Tensor gx(cache.shape());
  for (int img = 0; img < n; ++img) {
    for (int y = 0; y < sh; ++y) {
      for (int xx = 0; xx < sw; ++xx) {
        const float* s =
            gstuff.data() +
            ((static_cast<size_t>(img) * h + y * up_) * w + xx * up_) * cin_;
        float* d = gx.data() + ((static_cast<size_t>(img) * sh + y) * sw + xx) * cin_;
        std::memcpy(d, s, sizeof(float) * static_cast<size_t>(cin_));
      }
    }
  }
  return gx;
}

void ConvTranspose2d::CollectParams(const std::string& prefix,
                                    std::vector<Parameter*>* out) {
  w_.name = prefix + ".w";
  b_.name = prefix + ".b";
  out->push_back(&w_);
  out->push_back(&b_);
}

// ---------------------------------------------------------------------------
// GDN

Gdn::Gdn(int channels, bool inverse, float gamma_init)
    : c_(channels), inverse_(inverse) {
  beta_.SetShape({c_});
  gamma_.SetShape({c_, c_});
  for (int i = 0; i < c_; ++i) {
    beta_.value.At(i) = 1.0f;
    gamma_.value.At(i, i) = gamma_init;
  }
}

Tensor GdnEvaluate(const Tensor& x, const Tensor& beta, const Tensor& gamma,
                   bool inverse) {
  const int c = x.dim(x.ndim() - 1);
  Check(beta.ndim() == 1 && beta.dim(0) == c, "gdn beta shape mismatch");
  Check(gamma.ndim() == 2 && gamma.dim(0) == c && gamma.dim(1) == c,
        "gdn gamma shape mismatch");
  for (int i = 0; i < c; ++i) {
    Check(beta.At(i) > 0.0f, "gdn beta entries must be positive");
  }
  for (size_t i = 0; i < gamma.size(); ++i) {
    Check(gamma[i] >= 0.0f, "gdn gamma entries must be nonnegative");
  }
  const int rows = static_cast<int>(x.size()) / c;
  Tensor y(x.shape());
  for (int p = 0; p < rows; ++p) {
    const float* xp = x.data() + static_cast<size_t>(p) * c;
    float* yp = y.data() + static_cast<size_t>(p) * c;
    for (int i = 0; i < c; ++i) {
      double s = beta.At(i);
      for (int j = 0; j < c; ++j) {
        s += static_cast<double>(gamma.At(i, j)) * xp[j] * xp[j];
      }
      const double root = std::sqrt(s);
      yp[i] = static_cast<float>(inverse ? xp[i] * root : xp[i] / root);
    }
  }
  return y;
}

Tensor Gdn::Apply(const Tensor& x) const {
  Check(TrailingChannels(x) == c_, "gdn channel mismatch");
  const int rows = LeadingRows(x);
  Tensor y(x.shape());
  const float* beta = beta_.value.data();
  const float* gamma = gamma_.value.data();
  const bool inverse = inverse_;
  const int c = c_;
#pragma omp parallel for schedule(static)
  for (int p = 0; p < rows; ++p) {
    const float* xp = x.data() + static_cast<size_t>(p) * c;
    float* yp = y.data() + static_cast<size_t>(p) * c;
    for (int i = 0; i < c; ++i) {
      float s = beta[i];
      const float* grow = gamma + static_cast<size_t>(i) * c;
      for (int j = 0; j < c; ++j) s += grow[j] * xp[j] * xp[j];
      const float root = std::sqrt(s);
      yp[i] = inverse ? xp[i] * root : xp[i] / root;
    }
  }
  return y;
}

Tensor Gdn::Backward(const Tensor& gy, const Tensor& cache) {
  const int rows = LeadingRows(cache);
  const int c = c_;
  const float* beta = beta_.value.data();
  const float* gamma = gamma_.value.data();

  // u_pi = +- (1/2) gy_pi x_pi s_pi^e with e = -3/2 (forward) or -1/2
  // (inverse); shared by all three gradients.
  Tensor u({rows, c});
  Tensor x2({rows, c});
  Tensor gx(cache.shape());
  const bool inverse = inverse_;
#pragma omp parallel for schedule(static)
  for (int p = 0; p < rows; ++p) {
    const float* xp = cache.data() + static_cast<size_t>(p) * c;
    const float* gyp = gy.data() + static_cast<size_t>(p) * c;
    float* up = u.data() + static_cast<size_t>(p) * c;
    float* x2p = x2.data() + static_cast<size_t>(p) * c;
    float* gxp = gx.data() + static_cast<size_t>(p) * c;
    for (int j = 0; j < c; ++j) x2p[j] = xp[j] * xp[j];
    for (int i = 0; i < c; ++i) {
      float s = beta[i];
      const float* grow = gamma + static_cast<size_t>(i) * c;
      for (int j = 0; j < c; ++j) s += grow[j] * x2p[j];
      const float root = std::sqrt(s);
      if (inverse) {
        up[i] = 0.5f * gyp[i] * xp[i] / root;
        gxp[i] = gyp[i] * root;  // diagonal term; cross term added below
      } else {
        up[i] = -0.5f * gyp[i] * xp[i] / (s * root);
        gxp[i] = gyp[i] / root;
      }
    }
  }

  // gbeta_i = sum_p u_pi ; ggamma_ij = sum_p u_pi x_pj^2 ;
  // gx_pk += 2 x_pk sum_i u_pi gamma_ik.
  for (int p = 0; p < rows; ++p) {
    const float* up = u.data() + static_cast<size_t>(p) * c;
    for (int i = 0; i < c; ++i) beta_.grad[static_cast<size_t>(i)] += up[i];
  }
  kernels::GemmTN(u.data(), x2.data(), gamma_.grad.data(), c, rows, c,
                  /*accumulate=*/true);
  Tensor v({rows, c});
  kernels::Gemm(u.data(), gamma, v.data(), rows, c, c);
#pragma omp parallel for schedule(static)
  for (int p = 0; p < rows; ++p) {
    const float* xp = cache.data() + static_cast<size_t>(p) * c;
    const float* vp = v.data() + static_cast<size_t>(p) * c;
    float* gxp = gx.data() + static_cast<size_t>(p) * c;
    for (int k = 0; k < c; ++k) gxp[k] += 2.0f * xp[k] * vp[k];
  }
  return gx;
}

void Gdn::CollectParams(const std::string& prefix,
                        std::vector<Parameter*>* out) {
  beta_.name = prefix + ".beta";
  gamma_.name = prefix + ".gamma";
  out->push_back(&beta_);
  out->push_back(&gamma_);
}

void Gdn::Project() {
  for (size_t i = 0; i < beta_.value.size(); ++i) {
    if (beta_.value[i] < kBetaMin) beta_.value[i] = kBetaMin;
  }
  for (size_t i = 0; i < gamma_.value.size(); ++i) {
    if (gamma_.value[i] < 0.0f) gamma_.value[i] = 0.0f;
  }
}

// ---------------------------------------------------------------------------
// Resampling / pooling / reshape

Tensor BilinearUpsample2::Apply(const Tensor& x) const {
  Check(x.ndim() == 4, "upsample expects (N,H,W,C)");
  const int n = x.dim(0), h = x.dim(1), w = x.dim(2), c = x.dim(3);
  Tensor y({n, h * 2, w * 2, c});
  kernels::UpsampleX2(x.data(), y.data(), n, h, w, c);
  return y;
}

Tensor BilinearUpsample2::Backward(const Tensor& gy, const Tensor& cache) {
  const int n = cache.dim(0), h = cache.dim(1), w = cache.dim(2),
            c = cache.dim(3);
  Tensor gx(cache.shape());
  kernels::UpsampleX2Backward(gy.data(), gx.data(), n, h, w, c);
  return gx;
}

Tensor GlobalAvgPool::Apply(const Tensor& x) const {
  Check(x.ndim() == 4, "pool expects (N,H,W,C)");
  const int n = x.dim(0), h = x.dim(1), w = x.dim(2), c = x.dim(3);
  Tensor y({n, c});
  const float inv = 1.0f / static_cast<float>(h * w);
  for (int img = 0; img < n; ++img) {
    for (int p = 0; p < h * w; ++p) {
      const float* s = x.data() + (static_cast<size_t>(img) * h * w + p) * c;
      float* d = y.data() + static_cast<size_t>(img) * c;
      for (int ci = 0; ci < c; ++ci) d[ci] += inv * s[ci];
    }
  }
  return y;
}

Tensor GlobalAvgPool::Backward(const Tensor& gy, const Tensor& cache) {
  const int n = cache.dim(0), h = cache.dim(1), w = cache.dim(2),
            c = cache.dim(3);
  Tensor gx(cache.shape());
  const float inv = 1.0f / static_cast<float>(h * w);
  for (int img = 0; img < n; ++img) {
    const float* g = gy.data() + static_cast<size_t>(img) * c;
    for (int p = 0; p < h * w; ++p) {
      float* d = gx.data() + (static_cast<size_t>(img) * h * w + p) * c;
      for (int ci = 0; ci < c; ++ci) d[ci] = inv * g[ci];
    }
  }
  return gx;
}

Tensor ReshapeToMap::Apply(const Tensor& x) const {
  Check(x.ndim() == 2 && x.dim(1) == h_ * w_ * c_, "reshape size mismatch");
  return x.Reshaped({x.dim(0), h_, w_, c_});
}

Tensor ReshapeToMap::Backward(const Tensor& gy, const Tensor& cache) {
  return gy.Reshaped({cache.dim(0), cache.dim(1)});
}

// ---------------------------------------------------------------------------
// Sequential

Tensor Sequential::Apply(const Tensor& x) const {
  Tensor cur = x;
  for (const auto& l : layers_) cur = l->Apply(cur);
  return cur;
}

Tensor Sequential::ForwardStored(const Tensor& x) {
  caches_.assign(layers_.size(), Tensor());
  Tensor cur = x;
  for (size_t i = 0; i < layers_.size(); ++i) {
    cur = layers_[i]->Forward(cur, &caches_[i]);
  }
  return cur;
}

Tensor Sequential::BackwardStored(const Tensor& gy) {
  Check(caches_.size() == layers_.size(), "Backward without Forward");
  Tensor cur = gy;
  for (size_t i = layers_.size(); i-- > 0;) {
    cur = layers_[i]->Backward(cur, caches_[i]);
  }
  return cur;
}

Tensor Sequential::Forward(const Tensor& x, Tensor* cache) {
  *cache = x;
  return ForwardStored(x);
}

Tensor Sequential::Backward(const Tensor& gy, const Tensor& cache) {
  (void)cache;
  return BackwardStored(gy);
}

void Sequential::CollectParams(const std::string& prefix,
                               std::vector<Parameter*>* out) {
  for (size_t i = 0; i < layers_.size(); ++i) {
    layers_[i]->CollectParams(prefix + "." + std::to_string(i), out);
  }
}

void Sequential::Project() {
  for (auto& l : layers_) l->Project();
}

// ---------------------------------------------------------------------------
// Adam

void Adam::Step(const std::vector<Parameter*>& params) {
  ++step_;
  const float bias1 = static_cast<float>(1.0 - std::pow(beta1_, step_));
  const float bias2 = static_cast<float>(1.0 - std::pow(beta2_, step_));
  for (Parameter* p : params) {
    kernels::AdamStep(p->value.data(), p->grad.data(), p->adam_m.data(),
                      p->adam_v.data(), p->value.size(),
                      static_cast<float>(lr_), static_cast<float>(beta1_),
                      static_cast<float>(beta2_), static_cast<float>(eps_),
                      bias1, bias2);
  }
}

void Adam::ZeroGrads(const std::vector<Parameter*>& params) {
  for (Parameter* p : params) {
    std::fill(p->grad.data(), p->grad.data() + p->grad.size(), 0.0f);
  }
}

}  // namespace nn
}  // namespace sfc
