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

#ifndef SFC_NN_H_
#define SFC_NN_H_

#include <memory>
#include <string>
#include <vector>

#include "sfc/rng.h"
#include "sfc/tensor.h"

namespace sfc {
namespace nn {

struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
  Tensor adam_m;
  Tensor adam_v;

  void SetShape(std::vector<int> shape) {
    value = Tensor(shape);
    grad = Tensor(shape);
    adam_m = Tensor(shape);
    adam_v = Tensor(shape);
  }
};

// A trainable stage with an explicit backward pass. Apply is the pure
// inference path and is safe to call concurrently on frozen weights; Forward
// additionally hands back the cache (the layer input) that Backward needs.
// Backward accumulates parameter gradients and returns the input gradient.
class Layer {
 public:
  virtual ~Layer() = default;
  virtual Tensor Apply(const Tensor& x) const = 0;
  virtual Tensor Forward(const Tensor& x, Tensor* cache) {
    *cache = x;
    return Apply(x);
  }
  virtual Tensor Backward(const Tensor& gy, const Tensor& cache) = 0;
  virtual void CollectParams(const std::string& prefix,
                             std::vector<Parameter*>* out) {}
  // Constraint projection after an optimizer step (e.g. GDN positivity).
  virtual void Project() {}
};

class Linear : public Layer {
 public:
  Linear(int in_dim, int out_dim, Rng& rng);
  Tensor Apply(const Tensor& x) const override;
  Tensor Backward(const Tensor& gy, const Tensor& cache) override;
  void CollectParams(const std::string& prefix,
                     std::vector<Parameter*>* out) override;
  Parameter& weights() { return w_; }
  Parameter& bias() { return b_; }

 private:
  int in_, out_;
  Parameter w_;  // (in, out)
  Parameter b_;  // (out)
};

class Relu : public Layer {
 public:
  Tensor Apply(const Tensor& x) const override;
  Tensor Backward(const Tensor& gy, const Tensor& cache) override;
};

class Clamp01 : public Layer {
 public:
  Tensor Apply(const Tensor& x) const override;
  Tensor Backward(const Tensor& gy, const Tensor& cache) override;
};

// 2-D convolution on (N, H, W, C), zero padding (k-1)/2, odd kernels.
class Conv2d : public Layer {
 public:
  Conv2d(int kernel, int in_ch, int out_ch, int stride, Rng& rng);
  Tensor Apply(const Tensor& x) const override;
  Tensor Backward(const Tensor& gy, const Tensor& cache) override;
  void CollectParams(const std::string& prefix,
                     std::vector<Parameter*>* out) override;
  Parameter& weights() { return w_; }
  Parameter& bias() { return b_; }

 private:
  int k_, cin_, cout_, stride_, pad_;
  Parameter w_;  // (k*k*cin, cout)
  Parameter b_;  // (cout)
};

// Transposed convolution realized as zero interleaving by `up` followed by a
// stride-1 same convolution; output is (N, H*up, W*up, out_ch).
class ConvTranspose2d : public Layer {
 public:
  ConvTranspose2d(int kernel, int in_ch, int out_ch, int up, Rng& rng);
  Tensor Apply(const Tensor& x) const override;
  Tensor Backward(const Tensor& gy, const Tensor& cache) override;
  void CollectParams(const std::string& prefix,
                     std::vector<Parameter*>* out) override;

 private:
  Tensor Stuff(const Tensor& x) const;
  int k_, cin_, cout_, up_, pad_;
  Parameter w_;
  Parameter b_;
};

// Generalized divisive normalization over the trailing axis:
//   y_i = x_i / sqrt(beta_i + sum_j gamma_ij x_j^2)        (forward form)
//   y_i = x_i * sqrt(beta_i + sum_j gamma_ij x_j^2)        (inverse form)
// Applies per feature vector on (N, C) and per spatial fiber on (N, H, W, C).
class Gdn : public Layer {
 public:
  Gdn(int channels, bool inverse, float gamma_init = 0.1f);
  Tensor Apply(const Tensor& x) const override;
  Tensor Backward(const Tensor& gy, const Tensor& cache) override;
  void CollectParams(const std::string& prefix,
                     std::vector<Parameter*>* out) override;
  void Project() override;

  Parameter& beta() { return beta_; }
  Parameter& gamma() { return gamma_; }

 private:
  int c_;
  bool inverse_;
  Parameter beta_;   // (C)
  Parameter gamma_;  // (C, C)
};

// Stateless GDN/IGDN evaluation on a single vector, used by tests and by the
// formula contract: beta entries must be positive, gamma entries nonnegative.
Tensor GdnEvaluate(const Tensor& x, const Tensor& beta, const Tensor& gamma,
                   bool inverse);

class BilinearUpsample2 : public Layer {
 public:
  Tensor Apply(const Tensor& x) const override;
  Tensor Backward(const Tensor& gy, const Tensor& cache) override;
};

class GlobalAvgPool : public Layer {
 public:
  Tensor Apply(const Tensor& x) const override;
  Tensor Backward(const Tensor& gy, const Tensor& cache) override;
};

// (N, D) <-> (N, h, w, c) with D == h*w*c.
class ReshapeToMap : public Layer {
 public:
  ReshapeToMap(int h, int w, int c) : h_(h), w_(w), c_(c) {}
  Tensor Apply(const Tensor& x) const override;
  Tensor Backward(const Tensor& gy, const Tensor& cache) override;

 private:
  int h_, w_, c_;
};

class Sequential : public Layer {
 public:
  Sequential() = default;
  Sequential(Sequential&&) = default;
  Sequential& operator=(Sequential&&) = default;

  template <typename L, typename... Args>
  L* Emplace(Args&&... args) {
    auto layer = std::make_unique<L>(std::forward<Args>(args)...);
    L* raw = layer.get();
    layers_.push_back(std::move(layer));
    return raw;
  }

  size_t size() const { return layers_.size(); }
  Layer& layer(size_t i) { return *layers_[i]; }

  Tensor Apply(const Tensor& x) const override;
  // Training pass that stores caches internally; pair with BackwardStored.
  Tensor ForwardStored(const Tensor& x);
  Tensor BackwardStored(const Tensor& gy);

  Tensor Forward(const Tensor& x, Tensor* cache) override;
  Tensor Backward(const Tensor& gy, const Tensor& cache) override;
  void CollectParams(const std::string& prefix,
                     std::vector<Parameter*>* out) override;
  void Project() override;

 private:
  std::vector<std::unique_ptr<Layer>> layers_;
  std::vector<Tensor> caches_;
};

class Adam {
 public:
  explicit Adam(double lr, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void set_learning_rate(double lr) { lr_ = lr; }
  double learning_rate() const { return lr_; }

  void Step(const std::vector<Parameter*>& params);
  static void ZeroGrads(const std::vector<Parameter*>& params);

 private:
  double lr_, beta1_, beta2_, eps_;
  long step_ = 0;
};

// Glorot-uniform fill: limit sqrt(6 / (fan_in + fan_out)).
void GlorotInit(Tensor* t, int fan_in, int fan_out, Rng& rng);

}  // namespace nn
}  // namespace sfc

#endif  // SFC_NN_H_
