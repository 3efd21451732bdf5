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

#ifndef SFC_TENSOR_H_
#define SFC_TENSOR_H_

#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <vector>

#include "sfc/common.h"

namespace sfc {

// Dense row-major float32 tensor. Images are (H, W, C), batches (N, H, W, C),
// vectors (D) or (N, D). All storage is contiguous; the last axis varies
// fastest.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
    size_t n = 1;
    for (int d : shape_) {
      Check(d >= 0, "negative tensor dimension");
      n *= static_cast<size_t>(d);
    }
    data_.assign(n, 0.0f);
  }
  Tensor(std::initializer_list<int> shape)
      : Tensor(std::vector<int>(shape)) {}

  static Tensor Zeros(std::vector<int> shape) { return Tensor(std::move(shape)); }
  static Tensor Full(std::vector<int> shape, float v) {
    Tensor t(std::move(shape));
    std::fill(t.data_.begin(), t.data_.end(), v);
    return t;
  }

  int ndim() const { return static_cast<int>(shape_.size()); }
  int dim(int i) const { return shape_[static_cast<size_t>(i)]; }
  const std::vector<int>& shape() const { return shape_; }
  size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  float* data() { return data_.data(); }
  const float* data() const { return data_.data(); }

  float& operator[](size_t i) { return data_[i]; }
  float operator[](size_t i) const { return data_[i]; }

  float& At(int i) { return data_[static_cast<size_t>(i)]; }
  float At(int i) const { return data_[static_cast<size_t>(i)]; }
  float& At(int i, int j) {
    return data_[static_cast<size_t>(i) * shape_[1] + j];
  }
  float At(int i, int j) const {
    return data_[static_cast<size_t>(i) * shape_[1] + j];
  }
  float& At(int i, int j, int k) {
    return data_[(static_cast<size_t>(i) * shape_[1] + j) * shape_[2] + k];
  }
  float At(int i, int j, int k) const {
    return data_[(static_cast<size_t>(i) * shape_[1] + j) * shape_[2] + k];
  }
  float& At(int i, int j, int k, int l) {
    return data_[((static_cast<size_t>(i) * shape_[1] + j) * shape_[2] + k) *
                     shape_[3] +
                 l];
  }
  float At(int i, int j, int k, int l) const {
    return data_[((static_cast<size_t>(i) * shape_[1] + j) * shape_[2] + k) *
                     shape_[3] +
                 l];
  }

  bool SameShape(const Tensor& o) const { return shape_ == o.shape_; }

  // Returns a copy with a new shape of identical element count.
  Tensor Reshaped(std::vector<int> shape) const {
    Tensor t(std::move(shape));
    Check(t.size() == size(), "reshape changes element count");
    t.data_ = data_;
    return t;
  }

  // Slice of the leading axis: element i of a (N, ...) batch as (...).
  Tensor Slice(int i) const {
    Check(ndim() >= 2, "Slice needs a batch axis");
    std::vector<int> s(shape_.begin() + 1, shape_.end());
    Tensor t(s);
    size_t stride = t.size();
    std::copy(data_.begin() + static_cast<ptrdiff_t>(i * stride),
              data_.begin() + static_cast<ptrdiff_t>((i + 1) * stride),
              t.data_.begin());
    return t;
  }

  void SetSlice(int i, const Tensor& piece) {
    size_t stride = piece.size();
    Check(static_cast<size_t>(i + 1) * stride <= size(), "SetSlice overflow");
    std::copy(piece.data_.begin(), piece.data_.end(),
              data_.begin() + static_cast<ptrdiff_t>(i * stride));
  }

 private:
  std::vector<int> shape_;
  std::vector<float> data_;
};

}  // namespace sfc

#endif  // SFC_TENSOR_H_
