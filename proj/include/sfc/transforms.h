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

#ifndef SFC_TRANSFORMS_H_
#define SFC_TRANSFORMS_H_

#include <utility>
#include <vector>

#include "sfc/tensor.h"

namespace sfc {

inline constexpr int kSatdBlockSize = 8;

enum class HadamardScaling {
  kNone,         // coefficients of H x Hᵀ with H entries ±1
  kOrthonormal,  // H/sqrt(B) per side; applying the transform twice is the
                 // identity
};

// Order-B Hadamard transform of a B x B block, B a power of two.
Tensor HadamardBlockTransform(const Tensor& block,
                              HadamardScaling scaling = HadamardScaling::kNone);

// Sum of Absolute Transformed Differences between two equally shaped images
// or batches ((H,W,C) or (N,H,W,C)). Each channel plane of (a-b) is split
// into 8x8 blocks (edges zero-padded), Hadamard-transformed, and the absolute
// coefficients are summed and divided by the element count N*H*W*C. Symmetric
// and non-negative; piecewise linear, so differentiable almost everywhere.
double Satd(const Tensor& a, const Tensor& b);

// Also accumulates d Satd / d a into `grad_a` (same shape as a, overwritten).
// d/d b is the negation.
double SatdWithGrad(const Tensor& a, const Tensor& b, Tensor* grad_a);

// Laplacian pyramid. `levels` holds the Gaussian levels coarsest-first
// (level 1 at index 0); level l has spatial size base * 2^(l-1). `details`
// holds, for levels 2..L, the residual between that level and the bilinear
// upsampling of the previous one, so Collapse inverts Build exactly.
struct Pyramid {
  std::vector<Tensor> levels;
  std::vector<Tensor> details;
};

Pyramid PyramidBuild(const Tensor& image, int num_levels);
Tensor PyramidCollapse(const Pyramid& pyramid);

// Min-max residual normalization (the side info travels in the bitstream as
// two little-endian IEEE-754 floats, r_min then r_max).
struct NormalizationSideInfo {
  float r_min = 0.0f;
  float r_max = 0.0f;
};

std::pair<Tensor, NormalizationSideInfo> MinmaxNormalize(const Tensor& resi);
Tensor MinmaxDenormalize(const Tensor& norm, const NormalizationSideInfo& side);

}  // namespace sfc

#endif  // SFC_TRANSFORMS_H_
