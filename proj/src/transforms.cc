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

#include "sfc/transforms.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sfc/common.h"
#include "sfc/kernels.h"

namespace sfc {

namespace {

bool IsPowerOfTwo(int v) { return v > 0 && (v & (v - 1)) == 0; }

// Shape normalization: images (H,W,C) and batches (N,H,W,C) both reduce to a
// list of channel planes.
struct PlaneView {
  int n = 1, h = 0, w = 0, c = 0;
};

PlaneView ViewOf(const Tensor& t) {
  PlaneView v;
  if (t.ndim() == 3) {
    v.h = t.dim(0);
    v.w = t.dim(1);
    v.c = t.dim(2);
  } else if (t.ndim() == 4) {
    v.n = t.dim(0);
    v.h = t.dim(1);
    v.w = t.dim(2);
    v.c = t.dim(3);
  } else {
    throw InvalidArgumentError("satd expects (H,W,C) or (N,H,W,C)");
  }
  return v;
}

}  // namespace

Tensor HadamardBlockTransform(const Tensor& block, HadamardScaling scaling) {
  Check(block.ndim() == 2 && block.dim(0) == block.dim(1),
        "hadamard transform expects a square block");
  const int b = block.dim(0);
  if (!IsPowerOfTwo(b)) {
    throw InvalidArgumentError("hadamard block size must be a power of two");
  }
  Tensor out = block;
  kernels::HadamardBlock(out.data(), b);
  if (scaling == HadamardScaling::kOrthonormal) {
    const float s = 1.0f / static_cast<float>(b);
    for (size_t i = 0; i < out.size(); ++i) out[i] *= s;
  }
  return out;
}

double Satd(const Tensor& a, const Tensor& b) {
  Check(a.SameShape(b), "satd arguments must share a shape");
  const PlaneView v = ViewOf(a);
  double total = 0.0;
  // Channel planes are strided within HWC storage: plane (img, ci) has row
  // stride w*c in floats, starting at offset ci. SatdPlaneSum takes stride in
  // elements of its own scalar grid, so gather each plane densely first.
  std::vector<float> pa(static_cast<size_t>(v.h) * v.w);
  std::vector<float> pb(pa.size());
  for (int img = 0; img < v.n; ++img) {
    const float* abase = a.data() + static_cast<size_t>(img) * v.h * v.w * v.c;
    const float* bbase = b.data() + static_cast<size_t>(img) * v.h * v.w * v.c;
    for (int ci = 0; ci < v.c; ++ci) {
      for (int y = 0; y < v.h; ++y) {
        for (int x = 0; x < v.w; ++x) {
          pa[static_cast<size_t>(y) * v.w + x] =
              abase[(static_cast<size_t>(y) * v.w + x) * v.c + ci];
          pb[static_cast<size_t>(y) * v.w + x] =
              bbase[(static_cast<size_t>(y) * v.w + x) * v.c + ci];
        }
      }
      total += kernels::SatdPlaneSum(pa.data(), pb.data(), v.h, v.w, v.w,
                                     kSatdBlockSize);
    }
  }
  return total / static_cast<double>(a.size());
}

double SatdWithGrad(const Tensor& a, const Tensor& b, Tensor* grad_a) {
  Check(a.SameShape(b), "satd arguments must share a shape");
  const PlaneView v = ViewOf(a);
  *grad_a = Tensor(a.shape());
  const double scale = 1.0 / static_cast<double>(a.size());
  double total = 0.0;
  std::vector<float> pa(static_cast<size_t>(v.h) * v.w);
  std::vector<float> pb(pa.size());
  std::vector<float> pg(pa.size());
  for (int img = 0; img < v.n; ++img) {
    const size_t base = static_cast<size_t>(img) * v.h * v.w * v.c;
    for (int ci = 0; ci < v.c; ++ci) {
      for (int y = 0; y < v.h; ++y) {
        for (int x = 0; x < v.w; ++x) {
          const size_t src = base + (static_cast<size_t>(y) * v.w + x) * v.c + ci;
          pa[static_cast<size_t>(y) * v.w + x] = a.data()[src];
          pb[static_cast<size_t>(y) * v.w + x] = b.data()[src];
        }
      }
      total += kernels::SatdPlaneSum(pa.data(), pb.data(), v.h, v.w, v.w,
                                     kSatdBlockSize);
      std::fill(pg.begin(), pg.end(), 0.0f);
      kernels::SatdPlaneGrad(pa.data(), pb.data(), pg.data(), v.h, v.w, v.w,
                             kSatdBlockSize);
      for (int y = 0; y < v.h; ++y) {
        for (int x = 0; x < v.w; ++x) {
          grad_a->data()[base + (static_cast<size_t>(y) * v.w + x) * v.c + ci] =
              static_cast<float>(scale) * pg[static_cast<size_t>(y) * v.w + x];
        }
      }
    }
  }
  return total * scale;
}

Pyramid PyramidBuild(const Tensor& image, int num_levels) {
  Check(image.ndim() == 3, "pyramid_build expects (H,W,C)");
  Check(num_levels >= 1, "pyramid needs at least one level");
  const int h = image.dim(0), w = image.dim(1), c = image.dim(2);
  const int factor = 1 << (num_levels - 1);
  if (h % factor != 0 || w % factor != 0) {
    throw InvalidArgumentError(
        "image size must be divisible by 2^(levels-1) for pyramid_build");
  }
  Pyramid p;
  p.levels.resize(static_cast<size_t>(num_levels));
  p.details.resize(static_cast<size_t>(num_levels) - 1);
  p.levels[static_cast<size_t>(num_levels) - 1] = image;
  for (int l = num_levels - 1; l >= 1; --l) {
    const Tensor& fine = p.levels[static_cast<size_t>(l)];
    const int fh = fine.dim(0), fw = fine.dim(1);
    Tensor coarse({fh / 2, fw / 2, c});
    kernels::DownsampleX2(fine.data(), coarse.data(), 1, fh, fw, c);
    Tensor up({fh, fw, c});
    kernels::UpsampleX2(coarse.data(), up.data(), 1, fh / 2, fw / 2, c);
    Tensor detail({fh, fw, c});
    for (size_t i = 0; i < detail.size(); ++i) detail[i] = fine[i] - up[i];
    p.details[static_cast<size_t>(l) - 1] = std::move(detail);
    p.levels[static_cast<size_t>(l) - 1] = std::move(coarse);
  }
  return p;
}

Tensor PyramidCollapse(const Pyramid& pyramid) {
  Check(!pyramid.levels.empty(), "empty pyramid");
  if (pyramid.details.size() + 1 != pyramid.levels.size()) {
    throw InvalidArgumentError("pyramid detail count must be levels-1");
  }
  Tensor cur = pyramid.levels[0];
  for (size_t l = 0; l < pyramid.details.size(); ++l) {
    const int h = cur.dim(0), w = cur.dim(1), c = cur.dim(2);
    Tensor up({h * 2, w * 2, c});
    kernels::UpsampleX2(cur.data(), up.data(), 1, h, w, c);
    const Tensor& detail = pyramid.details[l];
    Check(detail.SameShape(up), "pyramid detail shape mismatch");
    for (size_t i = 0; i < up.size(); ++i) up[i] += detail[i];
    cur = std::move(up);
  }
  return cur;
}

std::pair<Tensor, NormalizationSideInfo> MinmaxNormalize(const Tensor& resi) {
  Check(resi.size() > 0, "empty residual");
  float lo = std::numeric_limits<float>::infinity();
  float hi = -std::numeric_limits<float>::infinity();
  for (size_t i = 0; i < resi.size(); ++i) {
    lo = std::min(lo, resi[i]);
    hi = std::max(hi, resi[i]);
  }
  Check(std::isfinite(lo) && std::isfinite(hi), "residual must be finite");
  NormalizationSideInfo side{lo, hi};
  Tensor out(resi.shape());
  if (hi == lo) {
    // Constant residual: all zeros, the constant travels in the side info.
    return {std::move(out), side};
  }
  const float inv = 1.0f / (hi - lo);
  for (size_t i = 0; i < resi.size(); ++i) out[i] = (resi[i] - lo) * inv;
  return {std::move(out), side};
}

Tensor MinmaxDenormalize(const Tensor& norm, const NormalizationSideInfo& side) {
  Tensor out(norm.shape());
  const float span = side.r_max - side.r_min;
  for (size_t i = 0; i < norm.size(); ++i) out[i] = norm[i] * span + side.r_min;
  return out;
}

}  // namespace sfc
