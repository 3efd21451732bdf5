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

#include "sfc/kernels.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <vector>

namespace sfc {
namespace kernels {

void Gemm(const float* a, const float* b, float* c, int m, int k, int n,
          bool accumulate) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i) {
    float* crow = c + static_cast<size_t>(i) * n;
    if (!accumulate) std::memset(crow, 0, sizeof(float) * static_cast<size_t>(n));
    const float* arow = a + static_cast<size_t>(i) * k;
    for (int kk = 0; kk < k; ++kk) {
      const float av = arow[kk];
      if (av == 0.0f) continue;
      const float* brow = b + static_cast<size_t>(kk) * n;
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

void GemmTN(const float* a, const float* b, float* c, int m, int k, int n,
            bool accumulate) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i) {
    float* crow = c + static_cast<size_t>(i) * n;
    if (!accumulate) std::memset(crow, 0, sizeof(float) * static_cast<size_t>(n));
    for (int kk = 0; kk < k; ++kk) {
      const float av = a[static_cast<size_t>(kk) * m + i];
      if (av == 0.0f) continue;
      const float* brow = b + static_cast<size_t>(kk) * n;
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

void GemmNT(const float* a, const float* b, float* c, int m, int k, int n,
            bool accumulate) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i) {
    const float* arow = a + static_cast<size_t>(i) * k;
    float* crow = c + static_cast<size_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      const float* brow = b + static_cast<size_t>(j) * k;
      float acc = accumulate ? crow[j] : 0.0f;
      for (int kk = 0; kk < k; ++kk) acc += arow[kk] * brow[kk];
      crow[j] = acc;
    }
  }
}

void AddBiasRows(float* c, const float* bias, int rows, int n) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < rows; ++i) {
    float* crow = c + static_cast<size_t>(i) * n;
    for (int j = 0; j < n; ++j) crow[j] += bias[j];
  }
}

void Im2Col(const float* src, int h, int w, int c, int k, int stride, int pad,
            float* dst, int oh, int ow) {
  const int cols = k * k * c;
#pragma omp parallel for schedule(static)
  for (int row = 0; row < oh * ow; ++row) {
    const int oy = row / ow;
    const int ox = row % ow;
    float* drow = dst + static_cast<size_t>(row) * cols;
    for (int ky = 0; ky < k; ++ky) {
      const int sy = oy * stride - pad + ky;
      for (int kx = 0; kx < k; ++kx) {
        const int sx = ox * stride - pad + kx;
        float* cell = drow + (static_cast<size_t>(ky) * k + kx) * c;
        if (sy < 0 || sy >= h || sx < 0 || sx >= w) {
          std::memset(cell, 0, sizeof(float) * static_cast<size_t>(c));
        } else {
          const float* s = src + (static_cast<size_t>(sy) * w + sx) * c;
          std::memcpy(cell, s, sizeof(float) * static_cast<size_t>(c));
        }
      }
    }
  }
}

void Col2Im(const float* cols, int h, int w, int c, int k, int stride, int pad,
            float* dst, int oh, int ow) {
  const int ncols = k * k * c;
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      float* d = dst + (static_cast<size_t>(y) * w + x) * c;
      std::memset(d, 0, sizeof(float) * static_cast<size_t>(c));
      for (int ky = 0; ky < k; ++ky) {
        const int ty = y + pad - ky;
        if (ty < 0 || ty % stride != 0) continue;
        const int oy = ty / stride;
        if (oy >= oh) continue;
        for (int kx = 0; kx < k; ++kx) {
          const int tx = x + pad - kx;
          if (tx < 0 || tx % stride != 0) continue;
          const int ox = tx / stride;
          if (ox >= ow) continue;
          const float* cell = cols + static_cast<size_t>(oy * ow + ox) * ncols +
                              (static_cast<size_t>(ky) * k + kx) * c;
          for (int ci = 0; ci < c; ++ci) d[ci] += cell[ci];
        }
      }
    }
  }
}

void DownsampleX2(const float* src, float* dst, int n, int h, int w, int c) {
  const int oh = h / 2, ow = w / 2;
  const size_t splane = static_cast<size_t>(h) * w * c;
  const size_t dplane = static_cast<size_t>(oh) * ow * c;
#pragma omp parallel for schedule(static)
  for (int row = 0; row < n * oh; ++row) {
    const int img = row / oh;
    const int oy = row % oh;
    const float* s = src + static_cast<size_t>(img) * splane;
    float* d = dst + static_cast<size_t>(img) * dplane;
    for (int ox = 0; ox < ow; ++ox) {
      for (int ci = 0; ci < c; ++ci) {
        const float v00 = s[(static_cast<size_t>(2 * oy) * w + 2 * ox) * c + ci];
        const float v01 = s[(static_cast<size_t>(2 * oy) * w + 2 * ox + 1) * c + ci];
        const float v10 = s[(static_cast<size_t>(2 * oy + 1) * w + 2 * ox) * c + ci];
        const float v11 = s[(static_cast<size_t>(2 * oy + 1) * w + 2 * ox + 1) * c + ci];
        d[(static_cast<size_t>(oy) * ow + ox) * c + ci] =
            0.25f * (v00 + v01 + v10 + v11);
      }
    }
  }
}

void DownsampleX2Backward(const float* gdst, float* gsrc, int n, int h, int w,
                          int c) {
  const int oh = h / 2, ow = w / 2;
  const size_t splane = static_cast<size_t>(h) * w * c;
  const size_t dplane = static_cast<size_t>(oh) * ow * c;
#pragma omp parallel for schedule(static)
  for (int img = 0; img < n; ++img) {
    const float* g = gdst + static_cast<size_t>(img) * dplane;
    float* gs = gsrc + static_cast<size_t>(img) * splane;
    for (int y = 0; y < h; ++y) {
      const int oy = y / 2;
      for (int x = 0; x < w; ++x) {
        const int ox = x / 2;
        for (int ci = 0; ci < c; ++ci) {
          gs[(static_cast<size_t>(y) * w + x) * c + ci] =
              (oy < oh && ox < ow)
                  ? 0.25f * g[(static_cast<size_t>(oy) * ow + ox) * c + ci]
                  : 0.0f;
        }
      }
    }
  }
}

namespace {

// Half-pixel-centred factor-2 source coordinate of output index i:
// s = i/2 - 0.25. Returns the two tap indices (clamped) and weights.
inline void UpTaps(int i, int n, int* t0, int* t1, float* w0, float* w1) {
  const float s = 0.5f * static_cast<float>(i) - 0.25f;
  const int f = static_cast<int>(std::floor(s));
  const float t = s - static_cast<float>(f);
  *t0 = std::clamp(f, 0, n - 1);
  *t1 = std::clamp(f + 1, 0, n - 1);
  *w0 = 1.0f - t;
  *w1 = t;
}

}  // namespace

void UpsampleX2(const float* src, float* dst, int n, int h, int w, int c) {
  const int oh = h * 2, ow = w * 2;
  const size_t splane = static_cast<size_t>(h) * w * c;
  const size_t dplane = static_cast<size_t>(oh) * ow * c;
#pragma omp parallel for schedule(static)
  for (int row = 0; row < n * oh; ++row) {
    const int img = row / oh;
    const int oy = row % oh;
    const float* s = src + static_cast<size_t>(img) * splane;
    float* d = dst + static_cast<size_t>(img) * dplane +
               static_cast<size_t>(oy) * ow * c;
    int y0, y1;
    float wy0, wy1;
    UpTaps(oy, h, &y0, &y1, &wy0, &wy1);
    for (int ox = 0; ox < ow; ++ox) {
      int x0, x1;
      float wx0, wx1;
      UpTaps(ox, w, &x0, &x1, &wx0, &wx1);
      const float* r0 = s + static_cast<size_t>(y0) * w * c;
      const float* r1 = s + static_cast<size_t>(y1) * w * c;
      for (int ci = 0; ci < c; ++ci) {
        d[static_cast<size_t>(ox) * c + ci] =
            wy0 * (wx0 * r0[static_cast<size_t>(x0) * c + ci] +
                   wx1 * r0[static_cast<size_t>(x1) * c + ci]) +
            wy1 * (wx0 * r1[static_cast<size_t>(x0) * c + ci] +
                   wx1 * r1[static_cast<size_t>(x1) * c + ci]);
      }
    }
  }
}

void UpsampleX2Backward(const float* gdst, float* gsrc, int n, int h, int w,
                        int c) {
  const int oh = h * 2, ow = w * 2;
  const size_t splane = static_cast<size_t>(h) * w * c;
  const size_t dplane = static_cast<size_t>(oh) * ow * c;
  // Gather form of the adjoint: for each source pixel, visit the output
  // window that can reference it and accumulate matching tap weights.
#pragma omp parallel for schedule(static)
  for (int row = 0; row < n * h; ++row) {
    const int img = row / h;
    const int y = row % h;
    const float* g = gdst + static_cast<size_t>(img) * dplane;
    float* gs = gsrc + static_cast<size_t>(img) * splane +
                static_cast<size_t>(y) * w * c;
    const int oyLo = std::max(0, 2 * y - 1);
    const int oyHi = std::min(oh - 1, 2 * y + 2);
    for (int x = 0; x < w; ++x) {
      const int oxLo = std::max(0, 2 * x - 1);
      const int oxHi = std::min(ow - 1, 2 * x + 2);
      float* cell = gs + static_cast<size_t>(x) * c;
      for (int ci = 0; ci < c; ++ci) cell[ci] = 0.0f;
      for (int oy = oyLo; oy <= oyHi; ++oy) {
        int y0, y1;
        float wy0, wy1;
        UpTaps(oy, h, &y0, &y1, &wy0, &wy1);
        float wy = 0.0f;
        if (y0 == y) wy += wy0;
        if (y1 == y) wy += wy1;
        if (wy == 0.0f) continue;
        const float* grow = g + static_cast<size_t>(oy) * ow * c;
        for (int ox = oxLo; ox <= oxHi; ++ox) {
          int x0, x1;
          float wx0, wx1;
          UpTaps(ox, w, &x0, &x1, &wx0, &wx1);
          float wx = 0.0f;
          if (x0 == x) wx += wx0;
          if (x1 == x) wx += wx1;
          if (wx == 0.0f) continue;
          const float wgt = wy * wx;
          const float* gcell = grow + static_cast<size_t>(ox) * c;
          for (int ci = 0; ci < c; ++ci) cell[ci] += wgt * gcell[ci];
        }
      }
    }
  }
}

namespace {

inline float CubicWeight(float d) {
  const float a = -0.5f;
  const float ad = std::fabs(d);
  if (ad <= 1.0f) return ((a + 2.0f) * ad - (a + 3.0f)) * ad * ad + 1.0f;
  if (ad < 2.0f) return a * (((ad - 5.0f) * ad + 8.0f) * ad - 4.0f);
  return 0.0f;
}

}  // namespace

void ResizeBicubic(const float* src, int h, int w, int c, float* dst, int oh,
                   int ow) {
  const float sy = static_cast<float>(h) / static_cast<float>(oh);
  const float sx = static_cast<float>(w) / static_cast<float>(ow);
#pragma omp parallel for schedule(static)
  for (int oy = 0; oy < oh; ++oy) {
    const float fy = (static_cast<float>(oy) + 0.5f) * sy - 0.5f;
    const int iy = static_cast<int>(std::floor(fy));
    float wy[4];
    int ty[4];
    for (int t = 0; t < 4; ++t) {
      ty[t] = std::clamp(iy - 1 + t, 0, h - 1);
      wy[t] = CubicWeight(fy - static_cast<float>(iy - 1 + t));
    }
    float* drow = dst + static_cast<size_t>(oy) * ow * c;
    for (int ox = 0; ox < ow; ++ox) {
      const float fx = (static_cast<float>(ox) + 0.5f) * sx - 0.5f;
      const int ix = static_cast<int>(std::floor(fx));
      float wx[4];
      int tx[4];
      for (int t = 0; t < 4; ++t) {
        tx[t] = std::clamp(ix - 1 + t, 0, w - 1);
        wx[t] = CubicWeight(fx - static_cast<float>(ix - 1 + t));
      }
      for (int ci = 0; ci < c; ++ci) {
        float acc = 0.0f;
        for (int t = 0; t < 4; ++t) {
          const float* srow = src + static_cast<size_t>(ty[t]) * w * c;
          float rowacc = 0.0f;
          for (int u = 0; u < 4; ++u) {
            rowacc += wx[u] * srow[static_cast<size_t>(tx[u]) * c + ci];
          }
          acc += wy[t] * rowacc;
        }
        drow[static_cast<size_t>(ox) * c + ci] = acc;
      }
    }
  }
}

void HadamardBlock(float* block, int b) {
  // Rows.
  for (int r = 0; r < b; ++r) {
    float* row = block + static_cast<size_t>(r) * b;
    for (int len = 1; len < b; len <<= 1) {
      for (int i = 0; i < b; i += len << 1) {
        for (int j = i; j < i + len; ++j) {
          const float u = row[j];
          const float v = row[j + len];
          row[j] = u + v;
          row[j + len] = u - v;
        }
      }
    }
  }
  // Columns.
  for (int len = 1; len < b; len <<= 1) {
    for (int i = 0; i < b; i += len << 1) {
      for (int j = i; j < i + len; ++j) {
        float* rj = block + static_cast<size_t>(j) * b;
        float* rl = block + static_cast<size_t>(j + len) * b;
        for (int col = 0; col < b; ++col) {
          const float u = rj[col];
          const float v = rl[col];
          rj[col] = u + v;
          rl[col] = u - v;
        }
      }
    }
  }
}

namespace {

inline void LoadDiffBlock(const float* a, const float* b, int h, int w,
                          int stride, int by, int bx, int blk, float* out) {
  for (int y = 0; y < blk; ++y) {
    const int sy = by + y;
    float* row = out + static_cast<size_t>(y) * blk;
    if (sy >= h) {
      std::memset(row, 0, sizeof(float) * static_cast<size_t>(blk));
      continue;
    }
    for (int x = 0; x < blk; ++x) {
      const int sxp = bx + x;
      row[x] = (sxp < w) ? a[static_cast<size_t>(sy) * stride + sxp] -
                               b[static_cast<size_t>(sy) * stride + sxp]
                         : 0.0f;
    }
  }
}

}  // namespace

double SatdPlaneSum(const float* a, const float* b, int h, int w, int stride,
                    int block) {
  const int nby = (h + block - 1) / block;
  const int nbx = (w + block - 1) / block;
  std::vector<double> partial(static_cast<size_t>(nby) * nbx, 0.0);
#pragma omp parallel
  {
    std::vector<float> buf(static_cast<size_t>(block) * block);
#pragma omp for schedule(static)
    for (int bi = 0; bi < nby * nbx; ++bi) {
      const int by = (bi / nbx) * block;
      const int bx = (bi % nbx) * block;
      LoadDiffBlock(a, b, h, w, stride, by, bx, block, buf.data());
      HadamardBlock(buf.data(), block);
      double s = 0.0;
      for (float v : buf) s += std::fabs(static_cast<double>(v));
      partial[static_cast<size_t>(bi)] = s;
    }
  }
  double total = 0.0;
  for (double p : partial) total += p;  // fixed order
  return total;
}

void SatdPlaneGrad(const float* a, const float* b, float* ga, int h, int w,
                   int stride, int block) {
  const int nby = (h + block - 1) / block;
  const int nbx = (w + block - 1) / block;
#pragma omp parallel
  {
    std::vector<float> buf(static_cast<size_t>(block) * block);
#pragma omp for schedule(static)
    for (int bi = 0; bi < nby * nbx; ++bi) {
      const int by = (bi / nbx) * block;
      const int bx = (bi % nbx) * block;
      LoadDiffBlock(a, b, h, w, stride, by, bx, block, buf.data());
      HadamardBlock(buf.data(), block);
      for (float& v : buf) v = (v > 0.0f) ? 1.0f : (v < 0.0f ? -1.0f : 0.0f);
      // H is symmetric, so the adjoint is another forward transform.
      HadamardBlock(buf.data(), block);
      for (int y = 0; y < block && by + y < h; ++y) {
        for (int x = 0; x < block && bx + x < w; ++x) {
          ga[static_cast<size_t>(by + y) * stride + bx + x] +=
              buf[static_cast<size_t>(y) * block + x];
        }
      }
    }
  }
}

void ReluForward(const float* x, float* y, size_t n) {
#pragma omp parallel for schedule(static)
  for (ptrdiff_t i = 0; i < static_cast<ptrdiff_t>(n); ++i) {
    y[i] = x[i] > 0.0f ? x[i] : 0.0f;
  }
}

void ReluBackward(const float* x, const float* gy, float* gx, size_t n) {
#pragma omp parallel for schedule(static)
  for (ptrdiff_t i = 0; i < static_cast<ptrdiff_t>(n); ++i) {
    gx[i] = x[i] > 0.0f ? gy[i] : 0.0f;
  }
}

void Clamp01Forward(const float* x, float* y, size_t n) {
#pragma omp parallel for schedule(static)
  for (ptrdiff_t i = 0; i < static_cast<ptrdiff_t>(n); ++i) {
    y[i] = std::clamp(x[i], 0.0f, 1.0f);
  }
}

void Clamp01Backward(const float* x, const float* gy, float* gx, size_t n) {
#pragma omp parallel for schedule(static)
  for (ptrdiff_t i = 0; i < static_cast<ptrdiff_t>(n); ++i) {
    gx[i] = (x[i] >= 0.0f && x[i] <= 1.0f) ? gy[i] : 0.0f;
  }
}

void AdamStep(float* value, const float* grad, float* m, float* v, size_t n,
              float lr, float beta1, float beta2, float eps, float bias1,
              float bias2) {
#pragma omp parallel for schedule(static)
  for (ptrdiff_t i = 0; i < static_cast<ptrdiff_t>(n); ++i) {
    m[i] = beta1 * m[i] + (1.0f - beta1) * grad[i];
    v[i] = beta2 * v[i] + (1.0f - beta2) * grad[i] * grad[i];
    const float mhat = m[i] / bias1;
    const float vhat = v[i] / bias2;
    value[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

namespace serial {

void Gemm(const float* a, const float* b, float* c, int m, int k, int n,
          bool accumulate) {
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      double acc = accumulate ? c[static_cast<size_t>(i) * n + j] : 0.0;
      for (int kk = 0; kk < k; ++kk) {
        acc += static_cast<double>(a[static_cast<size_t>(i) * k + kk]) *
               static_cast<double>(b[static_cast<size_t>(kk) * n + j]);
      }
      c[static_cast<size_t>(i) * n + j] = static_cast<float>(acc);
    }
  }
}

void Conv2d(const float* x, int h, int w, int c, const float* weights,
            const float* bias, int kernel, int stride, int pad, float* y,
            int oh, int ow, int f) {
  for (int oy = 0; oy < oh; ++oy) {
    for (int ox = 0; ox < ow; ++ox) {
      for (int fo = 0; fo < f; ++fo) {
        double acc = bias ? bias[fo] : 0.0;
        for (int ky = 0; ky < kernel; ++ky) {
          const int sy = oy * stride - pad + ky;
          if (sy < 0 || sy >= h) continue;
          for (int kx = 0; kx < kernel; ++kx) {
            const int sx = ox * stride - pad + kx;
            if (sx < 0 || sx >= w) continue;
            for (int ci = 0; ci < c; ++ci) {
              acc += static_cast<double>(
                         x[(static_cast<size_t>(sy) * w + sx) * c + ci]) *
                     weights[((static_cast<size_t>(ky) * kernel + kx) * c + ci) *
                                 f +
                             fo];
            }
          }
        }
        y[(static_cast<size_t>(oy) * ow + ox) * f + fo] =
            static_cast<float>(acc);
      }
    }
  }
}

double SatdPlaneSum(const float* a, const float* b, int h, int w, int stride,
                    int block) {
  // Dense-matrix route: H[i][j] = (-1)^popcount(i & j), explicit triple
  // product per block.
  std::vector<double> hm(static_cast<size_t>(block) * block);
  for (int i = 0; i < block; ++i) {
    for (int j = 0; j < block; ++j) {
      hm[static_cast<size_t>(i) * block + j] =
          (__builtin_popcount(static_cast<unsigned>(i & j)) & 1) ? -1.0 : 1.0;
    }
  }
  std::vector<double> d(static_cast<size_t>(block) * block);
  std::vector<double> t(static_cast<size_t>(block) * block);
  double total = 0.0;
  for (int by = 0; by < h; by += block) {
    for (int bx = 0; bx < w; bx += block) {
      for (int y = 0; y < block; ++y) {
        for (int x = 0; x < block; ++x) {
          const int sy = by + y, sx = bx + x;
          d[static_cast<size_t>(y) * block + x] =
              (sy < h && sx < w)
                  ? static_cast<double>(a[static_cast<size_t>(sy) * stride + sx]) -
                        static_cast<double>(b[static_cast<size_t>(sy) * stride + sx])
                  : 0.0;
        }
      }
      // t = H * d
      for (int i = 0; i < block; ++i) {
        for (int j = 0; j < block; ++j) {
          double acc = 0.0;
          for (int kk = 0; kk < block; ++kk) {
            acc += hm[static_cast<size_t>(i) * block + kk] *
                   d[static_cast<size_t>(kk) * block + j];
          }
          t[static_cast<size_t>(i) * block + j] = acc;
        }
      }
      // total += sum |t * Hᵀ|
      for (int i = 0; i < block; ++i) {
        for (int j = 0; j < block; ++j) {
          double acc = 0.0;
          for (int kk = 0; kk < block; ++kk) {
            acc += t[static_cast<size_t>(i) * block + kk] *
                   hm[static_cast<size_t>(j) * block + kk];
          }
          total += std::fabs(acc);
        }
      }
    }
  }
  return total;
}

void UpsampleX2(const float* src, float* dst, int n, int h, int w, int c) {
  const int oh = h * 2, ow = w * 2;
  for (int img = 0; img < n; ++img) {
    const float* s = src + static_cast<size_t>(img) * h * w * c;
    float* d = dst + static_cast<size_t>(img) * oh * ow * c;
    for (int oy = 0; oy < oh; ++oy) {
      const double fy = 0.5 * oy - 0.25;
      int y0 = static_cast<int>(std::floor(fy));
      const double ty = fy - y0;
      const int y1 = std::clamp(y0 + 1, 0, h - 1);
      y0 = std::clamp(y0, 0, h - 1);
      for (int ox = 0; ox < ow; ++ox) {
        const double fx = 0.5 * ox - 0.25;
        int x0 = static_cast<int>(std::floor(fx));
        const double tx = fx - x0;
        const int x1 = std::clamp(x0 + 1, 0, w - 1);
        x0 = std::clamp(x0, 0, w - 1);
        for (int ci = 0; ci < c; ++ci) {
          const double v =
              (1.0 - ty) * ((1.0 - tx) * s[(static_cast<size_t>(y0) * w + x0) * c + ci] +
                            tx * s[(static_cast<size_t>(y0) * w + x1) * c + ci]) +
              ty * ((1.0 - tx) * s[(static_cast<size_t>(y1) * w + x0) * c + ci] +
                    tx * s[(static_cast<size_t>(y1) * w + x1) * c + ci]);
          d[(static_cast<size_t>(oy) * ow + ox) * c + ci] =
              static_cast<float>(v);
        }
      }
    }
  }
}

void DownsampleX2(const float* src, float* dst, int n, int h, int w, int c) {
  const int oh = h / 2, ow = w / 2;
  for (int img = 0; img < n; ++img) {
    const float* s = src + static_cast<size_t>(img) * h * w * c;
    float* d = dst + static_cast<size_t>(img) * oh * ow * c;
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox) {
        for (int ci = 0; ci < c; ++ci) {
          double acc = 0.0;
          for (int dy = 0; dy < 2; ++dy) {
            for (int dx = 0; dx < 2; ++dx) {
              acc += s[(static_cast<size_t>(2 * oy + dy) * w + 2 * ox + dx) * c +
                       ci];
            }
          }
          d[(static_cast<size_t>(oy) * ow + ox) * c + ci] =
              static_cast<float>(0.25 * acc);
        }
      }
    }
  }
}

}  // namespace serial

}  // namespace kernels
}  // namespace sfc
