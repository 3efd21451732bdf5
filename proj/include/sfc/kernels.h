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

#ifndef SFC_KERNELS_H_
#define SFC_KERNELS_H_

#include <cstddef>
#include <cstdint>

namespace sfc {
namespace kernels {

// OpenMP-parallel kernels. Every output element is produced by one thread
// with a fixed serial inner summation, so results are bitwise identical for
// any thread count. Reductions that feed loss values accumulate in double.
//
// kernels::serial holds independent naive implementations of the same
// contracts; tests compare the two routes and tools/sfc_bench times them.

// c[m,n] = a[m,k] * b[k,n] (+ c if accumulate).
void Gemm(const float* a, const float* b, float* c, int m, int k, int n,
          bool accumulate = false);
// c[m,n] = a[k,m]^T * b[k,n] (+ c if accumulate).
void GemmTN(const float* a, const float* b, float* c, int m, int k, int n,
            bool accumulate = false);
// c[m,n] = a[m,k] * b[n,k]^T (+ c if accumulate).
void GemmNT(const float* a, const float* b, float* c, int m, int k, int n,
            bool accumulate = false);

void AddBiasRows(float* c, const float* bias, int rows, int n);

// HWC im2col for a single image: dst is (oh*ow, k*k*c) row-major; out-of-range
// taps are zero.
void Im2Col(const float* src, int h, int w, int c, int k, int stride, int pad,
            float* dst, int oh, int ow);
// Exact adjoint of Im2Col (gather form, deterministic): dst is (h, w, c).
void Col2Im(const float* cols, int h, int w, int c, int k, int stride, int pad,
            float* dst, int oh, int ow);

// Factor-2 bilinear resampling on (h, w, c) maps; `n` leading images.
// Downsampling averages each 2x2 block; upsampling interpolates at half-pixel
// centers with clamped borders. UpsampleX2Backward is the exact adjoint.
void DownsampleX2(const float* src, float* dst, int n, int h, int w, int c);
void DownsampleX2Backward(const float* gdst, float* gsrc, int n, int h, int w,
                          int c);
void UpsampleX2(const float* src, float* dst, int n, int h, int w, int c);
void UpsampleX2Backward(const float* gdst, float* gsrc, int n, int h, int w,
                        int c);

// Catmull-Rom bicubic resize (a = -0.5), pixel-center alignment, clamped
// borders. No gradient: used only to produce resampled targets.
void ResizeBicubic(const float* src, int h, int w, int c, float* dst, int oh,
                   int ow);

// Walsh-Hadamard butterflies on a B x B block (B a power of two), in place,
// rows then columns, unnormalized (coefficients of H x Hᵀ with H entries ±1).
void HadamardBlock(float* block, int b);

// Sum over |H (a-b) Hᵀ| of all B x B blocks of one channel plane, edge blocks
// zero-padded. Plane layout is (h, w) with row stride `stride` floats.
double SatdPlaneSum(const float* a, const float* b, int h, int w, int stride,
                    int block);
// d/da of SatdPlaneSum (unnormalized): ga += H sign(H (a-b) Hᵀ) Hᵀ.
void SatdPlaneGrad(const float* a, const float* b, float* ga, int h, int w,
                   int stride, int block);

void ReluForward(const float* x, float* y, size_t n);
void ReluBackward(const float* x, const float* gy, float* gx, size_t n);
void Clamp01Forward(const float* x, float* y, size_t n);
void Clamp01Backward(const float* x, const float* gy, float* gx, size_t n);

void AdamStep(float* value, const float* grad, float* m, float* v, size_t n,
              float lr, float beta1, float beta2, float eps, float bias1,
              float bias2);

// Independent reference implementations (naive loops, no tiling, no OpenMP).
namespace serial {
void Gemm(const float* a, const float* b, float* c, int m, int k, int n,
          bool accumulate = false);
// Direct convolution, HWC, 'same'-style zero padding: y (oh, ow, f), weights
// (k, k, c, f).
void Conv2d(const float* x, int h, int w, int c, const float* weights,
            const float* bias, int kernel, int stride, int pad, float* y,
            int oh, int ow, int f);
double SatdPlaneSum(const float* a, const float* b, int h, int w, int stride,
                    int block);
void UpsampleX2(const float* src, float* dst, int n, int h, int w, int c);
void DownsampleX2(const float* src, float* dst, int n, int h, int w, int c);
}  // namespace serial

}  // namespace kernels
}  // namespace sfc

#endif  // SFC_KERNELS_H_
