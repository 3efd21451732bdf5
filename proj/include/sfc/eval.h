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

#ifndef SFC_EVAL_H_
#define SFC_EVAL_H_

#include <map>
#include <string>
#include <vector>

#include "sfc/dataset.h"
#include "sfc/tensor.h"

namespace sfc {

// PSNR in dB with MAX = 1; identical images report the 99 dB cap.
inline constexpr double kPsnrCap = 99.0;
double Psnr(const Tensor& a, const Tensor& b);

// Multi-scale SSIM with the standard 5-scale weights; windows shrink on
// images too small for the 11x11 Gaussian at a scale.
double MsSsim(const Tensor& a, const Tensor& b);

// Cosine distance 1 - <a,b>/(|a||b|).
double CosineDistance(const Tensor& a, const Tensor& b);

struct VerificationResult {
  double accuracy = 0.0;   // mean over folds
  double auc = 0.0;        // rank-based ROC AUC over all pairs
  double threshold = 0.0;  // mean of the per-fold optimal thresholds
};

// Keyed feature store for pair lookup: "<identity>/<index>".
using FeatureMap = std::map<std::string, Tensor>;
std::string PairKey(const std::string& identity, int index);

// Ten-fold (or pairs.folds-fold) cross-validated cosine-threshold
// verification. Throws DataError if a pair references a missing feature.
VerificationResult VerificationAccuracy(const PairsFile& pairs,
                                        const FeatureMap& features);

struct RatePoint {
  double bpp = 0.0;
  std::string metric_name;  // accuracy | auc | psnr | ms_ssim
  double metric_value = 0.0;
  std::string layer;  // base | total
  std::string operating_point_id;
};

// CSV schema: bpp,layer,metric,value,operating_point_id (sorted by bpp).
void WriteRateCsv(const std::vector<RatePoint>& points, const std::string& path);
// Simple polyline SVG of (bpp, metric) per metric name.
void WriteRateSvg(const std::vector<RatePoint>& points, const std::string& path,
                  const std::string& title);

// Smallest-bpp point whose metric is within epsilon of the sweep maximum.
// Points need not be sorted. Throws InvalidArgumentError on an empty sweep.
size_t SaturationPointIndex(const std::vector<RatePoint>& points,
                            double epsilon);

inline constexpr double kSaturationEpsilon = 0.001;  // 0.1% absolute accuracy

// The base-layer budgeting rule: fix the base layer at the saturation point
// of its rate-accuracy sweep.
const RatePoint& FixedBaseBudgeting(const std::vector<RatePoint>& base_sweep,
                                    double epsilon = kSaturationEpsilon);

// Reference operating points reported for this scheme (rate-accuracy of the
// base layer) and the published saturation rate, kept for plot overlays.
struct ReferencePoint {
  double bpp;
  double accuracy_percent;
};
inline constexpr ReferencePoint kReferenceRateAccuracy[] = {
    {0.0019, 97.80}, {0.0027, 98.83}, {0.0039, 99.02}, {0.0052, 99.00}};
inline constexpr double kReferenceSaturationBpp = 0.0058;
inline constexpr double kReferenceUncompressedAccuracy = 99.10;

}  // namespace sfc

#endif  // SFC_EVAL_H_
