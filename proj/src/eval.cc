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

#include "sfc/eval.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "sfc/common.h"
#include "sfc/kernels.h"

namespace sfc {

double Psnr(const Tensor& a, const Tensor& b) {
  Check(a.SameShape(b), "psnr shape mismatch");
  double mse = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - b[i];
    mse += d * d;
  }
  mse /= static_cast<double>(a.size());
  if (mse <= 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

namespace {

constexpr double kMsSsimWeights[5] = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

// Separable Gaussian filter with clamped borders on an (h, w) plane.
void GaussFilter(const std::vector<double>& src, int h, int w,
                 const std::vector<double>& kern, std::vector<double>* dst) {
  const int r = static_cast<int>(kern.size()) / 2;
  std::vector<double> tmp(static_cast<size_t>(h) * w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = -r; k <= r; ++k) {
        const int sx = std::clamp(x + k, 0, w - 1);
        acc += kern[static_cast<size_t>(k + r)] * src[static_cast<size_t>(y) * w + sx];
      }
      tmp[static_cast<size_t>(y) * w + x] = acc;
    }
  }
  dst->assign(static_cast<size_t>(h) * w, 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = -r; k <= r; ++k) {
        const int sy = std::clamp(y + k, 0, h - 1);
        acc += kern[static_cast<size_t>(k + r)] * tmp[static_cast<size_t>(sy) * w + x];
      }
      (*dst)[static_cast<size_t>(y) * w + x] = acc;
    }
  }
}

std::vector<double> GaussKernel(int size, double sigma) {
  std::vector<double> k(static_cast<size_t>(size));
  const int r = size / 2;
  double sum = 0.0;
  for (int i = -r; i <= r; ++i) {
    const double v = std::exp(-0.5 * i * i / (sigma * sigma));
    k[static_cast<size_t>(i + r)] = v;
    sum += v;
  }
  for (double& v : k) v /= sum;
  return k;
}

struct SsimStats {
  double ssim;
  double cs;
};

SsimStats SsimPlane(const std::vector<double>& a, const std::vector<double>& b,
                    int h, int w) {
  int win = std::min(11, std::min(h, w));
  if (win % 2 == 0) --win;
  const auto kern = GaussKernel(win, 1.5);
  const size_t n = static_cast<size_t>(h) * w;
  std::vector<double> a2(n), b2(n), ab(n);
  for (size_t i = 0; i < n; ++i) {
    a2[i] = a[i] * a[i];
    b2[i] = b[i] * b[i];
    ab[i] = a[i] * b[i];
  }
  std::vector<double> mua, mub, ma2, mb2, mab;
  GaussFilter(a, h, w, kern, &mua);
  GaussFilter(b, h, w, kern, &mub);
  GaussFilter(a2, h, w, kern, &ma2);
  GaussFilter(b2, h, w, kern, &mb2);
  GaussFilter(ab, h, w, kern, &mab);
  double ssim_sum = 0.0, cs_sum = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double va = ma2[i] - mua[i] * mua[i];
    const double vb = mb2[i] - mub[i] * mub[i];
    const double cov = mab[i] - mua[i] * mub[i];
    const double cs = (2.0 * cov + kC2) / (va + vb + kC2);
    const double lum = (2.0 * mua[i] * mub[i] + kC1) /
                       (mua[i] * mua[i] + mub[i] * mub[i] + kC1);
    ssim_sum += lum * cs;
    cs_sum += cs;
  }
  return {ssim_sum / static_cast<double>(n), cs_sum / static_cast<double>(n)};
}

}  // namespace

double MsSsim(const Tensor& a, const Tensor& b) {
  Check(a.SameShape(b), "ms_ssim shape mismatch");
  Check(a.ndim() == 3, "ms_ssim expects (H,W,C)");
  const int ch = a.dim(2);
  double result = 1.0;
  // Per-channel evaluation, averaged at the end.
  double acc = 0.0;
  for (int c = 0; c < ch; ++c) {
    int h = a.dim(0), w = a.dim(1);
    std::vector<double> pa(static_cast<size_t>(h) * w), pb(pa.size());
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        pa[static_cast<size_t>(y) * w + x] = a.At(y, x, c);
        pb[static_cast<size_t>(y) * w + x] = b.At(y, x, c);
      }
    }
    double prod = 1.0;
    for (int scale = 0; scale < 5; ++scale) {
      const SsimStats st = SsimPlane(pa, pb, h, w);
      if (scale == 4) {
        prod *= std::pow(std::max(st.ssim, 0.0), kMsSsimWeights[scale]);
      } else {
        prod *= std::pow(std::max(st.cs, 0.0), kMsSsimWeights[scale]);
        // 2x2 mean pool to the next scale.
        const int nh = std::max(1, h / 2), nw = std::max(1, w / 2);
        std::vector<double> na(static_cast<size_t>(nh) * nw), nb2(na.size());
        for (int y = 0; y < nh; ++y) {
          for (int x = 0; x < nw; ++x) {
            double sa = 0.0, sb = 0.0;
            int cnt = 0;
            for (int dy = 0; dy < 2; ++dy) {
              for (int dx = 0; dx < 2; ++dx) {
                const int sy = std::min(2 * y + dy, h - 1);
                const int sx = std::min(2 * x + dx, w - 1);
                sa += pa[static_cast<size_t>(sy) * w + sx];
                sb += pb[static_cast<size_t>(sy) * w + sx];
                ++cnt;
              }
            }
            na[static_cast<size_t>(y) * nw + x] = sa / cnt;
            nb2[static_cast<size_t>(y) * nw + x] = sb / cnt;
          }
        }
        pa = std::move(na);
        pb = std::move(nb2);
        h = nh;
        w = nw;
      }
    }
    acc += prod;
  }
  result = acc / ch;
  return std::clamp(result, 0.0, 1.0);
}

double CosineDistance(const Tensor& a, const Tensor& b) {
  Check(a.size() == b.size(), "cosine distance dimension mismatch");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  const double denom = std::sqrt(na) * std::sqrt(nb);
  if (denom <= 0.0) return 1.0;
  return 1.0 - dot / denom;
}

std::string PairKey(const std::string& identity, int index) {
  return identity + "/" + std::to_string(index);
}

namespace {

struct ScoredPair {
  double distance;
  bool same;
  int fold;
};

double AccuracyAt(const std::vector<ScoredPair>& pairs, double threshold) {
  int correct = 0;
  for (const auto& p : pairs) {
    const bool predicted_same = p.distance < threshold;
    if (predicted_same == p.same) ++correct;
  }
  return pairs.empty() ? 0.0 : static_cast<double>(correct) / pairs.size();
}

}  // namespace

VerificationResult VerificationAccuracy(const PairsFile& pairs,
                                        const FeatureMap& features) {
  Check(pairs.folds >= 2, "verification needs at least two folds");
  std::vector<ScoredPair> scored;
  scored.reserve(pairs.pairs.size());
  for (const auto& p : pairs.pairs) {
    const auto a = features.find(PairKey(p.identity_a, p.index_a));
    const auto b = features.find(PairKey(p.identity_b, p.index_b));
    if (a == features.end() || b == features.end()) {
      throw DataError("pair references a missing feature: " +
                      PairKey(p.identity_a, p.index_a) + " vs " +
                      PairKey(p.identity_b, p.index_b));
    }
    scored.push_back({CosineDistance(a->second, b->second), p.same, p.fold});
  }

  // Rank-based AUC with similarity = -distance (ties get average rank).
  double auc = 0.5;
  {
    std::vector<size_t> idx(scored.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](size_t x, size_t y) {
      return scored[x].distance > scored[y].distance;  // ascending similarity
    });
    size_t npos = 0, nneg = 0;
    for (const auto& p : scored) (p.same ? npos : nneg)++;
    if (npos > 0 && nneg > 0) {
      double rank_sum = 0.0;
      size_t i = 0;
      while (i < idx.size()) {
        size_t j = i;
        while (j + 1 < idx.size() &&
               scored[idx[j + 1]].distance == scored[idx[i]].distance) {
          ++j;
        }
        const double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
        for (size_t k = i; k <= j; ++k) {
          if (scored[idx[k]].same) rank_sum += avg_rank;
        }
        i = j + 1;
      }
      auc = (rank_sum - 0.5 * static_cast<double>(npos) * (npos + 1)) /
            (static_cast<double>(npos) * static_cast<double>(nneg));
    }
  }

  // Per-fold threshold selection on the other folds.
  double acc_sum = 0.0, thr_sum = 0.0;
  for (int fold = 0; fold < pairs.folds; ++fold) {
    std::vector<ScoredPair> train, test;
    for (const auto& p : scored) {
      (p.fold == fold ? test : train).push_back(p);
    }
    Check(!train.empty() && !test.empty(), "empty verification fold");
    std::vector<double> ds;
    ds.reserve(train.size());
    for (const auto& p : train) ds.push_back(p.distance);
    std::sort(ds.begin(), ds.end());
    ds.erase(std::unique(ds.begin(), ds.end()), ds.end());
    std::vector<double> candidates;
    candidates.push_back(ds.front() - 1e-6);
    for (size_t i = 0; i + 1 < ds.size(); ++i) {
      candidates.push_back(0.5 * (ds[i] + ds[i + 1]));
    }
    candidates.push_back(ds.back() + 1e-6);
    double best_acc = -1.0, best_thr = candidates.front();
    for (double t : candidates) {
      const double a = AccuracyAt(train, t);
      if (a > best_acc) {
        best_acc = a;
        best_thr = t;
      }
    }
    acc_sum += AccuracyAt(test, best_thr);
    thr_sum += best_thr;
  }

  VerificationResult out;
  out.accuracy = acc_sum / pairs.folds;
  out.auc = auc;
  out.threshold = thr_sum / pairs.folds;
  return out;
}

void WriteRateCsv(const std::vector<RatePoint>& points, const std::string& path) {
  std::vector<RatePoint> sorted = points;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const RatePoint& a, const RatePoint& b) { return a.bpp < b.bpp; });
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw DataError("cannot write CSV: " + path);
  f << "bpp,layer,metric,value,operating_point_id\n";
  for (const auto& p : sorted) {
    f << p.bpp << "," << p.layer << "," << p.metric_name << "," << p.metric_value
      << "," << p.operating_point_id << "\n";
  }
}

void WriteRateSvg(const std::vector<RatePoint>& points, const std::string& path,
                  const std::string& title) {
  Check(!points.empty(), "no points to plot");
  std::map<std::string, std::vector<const RatePoint*>> by_metric;
  for (const auto& p : points) by_metric[p.metric_name].push_back(&p);

  const int width = 640, height = 420, margin = 60;
  double min_bpp = 1e30, max_bpp = -1e30, min_v = 1e30, max_v = -1e30;
  for (const auto& p : points) {
    min_bpp = std::min(min_bpp, p.bpp);
    max_bpp = std::max(max_bpp, p.bpp);
    min_v = std::min(min_v, p.metric_value);
    max_v = std::max(max_v, p.metric_value);
  }
  if (max_bpp <= min_bpp) max_bpp = min_bpp + 1e-9;
  if (max_v <= min_v) max_v = min_v + 1e-9;
  auto X = [&](double bpp) {
    return margin + (bpp - min_bpp) / (max_bpp - min_bpp) * (width - 2 * margin);
  };
  auto Y = [&](double v) {
    return height - margin - (v - min_v) / (max_v - min_v) * (height - 2 * margin);
  };

  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
  std::ostringstream svg;
  svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width
      << "' height='" << height << "'>\n";
  svg << "<rect width='100%' height='100%' fill='white'/>\n";
  svg << "<text x='" << width / 2 << "' y='24' text-anchor='middle' "
      << "font-family='sans-serif' font-size='15'>" << title << "</text>\n";
  svg << "<line x1='" << margin << "' y1='" << height - margin << "' x2='"
      << width - margin << "' y2='" << height - margin
      << "' stroke='black'/>\n";
  svg << "<line x1='" << margin << "' y1='" << margin << "' x2='" << margin
      << "' y2='" << height - margin << "' stroke='black'/>\n";
  svg << "<text x='" << width / 2 << "' y='" << height - 16
      << "' text-anchor='middle' font-family='sans-serif' font-size='12'>bpp"
      << "</text>\n";
  int color = 0;
  int legend_y = margin;
  for (auto& [metric, pts] : by_metric) {
    std::sort(pts.begin(), pts.end(), [](const RatePoint* a, const RatePoint* b) {
      return a->bpp < b->bpp;
    });
    const char* col = kColors[color % 4];
    svg << "<polyline fill='none' stroke='" << col << "' stroke-width='2' points='";
    for (const auto* p : pts) svg << X(p->bpp) << "," << Y(p->metric_value) << " ";
    svg << "'/>\n";
    for (const auto* p : pts) {
      svg << "<circle cx='" << X(p->bpp) << "' cy='" << Y(p->metric_value)
          << "' r='3.5' fill='" << col << "'/>\n";
    }
    svg << "<text x='" << width - margin + 4 << "' y='" << legend_y
        << "' font-family='sans-serif' font-size='11' fill='" << col << "'>"
        << metric << "</text>\n";
    legend_y += 16;
    ++color;
  }
  svg << "</svg>\n";

  std::ofstream f(path, std::ios::trunc);
  if (!f) throw DataError("cannot write SVG: " + path);
  f << svg.str();
}

size_t SaturationPointIndex(const std::vector<RatePoint>& points,
                            double epsilon) {
  if (points.empty()) {
    throw InvalidArgumentError("saturation point of an empty sweep");
  }
  double best = -1e30;
  for (const auto& p : points) best = std::max(best, p.metric_value);
  size_t pick = points.size();
  for (size_t i = 0; i < points.size(); ++i) {
    if (points[i].metric_value + epsilon >= best) {
      if (pick == points.size() || points[i].bpp < points[pick].bpp) pick = i;
    }
  }
  return pick;
}

const RatePoint& FixedBaseBudgeting(const std::vector<RatePoint>& base_sweep,
                                    double epsilon) {
  return base_sweep[SaturationPointIndex(base_sweep, epsilon)];
}

}  // namespace sfc
