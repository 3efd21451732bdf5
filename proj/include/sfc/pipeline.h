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

#ifndef SFC_PIPELINE_H_
#define SFC_PIPELINE_H_

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sfc/bitstream.h"
#include "sfc/config.h"
#include "sfc/dataset.h"
#include "sfc/enhancement.h"
#include "sfc/eval.h"
#include "sfc/extractor.h"
#include "sfc/feature_codec.h"
#include "sfc/texture_generator.h"

namespace sfc {

// Filesystem layout of one experiment under output_root.
struct RunPaths {
  std::string root;
  std::string Manifest() const { return root + "/manifest.json"; }
  std::string Pairs() const { return root + "/pairs.txt"; }
  std::string CheckpointDir() const { return root + "/checkpoints"; }
  std::string Extractor() const { return CheckpointDir() + "/extractor.ckpt"; }
  std::string FeatureCodec(int point) const {
    return CheckpointDir() + "/feature_codec_p" + std::to_string(point) + ".ckpt";
  }
  std::string Generator() const { return CheckpointDir() + "/generator.ckpt"; }
  std::string Enhancement(int point) const {
    return CheckpointDir() + "/enhancement_p" + std::to_string(point) + ".ckpt";
  }
  static std::string Meta(const std::string& ckpt_path) {
    return ckpt_path + ".meta.json";
  }
  std::string EvalDir() const { return root + "/eval"; }
  std::string BaseSweepCsv() const { return EvalDir() + "/base_sweep.csv"; }
  std::string BaseSelected() const { return EvalDir() + "/base_selected.json"; }
  std::string RdPointsCsv() const { return EvalDir() + "/rd_points.csv"; }
  std::string RdPointsJson() const { return EvalDir() + "/rd_points.json"; }
  std::string CurveDir() const { return root + "/curves"; }
  std::string RunsDir() const { return root + "/runs"; }
};

struct BaseSweepPoint {
  int point = 0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double bpp = 0.0;
  double accuracy = 0.0;
  double auc = 0.0;
};

struct BaseEvalResult {
  std::vector<BaseSweepPoint> sweep;  // sorted by bpp
  int selected_point = 0;
  double selected_bpp = 0.0;
  double uncompressed_accuracy = 0.0;
  double uncompressed_auc = 0.0;
};

struct RdEvalPoint {
  int point = 0;
  double rate_weight = 0.0;
  double total_bpp = 0.0;
  double base_bpp = 0.0;
  double psnr = 0.0;
  double ms_ssim = 0.0;
  double base_psnr = 0.0;     // x_base only, same test set
  double base_ms_ssim = 0.0;
};

struct RdEvalResult {
  std::vector<RdEvalPoint> points;  // sorted by total_bpp
  int base_point = 0;
};

// Staged training, coding entry points and evaluation over one experiment
// directory. Stages depend on their predecessors' checkpoints and verify the
// recorded content hashes (the DAG is tamper-evident).
class Pipeline {
 public:
  explicit Pipeline(ExperimentConfig cfg);

  const ExperimentConfig& config() const { return cfg_; }
  const RunPaths& paths() const { return paths_; }

  DatasetManifest RunIngest();
  DatasetManifest LoadManifest() const;

  // stage in {extractor, feature_codec, generator, enhancement}. point
  // selects the sweep operating point for feature_codec / enhancement
  // (default 0); generator uses base_point (-1 = saturation selection from
  // the base evaluation, requires RunEvalBase first).
  void TrainStage(const std::string& stage, int point = 0, int base_point = -1);
  void SweepStage(const std::string& stage, int base_point = -1);

  BaseEvalResult RunEvalBase();
  RdEvalResult RunEvalFull(int base_point = -1);
  void RunCurves();

  // Encoding/decoding entry points (.sfc container bytes). The image file is
  // resized to the configured coding size. base_point / enh_point default to
  // the selected saturation point and the highest-rate enhancement model.
  Bytes EncodeImage(const Tensor& image, bool base_only, int base_point = -1,
                    int enh_point = -1);
  Tensor DecodeFeature(const Bytes& stream, int base_point = -1);
  // mode=image; falls back to x_base with *used_enhancement = false when the
  // stream carries no enhancement block.
  Tensor DecodeImage(const Bytes& stream, int base_point,
                     bool* used_enhancement);

  // Writes a reproducibility record (command, config, checkpoint hashes).
  void WriteRunRecord(const std::string& command) const;

  int SelectedBasePoint() const;  // from eval artifact; DependencyError if absent

  // Loaded-model access (lazy, cached).
  BaseExtractor& GetExtractor();
  FeatureCodec& GetFeatureCodec(int point);
  TextureGenerator& GetGenerator();
  EnhancementCodec& GetEnhancement(int point);

 private:
  void RequireCheckpoint(const std::string& path, const std::string& stage) const;
  void SaveStageMeta(const std::string& ckpt_path, const std::string& stage,
                     const std::vector<std::pair<std::string, std::string>>& preds,
                     const std::string& metrics_json) const;
  std::string VerifiedHash(const std::string& ckpt_path) const;
  Tensor DecodeImageStreamWith(const Bytes& stream, FeatureCodec& codec,
                               TextureGenerator& gen, EnhancementCodec& enh,
                               bool* used_enhancement);

  ExperimentConfig cfg_;
  RunPaths paths_;
  std::unique_ptr<BaseExtractor> extractor_;
  std::vector<std::unique_ptr<FeatureCodec>> codecs_;
  std::unique_ptr<TextureGenerator> generator_;
  std::vector<std::unique_ptr<EnhancementCodec>> enhancements_;
};

}  // namespace sfc

#endif  // SFC_PIPELINE_H_
