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

#ifndef SFC_CONFIG_H_
#define SFC_CONFIG_H_

#include <array>
#include <string>
#include <vector>

namespace sfc {

struct ConvSpec {
  int kernel = 3;
  int filters = 0;
  int stride = 1;
};

struct ExtractorConfig {
  std::vector<ConvSpec> backbone;
  int embed_dim = 128;
  int num_classes = 0;  // filled from the training manifest
  int input_size = 160;
  int channels = 3;
  int transform_size = 32;
  int head_seed_channels = 64;
  std::vector<ConvSpec> head;  // deconv stack; stride acts as upsampling, last filters == 3
  double lambda_s = 50.0;
  double learning_rate = 1e-4;
  int epochs = 20;
  int batch_size = 16;

  std::string ToJson() const;
  static ExtractorConfig FromJson(const std::string& json_text);
  void Validate() const;
};

struct FeatureCodecConfig {
  int feature_dim = 128;
  std::vector<int> hidden_widths = {256, 256};  // encoder; decoder mirrors
  int latent_dim = 128;
  double r_clip = 20.0;
  double noise_half_width = 0.5;
  std::vector<double> lambda1_sweep = {1e-4, 1e-5, 1e-6, 1e-8};
  std::vector<double> lambda2_sweep = {7e-2, 1e-3, 1e-5, 1e-7};
  bool l1_on_noisy = true;  // rate proxy on the noisy train-time latent
  std::string symbol_model = "per_dim";  // or "shared"
  double learning_rate = 1e-4;
  int epochs = 30;
  int batch_size = 32;

  std::string ToJson() const;
  static FeatureCodecConfig FromJson(const std::string& json_text);
  void Validate() const;
};

struct GeneratorConfig {
  int num_levels = 3;
  int output_size = 256;  // must equal transform_size << num_levels
  std::vector<int> level_filters = {32, 32, 32};  // hidden filters per level
  double lr_initial = 1e-4;
  double lr_decay_factor = 0.9;
  int lr_decay_every = 5;
  double lr_floor = 1e-5;
  int epochs = 20;
  int batch_size = 8;

  std::string ToJson() const;
  static GeneratorConfig FromJson(const std::string& json_text);
  void Validate() const;

  // Learning-rate schedule: exponential decay with a floor.
  double LearningRateAt(int epoch) const;
};

struct EnhancementConfig {
  int image_size = 256;
  int channels = 3;
  std::vector<int> analysis_channels = {32, 64, 64};  // three stride-2 convs
  int hyper_channels = 32;
  int hyper_latent_channels = 16;
  int kernel = 5;
  int hyper_kernel = 3;
  std::vector<double> rate_weight_sweep = {1e-1, 1e-2, 1e-3, 1e-4};
  int latent_clip = 127;
  double learning_rate = 1e-4;
  int epochs = 20;
  int batch_size = 8;

  std::string ToJson() const;
  static EnhancementConfig FromJson(const std::string& json_text);
  void Validate() const;
};

struct ExperimentConfig {
  uint64_t seed = 2024;
  std::string data_root;
  std::array<double, 3> split_ratios = {8, 1, 1};
  int pairs_folds = 10;
  int pairs_per_fold = 10;
  std::string output_root;

  ExtractorConfig extractor;
  FeatureCodecConfig feature_codec;
  GeneratorConfig generator;
  EnhancementConfig enhancement;

  std::string ToJson() const;
  static ExperimentConfig FromJson(const std::string& json_text);
  static ExperimentConfig LoadFile(const std::string& path);
  void SaveFile(const std::string& path) const;

  // Paper-default hyperparameters and geometry (160/32/256, 128-d feature).
  static ExperimentConfig Defaults();
  // Desk-scale geometry (64/16/64, 16-d feature) with the same paper
  // constants; identities/epochs sized for minute-scale training.
  static ExperimentConfig ToyDefaults();

  void Validate() const;
};

}  // namespace sfc

#endif  // SFC_CONFIG_H_
