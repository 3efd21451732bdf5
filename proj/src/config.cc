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

#include "sfc/config.h"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sfc/common.h"

using json = nlohmann::json;

namespace sfc {

namespace {

// Unknown keys are configuration errors (fail fast).
void ExpectKeys(const json& j, const std::set<std::string>& allowed,
                const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) {
      throw ConfigError("unknown config key '" + it.key() + "' in " + where);
    }
  }
}

json SpecsToJson(const std::vector<ConvSpec>& specs) {
  json a = json::array();
  for (const auto& s : specs) a.push_back({s.kernel, s.filters, s.stride});
  return a;
}

std::vector<ConvSpec> SpecsFromJson(const json& a, const std::string& where) {
  std::vector<ConvSpec> out;
  for (const auto& e : a) {
    if (!e.is_array() || e.size() != 3) {
      throw ConfigError("layer spec must be [kernel, filters, stride] in " + where);
    }
    out.push_back({e[0].get<int>(), e[1].get<int>(), e[2].get<int>()});
  }
  return out;
}

template <typename T>
void Get(const json& j, const char* key, T* out, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError(std::string("missing key '") + key + "' in " + where);
  *out = it->get<T>();
}

json ParseObject(const std::string& text, const std::string& where) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("malformed JSON in " + where + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  return j;
}

}  // namespace

// ---------------------------------------------------------------------------
// ExtractorConfig

std::string ExtractorConfig::ToJson() const {
  json j;
  j["backbone"] = SpecsToJson(backbone);
  j["embed_dim"] = embed_dim;
  j["num_classes"] = num_classes;
  j["input_size"] = input_size;
  j["channels"] = channels;
  j["transform_size"] = transform_size;
  j["head_seed_channels"] = head_seed_channels;
  j["head"] = SpecsToJson(head);
  j["lambda_s"] = lambda_s;
  j["learning_rate"] = learning_rate;
  j["epochs"] = epochs;
  j["batch_size"] = batch_size;
  return j.dump();
}

ExtractorConfig ExtractorConfig::FromJson(const std::string& text) {
  const json j = ParseObject(text, "extractor");
  ExpectKeys(j,
             {"backbone", "embed_dim", "num_classes", "input_size", "channels",
              "transform_size", "head_seed_channels", "head", "lambda_s",
              "learning_rate", "epochs", "batch_size"},
             "extractor");
  ExtractorConfig c;
  c.backbone = SpecsFromJson(j.at("backbone"), "extractor.backbone");
  Get(j, "embed_dim", &c.embed_dim, "extractor");
  Get(j, "num_classes", &c.num_classes, "extractor");
  Get(j, "input_size", &c.input_size, "extractor");
  Get(j, "channels", &c.channels, "extractor");
  Get(j, "transform_size", &c.transform_size, "extractor");
  Get(j, "head_seed_channels", &c.head_seed_channels, "extractor");
  c.head = SpecsFromJson(j.at("head"), "extractor.head");
  Get(j, "lambda_s", &c.lambda_s, "extractor");
  Get(j, "learning_rate", &c.learning_rate, "extractor");
  Get(j, "epochs", &c.epochs, "extractor");
  Get(j, "batch_size", &c.batch_size, "extractor");
  return c;
}

void ExtractorConfig::Validate() const {
  if (backbone.empty()) throw ConfigError("extractor.backbone is empty");
  if (head.empty()) throw ConfigError("extractor.head is empty");
  if (head.back().filters != 3) {
    throw ConfigError("extractor.head must end in a 3-filter projection");
  }
  if (lambda_s <= 0.0) throw ConfigError("lambda_s must be positive");
  if (embed_dim <= 0) throw ConfigError("embed_dim must be positive");
  int up = 1;
  for (const auto& s : head) up *= s.stride;
  if (transform_size % up != 0) {
    throw ConfigError("transform_size not reachable by head upsampling");
  }
}

// ---------------------------------------------------------------------------
// FeatureCodecConfig

std::string FeatureCodecConfig::ToJson() const {
  json j;
  j["feature_dim"] = feature_dim;
  j["hidden_widths"] = hidden_widths;
  j["latent_dim"] = latent_dim;
  j["r_clip"] = r_clip;
  j["noise_half_width"] = noise_half_width;
  j["lambda1_sweep"] = lambda1_sweep;
  j["lambda2_sweep"] = lambda2_sweep;
  j["l1_on_noisy"] = l1_on_noisy;
  j["symbol_model"] = symbol_model;
  j["learning_rate"] = learning_rate;
  j["epochs"] = epochs;
  j["batch_size"] = batch_size;
  return j.dump();
}

FeatureCodecConfig FeatureCodecConfig::FromJson(const std::string& text) {
  const json j = ParseObject(text, "feature_codec");
  ExpectKeys(j,
             {"feature_dim", "hidden_widths", "latent_dim", "r_clip",
              "noise_half_width", "lambda1_sweep", "lambda2_sweep",
              "l1_on_noisy", "symbol_model", "learning_rate", "epochs",
              "batch_size"},
             "feature_codec");
  FeatureCodecConfig c;
  Get(j, "feature_dim", &c.feature_dim, "feature_codec");
  Get(j, "hidden_widths", &c.hidden_widths, "feature_codec");
  Get(j, "latent_dim", &c.latent_dim, "feature_codec");
  Get(j, "r_clip", &c.r_clip, "feature_codec");
  Get(j, "noise_half_width", &c.noise_half_width, "feature_codec");
  Get(j, "lambda1_sweep", &c.lambda1_sweep, "feature_codec");
  Get(j, "lambda2_sweep", &c.lambda2_sweep, "feature_codec");
  Get(j, "l1_on_noisy", &c.l1_on_noisy, "feature_codec");
  Get(j, "symbol_model", &c.symbol_model, "feature_codec");
  Get(j, "learning_rate", &c.learning_rate, "feature_codec");
  Get(j, "epochs", &c.epochs, "feature_codec");
  Get(j, "batch_size", &c.batch_size, "feature_codec");
  return c;
}

void FeatureCodecConfig::Validate() const {
  if (r_clip <= 0.0) throw ConfigError("r_clip must be positive");
  if (lambda1_sweep.empty() || lambda2_sweep.empty()) {
    throw ConfigError("feature codec sweeps must be nonempty");
  }
  if (lambda1_sweep.size() != lambda2_sweep.size()) {
    throw ConfigError("lambda1/lambda2 sweeps must pair up");
  }
  for (double v : lambda1_sweep) {
    if (v < 0.0) throw ConfigError("lambda1 must be nonnegative");
  }
  for (double v : lambda2_sweep) {
    if (v < 0.0) throw ConfigError("lambda2 must be nonnegative");
  }
  if (symbol_model != "per_dim" && symbol_model != "shared") {
    throw ConfigError("symbol_model must be per_dim or shared");
  }
  if (latent_dim <= 0 || feature_dim <= 0) {
    throw ConfigError("feature codec dims must be positive");
  }
}

// ---------------------------------------------------------------------------
// GeneratorConfig

std::string GeneratorConfig::ToJson() const {
  json j;
  j["num_levels"] = num_levels;
  j["output_size"] = output_size;
  j["level_filters"] = level_filters;
  j["lr_initial"] = lr_initial;
  j["lr_decay_factor"] = lr_decay_factor;
  j["lr_decay_every"] = lr_decay_every;
  j["lr_floor"] = lr_floor;
  j["epochs"] = epochs;
  j["batch_size"] = batch_size;
  return j.dump();
}

GeneratorConfig GeneratorConfig::FromJson(const std::string& text) {
  const json j = ParseObject(text, "generator");
  ExpectKeys(j,
             {"num_levels", "output_size", "level_filters", "lr_initial",
              "lr_decay_factor", "lr_decay_every", "lr_floor", "epochs",
              "batch_size"},
             "generator");
  GeneratorConfig c;
  Get(j, "num_levels", &c.num_levels, "generator");
  Get(j, "output_size", &c.output_size, "generator");
  Get(j, "level_filters", &c.level_filters, "generator");
  Get(j, "lr_initial", &c.lr_initial, "generator");
  Get(j, "lr_decay_factor", &c.lr_decay_factor, "generator");
  Get(j, "lr_decay_every", &c.lr_decay_every, "generator");
  Get(j, "lr_floor", &c.lr_floor, "generator");
  Get(j, "epochs", &c.epochs, "generator");
  Get(j, "batch_size", &c.batch_size, "generator");
  return c;
}

void GeneratorConfig::Validate() const {
  if (num_levels < 1) throw ConfigError("generator needs at least one level");
  if (static_cast<int>(level_filters.size()) != num_levels) {
    throw ConfigError("level_filters must have num_levels entries");
  }
  if (lr_initial <= 0.0 || lr_floor <= 0.0 || lr_decay_factor <= 0.0 ||
      lr_decay_factor > 1.0 || lr_decay_every <= 0) {
    throw ConfigError("bad generator learning-rate schedule");
  }
}

double GeneratorConfig::LearningRateAt(int epoch) const {
  const double lr = lr_initial * std::pow(lr_decay_factor, epoch / lr_decay_every);
  return std::max(lr, lr_floor);
}

// ---------------------------------------------------------------------------
// EnhancementConfig

std::string EnhancementConfig::ToJson() const {
  json j;
  j["image_size"] = image_size;
  j["channels"] = channels;
  j["analysis_channels"] = analysis_channels;
  j["hyper_channels"] = hyper_channels;
  j["hyper_latent_channels"] = hyper_latent_channels;
  j["kernel"] = kernel;
  j["hyper_kernel"] = hyper_kernel;
  j["rate_weight_sweep"] = rate_weight_sweep;
  j["latent_clip"] = latent_clip;
  j["learning_rate"] = learning_rate;
  j["epochs"] = epochs;
  j["batch_size"] = batch_size;
  return j.dump();
}

EnhancementConfig EnhancementConfig::FromJson(const std::string& text) {
  const json j = ParseObject(text, "enhancement");
  ExpectKeys(j,
             {"image_size", "channels", "analysis_channels", "hyper_channels",
              "hyper_latent_channels", "kernel", "hyper_kernel",
              "rate_weight_sweep", "latent_clip", "learning_rate", "epochs",
              "batch_size"},
             "enhancement");
  EnhancementConfig c;
  Get(j, "image_size", &c.image_size, "enhancement");
  Get(j, "channels", &c.channels, "enhancement");
  Get(j, "analysis_channels", &c.analysis_channels, "enhancement");
  Get(j, "hyper_channels", &c.hyper_channels, "enhancement");
  Get(j, "hyper_latent_channels", &c.hyper_latent_channels, "enhancement");
  Get(j, "kernel", &c.kernel, "enhancement");
  Get(j, "hyper_kernel", &c.hyper_kernel, "enhancement");
  Get(j, "rate_weight_sweep", &c.rate_weight_sweep, "enhancement");
  Get(j, "latent_clip", &c.latent_clip, "enhancement");
  Get(j, "learning_rate", &c.learning_rate, "enhancement");
  Get(j, "epochs", &c.epochs, "enhancement");
  Get(j, "batch_size", &c.batch_size, "enhancement");
  return c;
}

void EnhancementConfig::Validate() const {
  if (analysis_channels.size() != 3) {
    throw ConfigError("enhancement analysis must have three stride-2 stages");
  }
  if (rate_weight_sweep.empty()) throw ConfigError("rate_weight_sweep is empty");
  for (double v : rate_weight_sweep) {
    if (v <= 0.0) throw ConfigError("rate weights must be positive");
  }
  if (image_size % 8 != 0) {
    throw ConfigError("enhancement image size must be divisible by 8");
  }
  if (latent_clip < 1) throw ConfigError("latent_clip must be >= 1");
}

// ---------------------------------------------------------------------------
// ExperimentConfig

std::string ExperimentConfig::ToJson() const {
  json j;
  j["seed"] = seed;
  j["data_root"] = data_root;
  j["split_ratios"] = split_ratios;
  j["pairs_folds"] = pairs_folds;
  j["pairs_per_fold"] = pairs_per_fold;
  j["output_root"] = output_root;
  j["extractor"] = json::parse(extractor.ToJson());
  j["feature_codec"] = json::parse(feature_codec.ToJson());
  j["generator"] = json::parse(generator.ToJson());
  j["enhancement"] = json::parse(enhancement.ToJson());
  return j.dump(2);
}

ExperimentConfig ExperimentConfig::FromJson(const std::string& text) {
  const json j = ParseObject(text, "experiment config");
  ExpectKeys(j,
             {"seed", "data_root", "split_ratios", "pairs_folds",
              "pairs_per_fold", "output_root", "extractor", "feature_codec",
              "generator", "enhancement"},
             "experiment config");
  ExperimentConfig c;
  Get(j, "seed", &c.seed, "experiment config");
  Get(j, "data_root", &c.data_root, "experiment config");
  Get(j, "split_ratios", &c.split_ratios, "experiment config");
  Get(j, "pairs_folds", &c.pairs_folds, "experiment config");
  Get(j, "pairs_per_fold", &c.pairs_per_fold, "experiment config");
  Get(j, "output_root", &c.output_root, "experiment config");
  c.extractor = ExtractorConfig::FromJson(j.at("extractor").dump());
  c.feature_codec = FeatureCodecConfig::FromJson(j.at("feature_codec").dump());
  c.generator = GeneratorConfig::FromJson(j.at("generator").dump());
  c.enhancement = EnhancementConfig::FromJson(j.at("enhancement").dump());
  return c;
}

ExperimentConfig ExperimentConfig::LoadFile(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return FromJson(ss.str());
}

void ExperimentConfig::SaveFile(const std::string& path) const {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw ConfigError("cannot write config file: " + path);
  f << ToJson();
}

ExperimentConfig ExperimentConfig::Defaults() {
  ExperimentConfig c;
  c.extractor.backbone = {{3, 32, 2}, {3, 64, 2}, {3, 128, 2}, {3, 256, 2}};
  c.extractor.embed_dim = 128;
  c.extractor.input_size = 160;
  c.extractor.transform_size = 32;
  c.extractor.head_seed_channels = 128;
  c.extractor.head = {{3, 64, 2}, {3, 32, 2}, {3, 3, 2}};
  c.extractor.lambda_s = 50.0;
  c.extractor.learning_rate = 1e-4;

  c.feature_codec.feature_dim = 128;
  c.feature_codec.hidden_widths = {256, 256};
  c.feature_codec.latent_dim = 128;
  c.feature_codec.r_clip = 20.0;
  c.feature_codec.noise_half_width = 0.5;
  c.feature_codec.lambda1_sweep = {1e-4, 1e-5, 1e-6, 1e-8};
  c.feature_codec.lambda2_sweep = {7e-2, 1e-3, 1e-5, 1e-7};
  c.feature_codec.learning_rate = 1e-4;

  c.generator.num_levels = 3;
  c.generator.output_size = 256;
  c.generator.level_filters = {64, 64, 64};
  c.generator.lr_initial = 1e-4;
  c.generator.lr_decay_factor = 0.9;
  c.generator.lr_decay_every = 5;
  c.generator.lr_floor = 1e-5;

  c.enhancement.image_size = 256;
  c.enhancement.analysis_channels = {64, 96, 96};
  c.enhancement.hyper_channels = 64;
  c.enhancement.hyper_latent_channels = 32;
  c.enhancement.rate_weight_sweep = {1e-1, 1e-2, 1e-3, 1e-4};
  c.enhancement.learning_rate = 1e-4;
  return c;
}

ExperimentConfig ExperimentConfig::ToyDefaults() {
  ExperimentConfig c = Defaults();
  c.split_ratios = {6, 2, 2};
  c.pairs_folds = 10;
  c.pairs_per_fold = 10;

  // Desk-scale learning rates: the published 1e-4 needs sample counts far
  // beyond a toy corpus; the Defaults() config keeps the published values.
  c.extractor.backbone = {{3, 16, 2}, {3, 32, 2}, {3, 64, 2}, {3, 128, 2}};
  c.extractor.embed_dim = 16;
  c.extractor.input_size = 64;
  c.extractor.transform_size = 16;
  c.extractor.head_seed_channels = 32;
  c.extractor.head = {{3, 32, 2}, {3, 3, 2}};
  c.extractor.learning_rate = 3e-3;
  c.extractor.epochs = 24;
  c.extractor.batch_size = 16;

  c.feature_codec.feature_dim = 16;
  c.feature_codec.hidden_widths = {48, 48};
  c.feature_codec.latent_dim = 16;
  c.feature_codec.learning_rate = 3e-3;
  c.feature_codec.epochs = 60;
  c.feature_codec.batch_size = 32;

  c.generator.num_levels = 2;
  c.generator.output_size = 64;
  c.generator.level_filters = {24, 24};
  c.generator.lr_initial = 1e-3;
  c.generator.epochs = 12;
  c.generator.batch_size = 8;

  c.enhancement.image_size = 64;
  c.enhancement.analysis_channels = {16, 32, 32};
  c.enhancement.hyper_channels = 16;
  c.enhancement.hyper_latent_channels = 8;
  c.enhancement.learning_rate = 1e-3;
  c.enhancement.epochs = 15;
  c.enhancement.batch_size = 8;
  return c;
}

void ExperimentConfig::Validate() const {
  extractor.Validate();
  feature_codec.Validate();
  generator.Validate();
  enhancement.Validate();
  if (generator.output_size !=
      extractor.transform_size * (1 << generator.num_levels)) {
    throw ConfigError(
        "output_size must equal transform_size * 2^num_levels");
  }
  if (enhancement.image_size != generator.output_size) {
    throw ConfigError("enhancement image size must match generator output");
  }
  if (feature_codec.feature_dim != extractor.embed_dim) {
    throw ConfigError("feature codec dim must match extractor embed_dim");
  }
  if (split_ratios[0] <= 0.0) throw ConfigError("train split must be nonempty");
  if (pairs_folds < 2) throw ConfigError("pairs_folds must be >= 2");
}

}  // namespace sfc
