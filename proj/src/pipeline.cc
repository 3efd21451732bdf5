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

#include "sfc/pipeline.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sfc/hash.h"
#include "sfc/image_io.h"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace sfc {

namespace {

json LogToJson(const std::vector<EpochLog>& log) {
  json a = json::array();
  for (const auto& e : log) {
    a.push_back({{"epoch", e.epoch}, {"loss", e.loss}, {"lr", e.learning_rate}});
  }
  return a;
}

void WriteText(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw DataError("cannot write " + path);
  f << text;
}

std::string ReadText(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw DataError("cannot read " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

Pipeline::Pipeline(ExperimentConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.Validate();
  if (cfg_.output_root.empty()) {
    throw ConfigError("output_root is not set");
  }
  paths_.root = cfg_.output_root;
  fs::create_directories(paths_.root);
  fs::create_directories(paths_.CheckpointDir());
  fs::create_directories(paths_.EvalDir());
  fs::create_directories(paths_.CurveDir());
  fs::create_directories(paths_.RunsDir());
}

DatasetManifest Pipeline::RunIngest() {
  DatasetManifest m = Ingest(cfg_.data_root, cfg_.split_ratios, cfg_.seed);
  m.SaveFile(paths_.Manifest());
  const PairsFile pairs = MakeVerificationPairs(m, cfg_.pairs_folds,
                                                cfg_.pairs_per_fold, cfg_.seed);
  WritePairsFile(pairs, paths_.Pairs());
  return m;
}

DatasetManifest Pipeline::LoadManifest() const {
  if (!fs::exists(paths_.Manifest())) {
    throw DependencyError("missing dataset manifest; run the ingest stage first");
  }
  return DatasetManifest::LoadFile(paths_.Manifest());
}

void Pipeline::RequireCheckpoint(const std::string& path,
                                 const std::string& stage) const {
  if (!fs::exists(path)) {
    throw DependencyError("stage requires missing predecessor '" + stage +
                          "' (expected checkpoint " + path + ")");
  }
}

std::string Pipeline::VerifiedHash(const std::string& ckpt_path) const {
  const std::string hash = HashFile(ckpt_path);
  const std::string meta_path = RunPaths::Meta(ckpt_path);
  if (fs::exists(meta_path)) {
    const json meta = json::parse(ReadText(meta_path));
    const std::string recorded = meta.at("sha256").get<std::string>();
    if (recorded != hash) {
      throw DependencyError("checkpoint " + ckpt_path +
                            " does not match its recorded content hash");
    }
  }
  return hash;
}

void Pipeline::SaveStageMeta(
    const std::string& ckpt_path, const std::string& stage,
    const std::vector<std::pair<std::string, std::string>>& preds,
    const std::string& metrics_json) const {
  json meta;
  meta["stage"] = stage;
  meta["checkpoint"] = ckpt_path;
  meta["sha256"] = HashFile(ckpt_path);
  meta["predecessors"] = json::object();
  for (const auto& [name, hash] : preds) meta["predecessors"][name] = hash;
  meta["metrics"] = json::parse(metrics_json);
  WriteText(RunPaths::Meta(ckpt_path), meta.dump(2));
}

BaseExtractor& Pipeline::GetExtractor() {
  if (!extractor_) {
    RequireCheckpoint(paths_.Extractor(), "extractor");
    VerifiedHash(paths_.Extractor());
    extractor_ = BaseExtractor::FromCheckpoint(Checkpoint::LoadFile(paths_.Extractor()));
  }
  return *extractor_;
}

FeatureCodec& Pipeline::GetFeatureCodec(int point) {
  const size_t n = cfg_.feature_codec.lambda1_sweep.size();
  Check(point >= 0 && static_cast<size_t>(point) < n, "codec point out of range");
  if (codecs_.size() != n) codecs_.resize(n);
  if (!codecs_[static_cast<size_t>(point)]) {
    const std::string path = paths_.FeatureCodec(point);
    RequireCheckpoint(path, "feature_codec");
    VerifiedHash(path);
    codecs_[static_cast<size_t>(point)] =
        FeatureCodec::FromCheckpoint(Checkpoint::LoadFile(path));
  }
  return *codecs_[static_cast<size_t>(point)];
}

TextureGenerator& Pipeline::GetGenerator() {
  if (!generator_) {
    RequireCheckpoint(paths_.Generator(), "generator");
    VerifiedHash(paths_.Generator());
    generator_ = TextureGenerator::FromCheckpoint(Checkpoint::LoadFile(paths_.Generator()));
  }
  return *generator_;
}

EnhancementCodec& Pipeline::GetEnhancement(int point) {
  const size_t n = cfg_.enhancement.rate_weight_sweep.size();
  Check(point >= 0 && static_cast<size_t>(point) < n, "enhancement point out of range");
  if (enhancements_.size() != n) enhancements_.resize(n);
  if (!enhancements_[static_cast<size_t>(point)]) {
    const std::string path = paths_.Enhancement(point);
    RequireCheckpoint(path, "enhancement");
    VerifiedHash(path);
    enhancements_[static_cast<size_t>(point)] =
        EnhancementCodec::FromCheckpoint(Checkpoint::LoadFile(path));
  }
  return *enhancements_[static_cast<size_t>(point)];
}

int Pipeline::SelectedBasePoint() const {
  if (!fs::exists(paths_.BaseSelected())) {
    throw DependencyError(
        "no base operating point selected; run the base evaluation first or "
        "pass an explicit base point");
  }
  const json j = json::parse(ReadText(paths_.BaseSelected()));
  return j.at("selected_point").get<int>();
}

void Pipeline::TrainStage(const std::string& stage, int point, int base_point) {
  const DatasetManifest manifest = LoadManifest();
  if (stage == "extractor") {
    LoadedFaces train = LoadFaces(manifest, Split::kTrain, cfg_.extractor.input_size);
    ExtractorConfig ecfg = cfg_.extractor;
    ecfg.num_classes = static_cast<int>(manifest.train_identities.size());
    if (ecfg.num_classes < 2) {
      throw DataError("extractor training needs at least two train identities");
    }
    Rng rng(cfg_.seed);
    Rng init = rng.Fork("extractor-init");
    BaseExtractor model(ecfg, init);
    const auto result = TrainExtractor(&model, train, rng.Fork("extractor-train").NextU64());
    model.ToCheckpoint().SaveFile(paths_.Extractor());
    json metrics;
    metrics["log"] = LogToJson(result.log);
    metrics["final_train_accuracy"] = result.final_train_accuracy;
    SaveStageMeta(paths_.Extractor(), "extractor", {}, metrics.dump());
    extractor_.reset();
    return;
  }
  if (stage == "feature_codec") {
    RequireCheckpoint(paths_.Extractor(), "extractor");
    const std::string pred_hash = VerifiedHash(paths_.Extractor());
    BaseExtractor& extractor = GetExtractor();
    const auto& sweep1 = cfg_.feature_codec.lambda1_sweep;
    const auto& sweep2 = cfg_.feature_codec.lambda2_sweep;
    Check(point >= 0 && static_cast<size_t>(point) < sweep1.size(),
          "feature codec operating point out of range");
    LoadedFaces train = LoadFaces(manifest, Split::kTrain, cfg_.generator.output_size);
    LoadedFaces val = LoadFaces(manifest, Split::kVal, cfg_.generator.output_size);
    FeatureCodecConfig ccfg = cfg_.feature_codec;
    Rng rng(cfg_.seed);
    Rng init = rng.Fork("feature-codec-init-" + std::to_string(point));
    FeatureCodec codec(ccfg, extractor.config(), init);
    codec.InitTransformHeadFrom(extractor);
    const auto result = TrainFeatureCodec(
        &codec, extractor, train, val, sweep1[static_cast<size_t>(point)],
        sweep2[static_cast<size_t>(point)],
        rng.Fork("feature-codec-train-" + std::to_string(point)).NextU64());
    codec.ToCheckpoint().SaveFile(paths_.FeatureCodec(point));
    json metrics;
    metrics["log"] = LogToJson(result.log);
    metrics["lambda1"] = sweep1[static_cast<size_t>(point)];
    metrics["lambda2"] = sweep2[static_cast<size_t>(point)];
    metrics["val_fidelity"] = result.val_fidelity;
    metrics["val_relative_error"] = result.val_relative_error;
    metrics["mean_code_bits"] = result.mean_code_bits;
    metrics["val_bpp"] = result.mean_code_bits /
                         (static_cast<double>(cfg_.generator.output_size) *
                          cfg_.generator.output_size);
    SaveStageMeta(paths_.FeatureCodec(point), "feature_codec",
                  {{"extractor", pred_hash}}, metrics.dump());
    codecs_.clear();
    return;
  }
  if (stage == "generator") {
    RequireCheckpoint(paths_.Extractor(), "extractor");
    const int bp = base_point >= 0 ? base_point : SelectedBasePoint();
    RequireCheckpoint(paths_.FeatureCodec(bp), "feature_codec");
    const std::string eh = VerifiedHash(paths_.Extractor());
    const std::string ch = VerifiedHash(paths_.FeatureCodec(bp));
    BaseExtractor& extractor = GetExtractor();
    FeatureCodec& codec = GetFeatureCodec(bp);
    LoadedFaces train = LoadFaces(manifest, Split::kTrain, cfg_.generator.output_size);
    LoadedFaces val = LoadFaces(manifest, Split::kVal, cfg_.generator.output_size);
    Rng rng(cfg_.seed);
    Rng init = rng.Fork("generator-init");
    TextureGenerator gen(cfg_.generator, extractor.config(), init);
    gen.InitTransformHeadFrom(codec);
    const auto result = TrainGenerator(&gen, extractor, codec, train, val,
                                       rng.Fork("generator-train").NextU64());
    gen.ToCheckpoint().SaveFile(paths_.Generator());
    json metrics;
    metrics["log"] = LogToJson(result.log);
    metrics["val_loss"] = result.val_loss;
    metrics["base_point"] = bp;
    SaveStageMeta(paths_.Generator(), "generator",
                  {{"extractor", eh}, {"feature_codec", ch}}, metrics.dump());
    generator_.reset();
    return;
  }
  if (stage == "enhancement") {
    RequireCheckpoint(paths_.Generator(), "generator");
    const std::string gh = VerifiedHash(paths_.Generator());
    const auto& sweep = cfg_.enhancement.rate_weight_sweep;
    Check(point >= 0 && static_cast<size_t>(point) < sweep.size(),
          "enhancement operating point out of range");
    const json gen_meta = json::parse(ReadText(RunPaths::Meta(paths_.Generator())));
    const int bp = gen_meta.at("metrics").at("base_point").get<int>();
    BaseExtractor& extractor = GetExtractor();
    FeatureCodec& codec = GetFeatureCodec(bp);
    TextureGenerator& gen = GetGenerator();

    const int S = cfg_.generator.output_size;
    LoadedFaces train = LoadFaces(manifest, Split::kTrain, S);
    LoadedFaces val = LoadFaces(manifest, Split::kVal, S);
    auto bases = [&](const LoadedFaces& faces) {
      const Tensor inputs = ResizeBatch(faces.images, extractor.config().input_size);
      const Tensor feats = extractor.ExtractBatch(inputs);
      Tensor xb(faces.images.shape());
      for (int i = 0; i < feats.dim(0); ++i) {
        const Tensor f_rec = codec.DecodeFromCode(codec.EncodeToCode(feats.Slice(i)));
        xb.SetSlice(i, gen.GenerateBase(f_rec));
      }
      return xb;
    };
    const Tensor train_base = bases(train);
    const Tensor val_base = bases(val);

    EnhancementConfig ecfg = cfg_.enhancement;
    Rng rng(cfg_.seed);
    Rng init = rng.Fork("enhancement-init-" + std::to_string(point));
    EnhancementCodec codec_e(ecfg, init);
    codec_e.set_model_id(static_cast<uint16_t>(point));
    const auto result = TrainEnhancement(
        &codec_e, train.images, train_base, val.images, val_base,
        sweep[static_cast<size_t>(point)],
        rng.Fork("enhancement-train-" + std::to_string(point)).NextU64());
    codec_e.ToCheckpoint().SaveFile(paths_.Enhancement(point));
    json metrics;
    metrics["log"] = LogToJson(result.log);
    metrics["rate_weight"] = sweep[static_cast<size_t>(point)];
    metrics["val_bpp"] = result.val_bpp;
    metrics["val_satd"] = result.val_satd;
    metrics["val_psnr"] = result.val_psnr;
    metrics["base_point"] = bp;
    SaveStageMeta(paths_.Enhancement(point), "enhancement",
                  {{"generator", gh}}, metrics.dump());
    enhancements_.clear();
    return;
  }
  throw ConfigError("unknown stage: " + stage);
}

void Pipeline::SweepStage(const std::string& stage, int base_point) {
  if (stage == "feature_codec") {
    for (size_t i = 0; i < cfg_.feature_codec.lambda1_sweep.size(); ++i) {
      std::cerr << "[sweep] feature_codec point " << i << " (lambda1="
                << cfg_.feature_codec.lambda1_sweep[i] << ")\n";
      TrainStage("feature_codec", static_cast<int>(i));
    }
    return;
  }
  if (stage == "enhancement") {
    for (size_t i = 0; i < cfg_.enhancement.rate_weight_sweep.size(); ++i) {
      std::cerr << "[sweep] enhancement point " << i << " (rate_weight="
                << cfg_.enhancement.rate_weight_sweep[i] << ")\n";
      TrainStage("enhancement", static_cast<int>(i), base_point);
    }
    return;
  }
  throw ConfigError("sweep supports feature_codec and enhancement, got " + stage);
}

BaseEvalResult Pipeline::RunEvalBase() {
  const DatasetManifest manifest = LoadManifest();
  if (!fs::exists(paths_.Pairs())) {
    throw DependencyError("missing pairs file; run ingest first");
  }
  const PairsFile pairs = ReadPairsFile(paths_.Pairs());
  BaseExtractor& extractor = GetExtractor();

  LoadedFaces test = LoadFaces(manifest, Split::kTest, cfg_.generator.output_size);
  const Tensor inputs = ResizeBatch(test.images, extractor.config().input_size);
  const Tensor feats = extractor.ExtractBatch(inputs);
  const double pixels = static_cast<double>(cfg_.generator.output_size) *
                        cfg_.generator.output_size;

  FeatureMap raw_features;
  for (size_t i = 0; i < test.entries.size(); ++i) {
    raw_features[PairKey(test.entries[i]->identity,
                         test.entries[i]->index_in_identity)] =
        feats.Slice(static_cast<int>(i));
  }
  const VerificationResult raw = VerificationAccuracy(pairs, raw_features);

  BaseEvalResult result;
  result.uncompressed_accuracy = raw.accuracy;
  result.uncompressed_auc = raw.auc;

  std::vector<RatePoint> rate_points;
  for (size_t p = 0; p < cfg_.feature_codec.lambda1_sweep.size(); ++p) {
    FeatureCodec& codec = GetFeatureCodec(static_cast<int>(p));
    FeatureMap decoded;
    double bits = 0.0;
    for (size_t i = 0; i < test.entries.size(); ++i) {
      const Bytes payload = codec.EncodeFeature(feats.Slice(static_cast<int>(i)));
      bits += 8.0 * static_cast<double>(payload.size());
      decoded[PairKey(test.entries[i]->identity,
                      test.entries[i]->index_in_identity)] =
          codec.DecodeFeature(payload);
    }
    const double bpp = bits / (static_cast<double>(test.entries.size()) * pixels);
    const VerificationResult ver = VerificationAccuracy(pairs, decoded);
    BaseSweepPoint sp;
    sp.point = static_cast<int>(p);
    sp.lambda1 = cfg_.feature_codec.lambda1_sweep[p];
    sp.lambda2 = cfg_.feature_codec.lambda2_sweep[p];
    sp.bpp = bpp;
    sp.accuracy = ver.accuracy;
    sp.auc = ver.auc;
    result.sweep.push_back(sp);

    RatePoint rp;
    rp.bpp = bpp;
    rp.metric_name = "accuracy";
    rp.metric_value = ver.accuracy;
    rp.layer = "base";
    rp.operating_point_id = "p" + std::to_string(p);
    rate_points.push_back(rp);
    rp.metric_name = "auc";
    rp.metric_value = ver.auc;
    rate_points.push_back(rp);
  }

  std::sort(result.sweep.begin(), result.sweep.end(),
            [](const BaseSweepPoint& a, const BaseSweepPoint& b) {
              return a.bpp < b.bpp;
            });

  // Saturation-point budgeting over the accuracy points.
  std::vector<RatePoint> acc_points;
  for (const auto& p : rate_points) {
    if (p.metric_name == "accuracy") acc_points.push_back(p);
  }
  const RatePoint& chosen = FixedBaseBudgeting(acc_points);
  result.selected_point = std::stoi(chosen.operating_point_id.substr(1));
  result.selected_bpp = chosen.bpp;

  WriteRateCsv(rate_points, paths_.BaseSweepCsv());
  json sel;
  sel["selected_point"] = result.selected_point;
  sel["selected_bpp"] = result.selected_bpp;
  sel["uncompressed_accuracy"] = result.uncompressed_accuracy;
  sel["uncompressed_auc"] = result.uncompressed_auc;
  sel["sweep"] = json::array();
  for (const auto& p : result.sweep) {
    sel["sweep"].push_back({{"point", p.point},
                            {"lambda1", p.lambda1},
                            {"lambda2", p.lambda2},
                            {"bpp", p.bpp},
                            {"accuracy", p.accuracy},
                            {"auc", p.auc}});
  }
  WriteText(paths_.BaseSelected(), sel.dump(2));
  return result;
}

RdEvalResult Pipeline::RunEvalFull(int base_point) {
  const DatasetManifest manifest = LoadManifest();
  const int bp = base_point >= 0 ? base_point : SelectedBasePoint();
  BaseExtractor& extractor = GetExtractor();
  FeatureCodec& codec = GetFeatureCodec(bp);
  TextureGenerator& gen = GetGenerator();

  const int S = cfg_.generator.output_size;
  LoadedFaces test = LoadFaces(manifest, Split::kTest, S);
  const Tensor inputs = ResizeBatch(test.images, extractor.config().input_size);
  const Tensor feats = extractor.ExtractBatch(inputs);
  const int n = feats.dim(0);

  // Base reconstructions are shared by all operating points.
  Tensor bases({n, S, S, 3});
  double base_psnr = 0.0, base_msssim = 0.0;
  for (int i = 0; i < n; ++i) {
    const Tensor f_rec = codec.DecodeFromCode(codec.EncodeToCode(feats.Slice(i)));
    const Tensor xb = gen.GenerateBase(f_rec);
    bases.SetSlice(i, xb);
    base_psnr += Psnr(test.images.Slice(i), xb);
    base_msssim += MsSsim(test.images.Slice(i), xb);
  }
  base_psnr /= n;
  base_msssim /= n;

  RdEvalResult result;
  result.base_point = bp;
  std::vector<RatePoint> rate_points;
  for (size_t p = 0; p < cfg_.enhancement.rate_weight_sweep.size(); ++p) {
    EnhancementCodec& enh = GetEnhancement(static_cast<int>(p));
    double total_bpp = 0.0, base_bpp = 0.0, psnr = 0.0, msssim = 0.0;
    for (int i = 0; i < n; ++i) {
      const Tensor x = test.images.Slice(i);
      const Bytes base_payload = codec.EncodeFeature(feats.Slice(i));
      const Bytes enh_payload = enh.EncodeEnhancement(x, bases.Slice(i));
      const Bytes stream = Mux(base_payload, enh_payload, S, S);
      total_bpp += Bpp(stream, BppLayer::kTotal);
      base_bpp += Bpp(stream, BppLayer::kBase);
      bool used = false;
      const Tensor x_rec = DecodeImageStreamWith(stream, codec, gen, enh, &used);
      psnr += Psnr(x, x_rec);
      msssim += MsSsim(x, x_rec);
    }
    RdEvalPoint pt;
    pt.point = static_cast<int>(p);
    pt.rate_weight = cfg_.enhancement.rate_weight_sweep[p];
    pt.total_bpp = total_bpp / n;
    pt.base_bpp = base_bpp / n;
    pt.psnr = psnr / n;
    pt.ms_ssim = msssim / n;
    pt.base_psnr = base_psnr;
    pt.base_ms_ssim = base_msssim;
    result.points.push_back(pt);

    RatePoint rp;
    rp.bpp = pt.total_bpp;
    rp.layer = "total";
    rp.operating_point_id = "e" + std::to_string(p);
    rp.metric_name = "psnr";
    rp.metric_value = pt.psnr;
    rate_points.push_back(rp);
    rp.metric_name = "ms_ssim";
    rp.metric_value = pt.ms_ssim;
    rate_points.push_back(rp);
  }
  std::sort(result.points.begin(), result.points.end(),
            [](const RdEvalPoint& a, const RdEvalPoint& b) {
              return a.total_bpp < b.total_bpp;
            });
  WriteRateCsv(rate_points, paths_.RdPointsCsv());
  json j;
  j["base_point"] = bp;
  j["base_psnr"] = base_psnr;
  j["base_ms_ssim"] = base_msssim;
  j["points"] = json::array();
  for (const auto& p : result.points) {
    j["points"].push_back({{"point", p.point},
                           {"rate_weight", p.rate_weight},
                           {"total_bpp", p.total_bpp},
                           {"base_bpp", p.base_bpp},
                           {"psnr", p.psnr},
                           {"ms_ssim", p.ms_ssim},
                           {"base_psnr", p.base_psnr},
                           {"base_ms_ssim", p.base_ms_ssim}});
  }
  WriteText(paths_.RdPointsJson(), j.dump(2));
  return result;
}

void Pipeline::RunCurves() {
  bool wrote = false;
  if (fs::exists(paths_.BaseSweepCsv())) {
    const json sel = json::parse(ReadText(paths_.BaseSelected()));
    std::vector<RatePoint> pts;
    for (const auto& p : sel.at("sweep")) {
      RatePoint rp;
      rp.bpp = p.at("bpp").get<double>();
      rp.metric_name = "accuracy";
      rp.metric_value = p.at("accuracy").get<double>();
      rp.layer = "base";
      rp.operating_point_id = "p" + std::to_string(p.at("point").get<int>());
      pts.push_back(rp);
    }
    WriteRateSvg(pts, paths_.CurveDir() + "/rate_accuracy.svg",
                 "Base layer rate-accuracy");
    wrote = true;
  }
  if (fs::exists(paths_.RdPointsJson())) {
    const json j = json::parse(ReadText(paths_.RdPointsJson()));
    std::vector<RatePoint> psnr_pts, ssim_pts;
    for (const auto& p : j.at("points")) {
      RatePoint rp;
      rp.bpp = p.at("total_bpp").get<double>();
      rp.layer = "total";
      rp.operating_point_id = "e" + std::to_string(p.at("point").get<int>());
      rp.metric_name = "psnr";
      rp.metric_value = p.at("psnr").get<double>();
      psnr_pts.push_back(rp);
      rp.metric_name = "ms_ssim";
      rp.metric_value = p.at("ms_ssim").get<double>();
      ssim_pts.push_back(rp);
    }
    WriteRateSvg(psnr_pts, paths_.CurveDir() + "/rate_distortion_psnr.svg",
                 "Scalable rate-distortion (PSNR)");
    WriteRateSvg(ssim_pts, paths_.CurveDir() + "/rate_distortion_msssim.svg",
                 "Scalable rate-distortion (MS-SSIM)");
    wrote = true;
  }
  if (!wrote) {
    throw DependencyError("no evaluation artifacts found; run eval first");
  }
}

Bytes Pipeline::EncodeImage(const Tensor& image, bool base_only, int base_point,
                            int enh_point) {
  const int bp = base_point >= 0 ? base_point : SelectedBasePoint();
  const int S = cfg_.generator.output_size;
  Tensor x = image;
  if (x.dim(0) != S || x.dim(1) != S) {
    x = ResizeBatch(image.Reshaped({1, image.dim(0), image.dim(1), image.dim(2)}), S)
            .Reshaped({S, S, 3});
  }
  BaseExtractor& extractor = GetExtractor();
  FeatureCodec& codec = GetFeatureCodec(bp);
  const Tensor input =
      ResizeBatch(x.Reshaped({1, S, S, 3}), extractor.config().input_size);
  const Tensor f = extractor.ExtractBatch(input).Reshaped({extractor.config().embed_dim});
  const Bytes base_payload = codec.EncodeFeature(f);
  if (base_only) {
    return Mux(base_payload, std::nullopt, S, S);
  }
  const int ep = enh_point >= 0
                     ? enh_point
                     : static_cast<int>(cfg_.enhancement.rate_weight_sweep.size()) - 1;
  TextureGenerator& gen = GetGenerator();
  EnhancementCodec& enh = GetEnhancement(ep);
  const Tensor f_rec = codec.DecodeFromCode(codec.EncodeToCode(f));
  const Tensor x_base = gen.GenerateBase(f_rec);
  const Bytes enh_payload = enh.EncodeEnhancement(x, x_base);
  return Mux(base_payload, enh_payload, S, S);
}

Tensor Pipeline::DecodeFeature(const Bytes& stream, int base_point) {
  const int bp = base_point >= 0 ? base_point : SelectedBasePoint();
  // Base-only parse: enhancement bytes are never touched.
  const ContainerContents c = DemuxBaseOnly(stream);
  return GetFeatureCodec(bp).DecodeFeature(c.base_payload);
}

Tensor Pipeline::DecodeImageStreamWith(const Bytes& stream, FeatureCodec& codec,
                                       TextureGenerator& gen,
                                       EnhancementCodec& enh,
                                       bool* used_enhancement) {
  const ContainerContents c = Demux(stream);
  const Tensor f_rec = codec.DecodeFromCode(
      EntropyDecode(c.base_payload, codec.symbol_model()));
  const Tensor x_base = gen.GenerateBase(f_rec);
  if (!c.enhancement_payload.has_value()) {
    if (used_enhancement) *used_enhancement = false;
    return x_base;
  }
  if (used_enhancement) *used_enhancement = true;
  return enh.DecodeEnhancement(*c.enhancement_payload, x_base);
}

Tensor Pipeline::DecodeImage(const Bytes& stream, int base_point,
                             bool* used_enhancement) {
  const int bp = base_point >= 0 ? base_point : SelectedBasePoint();
  const ContainerContents c = Demux(stream);
  FeatureCodec& codec = GetFeatureCodec(bp);
  TextureGenerator& gen = GetGenerator();
  const Tensor f_rec = codec.DecodeFromCode(
      EntropyDecode(c.base_payload, codec.symbol_model()));
  const Tensor x_base = gen.GenerateBase(f_rec);
  if (!c.enhancement_payload.has_value()) {
    if (used_enhancement) *used_enhancement = false;
    std::cerr << "warning: stream has no enhancement layer; returning the "
                 "base-layer texture\n";
    return x_base;
  }
  // The payload names its own operating point in the leading two bytes.
  ByteReader r(*c.enhancement_payload);
  const uint16_t model_id = r.U16();
  EnhancementCodec& enh = GetEnhancement(model_id);
  if (used_enhancement) *used_enhancement = true;
  return enh.DecodeEnhancement(*c.enhancement_payload, x_base);
}

void Pipeline::WriteRunRecord(const std::string& command) const {
  json rec;
  rec["command"] = command;
  rec["seed"] = cfg_.seed;
  rec["config"] = json::parse(cfg_.ToJson());
  rec["checkpoints"] = json::object();
  auto add = [&](const std::string& path) {
    if (fs::exists(path)) rec["checkpoints"][fs::path(path).filename().string()] = HashFile(path);
  };
  add(paths_.Extractor());
  for (size_t i = 0; i < cfg_.feature_codec.lambda1_sweep.size(); ++i) {
    add(paths_.FeatureCodec(static_cast<int>(i)));
  }
  add(paths_.Generator());
  for (size_t i = 0; i < cfg_.enhancement.rate_weight_sweep.size(); ++i) {
    add(paths_.Enhancement(static_cast<int>(i)));
  }
  const std::string digest = Sha256::HexDigest(
      Bytes(command.begin(), command.end()));
  WriteText(paths_.RunsDir() + "/run_" + digest.substr(0, 12) + ".json",
            rec.dump(2));
}

}  // namespace sfc
