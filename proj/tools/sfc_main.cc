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

#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "sfc/bitstream.h"
#include "sfc/common.h"
#include "sfc/image_io.h"
#include "sfc/pipeline.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitDependency = 3;
constexpr int kExitData = 4;
constexpr int kExitDecode = 5;

sfc::Bytes ReadFileBytes(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw sfc::DataError("cannot read " + path);
  return sfc::Bytes((std::istreambuf_iterator<char>(f)),
                    std::istreambuf_iterator<char>());
}

void WriteFileBytes(const std::string& path, const sfc::Bytes& bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw sfc::DataError("cannot write " + path);
  f.write(reinterpret_cast<const char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
}

// Decoded feature file: magic "SFCF" + dim varint + float32 LE values.
void WriteFeatureFile(const std::string& path, const sfc::Tensor& f) {
  sfc::ByteWriter w;
  w.Raw(reinterpret_cast<const uint8_t*>("SFCF"), 4);
  w.Varint(f.size());
  for (size_t i = 0; i < f.size(); ++i) w.F32(f[i]);
  WriteFileBytes(path, w.bytes());
}

sfc::ExperimentConfig LoadConfig(const std::string& config_path,
                                 const std::string& out_override) {
  if (config_path.empty()) {
    throw sfc::ConfigError("--config is required for this command");
  }
  sfc::ExperimentConfig cfg = sfc::ExperimentConfig::LoadFile(config_path);
  if (!out_override.empty()) {
    cfg.output_root = out_override;
  } else if (const char* env = std::getenv("SFC_OUTPUT_ROOT")) {
    if (cfg.output_root.empty()) cfg.output_root = env;
  }
  return cfg;
}

std::string JoinArgs(int argc, char** argv) {
  std::string s;
  for (int i = 0; i < argc; ++i) {
    if (i) s += " ";
    s += argv[i];
  }
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scalable feature and texture face codec"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_override;
  app.add_option("--config", config_path, "Experiment config JSON");
  app.add_option("--out", out_override,
                 "Output root (overrides config and SFC_OUTPUT_ROOT)");

  auto* ingest = app.add_subcommand("ingest", "Scan the dataset, build manifest and pairs");

  std::string stage;
  int point = 0;
  int base_point = -1;
  auto* train = app.add_subcommand("train", "Train one stage");
  train->add_option("stage", stage,
                    "extractor | feature_codec | generator | enhancement")
      ->required();
  train->add_option("--point", point, "Sweep operating point index");
  train->add_option("--base-point", base_point,
                    "Base codec point for generator training (-1 = saturation)");

  std::string sweep_stage;
  int sweep_base_point = -1;
  auto* sweep = app.add_subcommand("sweep", "Train every operating point of a stage");
  sweep->add_option("stage", sweep_stage, "feature_codec | enhancement")->required();
  sweep->add_option("--base-point", sweep_base_point,
                    "Base codec point for dependent stages");

  std::string enc_image, enc_out;
  bool base_only = false;
  int enc_base_point = -1, enc_enh_point = -1;
  auto* encode = app.add_subcommand("encode", "Encode an image into an .sfc stream");
  encode->add_option("image", enc_image, "Input image (PNG/PPM)")->required();
  encode->add_option("output", enc_out, "Output .sfc path")->required();
  encode->add_flag("--base-only", base_only, "Write the base layer only");
  encode->add_option("--base-point", enc_base_point, "Feature codec point");
  encode->add_option("--enh-point", enc_enh_point, "Enhancement point");

  std::string dec_stream, dec_out;
  bool want_feature = false, want_image = false;
  int dec_base_point = -1;
  auto* decode = app.add_subcommand("decode", "Decode an .sfc stream");
  decode->add_option("stream", dec_stream, "Input .sfc path")->required();
  decode->add_option("output", dec_out, "Output path (.fv or .png)")->required();
  decode->add_flag("--feature", want_feature, "Decode the base feature only");
  decode->add_flag("--image", want_image, "Decode the full texture");
  decode->add_option("--base-point", dec_base_point, "Feature codec point");

  bool eval_base_only = false, eval_full_only = false;
  int eval_base_point = -1;
  auto* eval_cmd = app.add_subcommand("eval", "Rate-accuracy / rate-distortion evaluation");
  eval_cmd->add_flag("--base", eval_base_only, "Base-layer sweep only");
  eval_cmd->add_flag("--full", eval_full_only, "Full scalable sweep only");
  eval_cmd->add_option("--base-point", eval_base_point, "Fixed base point for --full");

  auto* curves = app.add_subcommand("curves", "Render rate curves from eval artifacts");

  std::string dump_path;
  auto* dump = app.add_subcommand("dump", "Print the layout of an .sfc stream");
  dump->add_option("stream", dump_path, "Input .sfc path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (dump->parsed()) {
      std::cout << sfc::DumpLayout(ReadFileBytes(dump_path));
      return kExitOk;
    }

    sfc::ExperimentConfig cfg = LoadConfig(config_path, out_override);
    sfc::Pipeline pipeline(cfg);
    pipeline.WriteRunRecord(JoinArgs(argc, argv));

    if (ingest->parsed()) {
      const sfc::DatasetManifest m = pipeline.RunIngest();
      std::cout << "ingested " << m.entries.size() << " images, "
                << m.train_identities.size() << " train / "
                << m.val_identities.size() << " val / "
                << m.test_identities.size() << " test identities\n"
                << "manifest hash " << m.content_hash << "\n";
    } else if (train->parsed()) {
      pipeline.TrainStage(stage, point, base_point);
      std::cout << "trained stage " << stage << "\n";
    } else if (sweep->parsed()) {
      pipeline.SweepStage(sweep_stage, sweep_base_point);
      std::cout << "swept stage " << sweep_stage << "\n";
    } else if (encode->parsed()) {
      const sfc::Tensor img = sfc::ReadImage(enc_image);
      const sfc::Bytes stream =
          pipeline.EncodeImage(img, base_only, enc_base_point, enc_enh_point);
      WriteFileBytes(enc_out, stream);
      std::cout << "wrote " << stream.size() << " bytes, "
                << sfc::Bpp(stream, sfc::BppLayer::kTotal) << " bpp total\n";
    } else if (decode->parsed()) {
      if (want_feature == want_image) {
        throw sfc::ConfigError("decode needs exactly one of --feature / --image");
      }
      const sfc::Bytes stream = ReadFileBytes(dec_stream);
      if (want_feature) {
        WriteFeatureFile(dec_out, pipeline.DecodeFeature(stream, dec_base_point));
        std::cout << "wrote feature to " << dec_out << "\n";
      } else {
        bool used = false;
        const sfc::Tensor img = pipeline.DecodeImage(stream, dec_base_point, &used);
        sfc::WritePng(img, dec_out);
        std::cout << "wrote image to " << dec_out
                  << (used ? " (base+enhancement)" : " (base only)") << "\n";
      }
    } else if (eval_cmd->parsed()) {
      if (!eval_full_only) {
        const auto base = pipeline.RunEvalBase();
        std::cout << "base sweep: uncompressed accuracy "
                  << base.uncompressed_accuracy << ", selected point "
                  << base.selected_point << " at " << base.selected_bpp
                  << " bpp\n";
      }
      if (!eval_base_only) {
        const auto rd = pipeline.RunEvalFull(eval_base_point);
        for (const auto& p : rd.points) {
          std::cout << "rd point " << p.point << ": " << p.total_bpp
                    << " bpp total, PSNR " << p.psnr << " dB (base "
                    << p.base_psnr << "), MS-SSIM " << p.ms_ssim << "\n";
        }
      }
    } else if (curves->parsed()) {
      pipeline.RunCurves();
      std::cout << "wrote curves to " << pipeline.paths().CurveDir() << "\n";
    }
    return kExitOk;
  } catch (const sfc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const sfc::DependencyError& e) {
    std::cerr << "dependency error: " << e.what() << "\n";
    return kExitDependency;
  } catch (const sfc::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const sfc::DecodeError& e) {
    std::cerr << "decode error: " << e.what() << "\n";
    return kExitDecode;
  } catch (const sfc::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}
