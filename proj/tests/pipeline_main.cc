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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "sfc/facegen.h"
#include "sfc/image_io.h"
#include "sfc/pipeline.h"

using namespace sfc;
namespace fs = std::filesystem;

namespace {

// One tiny staged run shared by every test case in this binary.
struct MiniRun {
  std::string data_dir;
  std::string out_dir;
  ExperimentConfig cfg;
  std::unique_ptr<Pipeline> pipeline;

  MiniRun() {
    const auto base = fs::temp_directory_path() / "sfc_pipeline_it";
    data_dir = (base / "data").string();
    out_dir = (base / "run").string();
    fs::remove_all(base);
    GenerateToyFaces(data_dir, 5, 6, 32, 21);

    cfg = ExperimentConfig::ToyDefaults();
    cfg.seed = 77;
    cfg.data_root = data_dir;
    cfg.output_root = out_dir;
    cfg.split_ratios = {2, 1, 2};
    cfg.pairs_folds = 4;
    cfg.pairs_per_fold = 4;
    cfg.extractor.backbone = {{3, 8, 2}, {3, 16, 2}};
    cfg.extractor.embed_dim = 8;
    cfg.extractor.input_size = 32;
    cfg.extractor.transform_size = 8;
    cfg.extractor.head_seed_channels = 8;
    cfg.extractor.head = {{3, 8, 2}, {3, 3, 2}};
    cfg.extractor.epochs = 4;
    cfg.extractor.batch_size = 8;
    cfg.feature_codec.feature_dim = 8;
    cfg.feature_codec.hidden_widths = {12, 12};
    cfg.feature_codec.latent_dim = 8;
    cfg.feature_codec.lambda1_sweep = {1e-4, 1e-8};
    cfg.feature_codec.lambda2_sweep = {7e-2, 1e-7};
    cfg.feature_codec.epochs = 4;
    cfg.generator.num_levels = 2;
    cfg.generator.output_size = 32;
    cfg.generator.level_filters = {8, 8};
    cfg.generator.epochs = 2;
    cfg.enhancement.image_size = 32;
    cfg.enhancement.analysis_channels = {8, 12, 12};
    cfg.enhancement.hyper_channels = 8;
    cfg.enhancement.hyper_latent_channels = 4;
    cfg.enhancement.rate_weight_sweep = {1e-1, 1e-4};
    cfg.enhancement.epochs = 2;
    cfg.enhancement.batch_size = 4;
    pipeline = std::make_unique<Pipeline>(cfg);
  }
};

MiniRun& Run() {
  static MiniRun run;
  return run;
}

}  // namespace

TEST_CASE("stage dependencies are enforced before anything is trained") {
  auto& r = Run();
  // No manifest yet.
  CHECK_THROWS_AS(r.pipeline->TrainStage("extractor"), DependencyError);
  r.pipeline->RunIngest();
  // Codec before extractor.
  CHECK_THROWS_WITH_AS(r.pipeline->TrainStage("feature_codec", 0),
                       doctest::Contains("extractor"), DependencyError);
  // Generator before codec (explicit base point skips the eval artifact).
  r.pipeline->TrainStage("extractor");
  CHECK_THROWS_WITH_AS(r.pipeline->TrainStage("generator", 0, 0),
                       doctest::Contains("feature_codec"), DependencyError);
  // Enhancement before generator.
  CHECK_THROWS_WITH_AS(r.pipeline->TrainStage("enhancement", 0),
                       doctest::Contains("generator"), DependencyError);
  // Saturation selection requires the base evaluation artifact.
  CHECK_THROWS_AS(r.pipeline->SelectedBasePoint(), DependencyError);
}

TEST_CASE("ingest is deterministic and identity-disjoint") {
  auto& r = Run();
  const DatasetManifest m1 = r.pipeline->RunIngest();
  const DatasetManifest m2 = r.pipeline->RunIngest();
  CHECK(m1.content_hash == m2.content_hash);
  CHECK(m1.train_identities.size() == 2);
  CHECK(m1.val_identities.size() == 1);
  CHECK(m1.test_identities.size() == 2);
  for (const auto& id : m1.train_identities) {
    for (const auto& t : m1.test_identities) CHECK(id != t);
  }
}

TEST_CASE("full staged mini run trains, evaluates and codes end to end") {
  auto& r = Run();
  r.pipeline->RunIngest();
  r.pipeline->TrainStage("extractor");
  r.pipeline->SweepStage("feature_codec");
  const BaseEvalResult base = r.pipeline->RunEvalBase();
  CHECK(base.sweep.size() == 2);
  CHECK(base.selected_point >= 0);

  r.pipeline->TrainStage("generator");
  r.pipeline->SweepStage("enhancement");
  const RdEvalResult rd = r.pipeline->RunEvalFull();
  CHECK(rd.points.size() == 2);
  r.pipeline->RunCurves();
  CHECK(fs::exists(r.out_dir + "/curves/rate_accuracy.svg"));
  CHECK(fs::exists(r.out_dir + "/curves/rate_distortion_psnr.svg"));

  const Tensor image = RenderToyFace(999, 1234, 32);

  SUBCASE("encode is idempotent and base-only streams are smaller") {
    const Bytes full1 = r.pipeline->EncodeImage(image, false);
    const Bytes full2 = r.pipeline->EncodeImage(image, false);
    CHECK(full1 == full2);
    const Bytes base_only = r.pipeline->EncodeImage(image, true);
    CHECK(base_only.size() < full1.size());
  }

  SUBCASE("feature decode never touches enhancement bytes") {
    const Bytes full = r.pipeline->EncodeImage(image, false);
    const Bytes trunc = TruncateToBase(full);
    const Tensor f1 = r.pipeline->DecodeFeature(full);
    const Tensor f2 = r.pipeline->DecodeFeature(trunc);
    REQUIRE(f1.SameShape(f2));
    for (size_t i = 0; i < f1.size(); ++i) CHECK(f1[i] == f2[i]);

    // Even a stream whose enhancement block is pure garbage feature-decodes,
    // because the base path stops at the base block.
    ContainerContents c = Demux(full);
    Bytes garbage(100000, 0xAB);
    const Bytes polluted = Mux(c.base_payload, garbage, c.height, c.width);
    const Tensor f3 = r.pipeline->DecodeFeature(polluted);
    for (size_t i = 0; i < f1.size(); ++i) CHECK(f1[i] == f3[i]);
  }

  SUBCASE("feature decode cost does not grow with enhancement size") {
    const Bytes small = r.pipeline->EncodeImage(image, true);
    ContainerContents c = DemuxBaseOnly(small);
    Bytes big_enh(1 << 20, 0x5C);
    const Bytes big = Mux(c.base_payload, big_enh, 32, 32);
    auto time_decode = [&](const Bytes& stream) {
      const auto t0 = std::chrono::steady_clock::now();
      for (int i = 0; i < 50; ++i) {
        (void)r.pipeline->DecodeFeature(stream);
      }
      return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
    };
    time_decode(small);  // warm
    const double t_small = time_decode(small);
    const double t_big = time_decode(big);
    CHECK(t_big / t_small < 1.2);
  }

  SUBCASE("image decode falls back to the base texture without enhancement") {
    const Bytes base_only = r.pipeline->EncodeImage(image, true);
    bool used = true;
    const Tensor xb = r.pipeline->DecodeImage(base_only, -1, &used);
    CHECK(!used);
    CHECK(xb.dim(0) == 32);

    const Bytes full = r.pipeline->EncodeImage(image, false);
    const Tensor xr = r.pipeline->DecodeImage(full, -1, &used);
    CHECK(used);
    CHECK(xr.dim(0) == 32);
  }

  SUBCASE("run records capture checkpoint hashes") {
    r.pipeline->WriteRunRecord("test command");
    bool found = false;
    for (const auto& e : fs::directory_iterator(r.out_dir + "/runs")) {
      std::ifstream f(e.path());
      std::string text((std::istreambuf_iterator<char>(f)),
                       std::istreambuf_iterator<char>());
      if (text.find("extractor.ckpt") != std::string::npos) found = true;
    }
    CHECK(found);
  }

  SUBCASE("tampered checkpoints are refused") {
    const std::string victim = r.pipeline->paths().FeatureCodec(1);
    // Append a byte: hash no longer matches the recorded one.
    {
      std::ofstream f(victim, std::ios::binary | std::ios::app);
      f.put(0);
    }
    ExperimentConfig cfg2 = r.cfg;
    Pipeline fresh(cfg2);
    CHECK_THROWS_AS(fresh.GetFeatureCodec(1), DependencyError);
    // Restore by retraining that point.
    fresh.TrainStage("feature_codec", 1);
    CHECK_NOTHROW(fresh.GetFeatureCodec(1));
  }
}

#ifdef SFC_CLI_PATH
TEST_CASE("CLI exit codes follow the documented mapping") {
  auto& r = Run();
  const std::string cli = SFC_CLI_PATH;
  const std::string cfg_path = r.out_dir + "/config.json";
  r.cfg.SaveFile(cfg_path);

  auto run_cli = [&](const std::string& args) {
    const std::string cmd = cli + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
  };

  // Missing config file -> config error (2).
  CHECK(run_cli("--config /nonexistent.json ingest") == 2);
  // dump of a non-stream -> decode error (5).
  {
    std::ofstream junk(r.out_dir + "/junk.sfc", std::ios::binary);
    junk << "garbage";
  }
  CHECK(run_cli("dump " + r.out_dir + "/junk.sfc") == 5);
  // Fresh output root without checkpoints -> dependency error (3).
  ExperimentConfig fresh_cfg = r.cfg;
  fresh_cfg.output_root = r.out_dir + "_fresh";
  const std::string fresh_path = r.out_dir + "/fresh_config.json";
  fresh_cfg.SaveFile(fresh_path);
  CHECK(run_cli("--config " + fresh_path + " train feature_codec") == 3);
  // Data error: ingest over a nonexistent corpus (4).
  ExperimentConfig bad_data = fresh_cfg;
  bad_data.data_root = "/nonexistent_corpus";
  const std::string bad_path = r.out_dir + "/bad_data_config.json";
  bad_data.SaveFile(bad_path);
  CHECK(run_cli("--config " + bad_path + " ingest") == 4);
  // Happy path: dump of a real stream (0).
  const Tensor image = RenderToyFace(5, 6, 32);
  const Bytes stream = r.pipeline->EncodeImage(image, true);
  {
    std::ofstream f(r.out_dir + "/ok.sfc", std::ios::binary);
    f.write(reinterpret_cast<const char*>(stream.data()),
            static_cast<std::streamsize>(stream.size()));
  }
  CHECK(run_cli("dump " + r.out_dir + "/ok.sfc") == 0);
}
#endif
