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

#include <iostream>

#include <CLI11.hpp>

#include "sfc/config.h"
#include "sfc/facegen.h"

int main(int argc, char** argv) {
  CLI::App app{"Deterministic procedural face corpus for desk-scale runs"};
  std::string out_dir;
  int identities = 10;
  int images = 50;
  int size = 64;
  uint64_t seed = 7;
  std::string emit_config;
  app.add_option("--out", out_dir, "Corpus root directory")->required();
  app.add_option("--identities", identities, "Number of identities");
  app.add_option("--images", images, "Images per identity");
  app.add_option("--size", size, "Square image size in pixels");
  app.add_option("--seed", seed, "Generator seed");
  app.add_option("--emit-config", emit_config,
                 "Also write a matching toy experiment config here");
  CLI11_PARSE(app, argc, argv);

  sfc::GenerateToyFaces(out_dir, identities, images, size, seed);
  std::cout << "wrote " << identities << " identities x " << images
            << " images at " << size << "x" << size << " to " << out_dir << "\n";

  if (!emit_config.empty()) {
    sfc::ExperimentConfig cfg = sfc::ExperimentConfig::ToyDefaults();
    cfg.data_root = out_dir;
    cfg.output_root = out_dir + "_run";
    cfg.SaveFile(emit_config);
    std::cout << "wrote config to " << emit_config << "\n";
  }
  return 0;
}
