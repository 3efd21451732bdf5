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

#ifndef SFC_FACEGEN_H_
#define SFC_FACEGEN_H_

#include <string>

#include "sfc/tensor.h"

namespace sfc {

// Procedural face-like test corpus: per-identity geometry and colors (face
// oval, eyes, brows, nose, mouth, hair) with per-image pose, lighting,
// expression and noise jitter. Deterministic in the seed. Images land in
// <root>/<identity>/<identity>_NNNN.png with identities id_000, id_001, ...
void GenerateToyFaces(const std::string& root_dir, int num_identities,
                      int images_per_identity, int size, uint64_t seed);

// Renders one face into an (size, size, 3) tensor without touching the
// filesystem (used by tests).
Tensor RenderToyFace(uint64_t identity_seed, uint64_t image_seed, int size);

}  // namespace sfc

#endif  // SFC_FACEGEN_H_
