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

#ifndef SFC_IMAGE_IO_H_
#define SFC_IMAGE_IO_H_

#include <string>

#include "sfc/tensor.h"

namespace sfc {

// Reads an 8-bit PNG or binary PPM into an (H, W, 3) tensor in [0, 1].
// Grayscale files are expanded to three channels. Throws DataError on
// unreadable or unsupported files.
Tensor ReadImage(const std::string& path);

// Writes an (H, W, C) tensor (C = 1 or 3, values clamped to [0, 1]) as an
// 8-bit PNG.
void WritePng(const Tensor& image, const std::string& path);

}  // namespace sfc

#endif  // SFC_IMAGE_IO_H_
