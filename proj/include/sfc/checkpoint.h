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

#ifndef SFC_CHECKPOINT_H_
#define SFC_CHECKPOINT_H_

#include <map>
#include <string>
#include <vector>

#include "sfc/bits.h"
#include "sfc/nn.h"
#include "sfc/tensor.h"

namespace sfc {

// Versioned checkpoint: magic "SFCK" | version u8 | stage string |
// config JSON string | named float32 arrays. Content hash = SHA-256 of the
// file bytes; stages reference their predecessors by that hash.
struct Checkpoint {
  std::string stage;
  std::string config_json;
  std::map<std::string, Tensor> arrays;
  std::map<std::string, Bytes> blobs;  // e.g. fitted symbol models

  Bytes Serialize() const;
  static Checkpoint Deserialize(const Bytes& bytes);

  void SaveFile(const std::string& path) const;
  static Checkpoint LoadFile(const std::string& path);

  // Copies parameter values (collected with their prefixed names) in and out.
  static Checkpoint FromParams(const std::string& stage,
                               const std::string& config_json,
                               const std::vector<nn::Parameter*>& params);
  void ToParams(const std::vector<nn::Parameter*>& params) const;
};

}  // namespace sfc

#endif  // SFC_CHECKPOINT_H_
