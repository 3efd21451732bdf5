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

#include "sfc/checkpoint.h"

#include <cstring>
#include <fstream>

#include "sfc/common.h"

namespace sfc {

namespace {
constexpr char kCkptMagic[4] = {'S', 'F', 'C', 'K'};
constexpr uint8_t kCkptVersion = 1;
}  // namespace

Bytes Checkpoint::Serialize() const {
  ByteWriter w;
  w.Raw(reinterpret_cast<const uint8_t*>(kCkptMagic), 4);
  w.U8(kCkptVersion);
  w.Str(stage);
  w.Str(config_json);
  w.Varint(arrays.size());
  for (const auto& [name, t] : arrays) {
    w.Str(name);
    w.U8(static_cast<uint8_t>(t.ndim()));
    for (int i = 0; i < t.ndim(); ++i) w.Varint(static_cast<uint64_t>(t.dim(i)));
    for (size_t i = 0; i < t.size(); ++i) w.F32(t[i]);
  }
  w.Varint(blobs.size());
  for (const auto& [name, b] : blobs) {
    w.Str(name);
    w.Varint(b.size());
    w.Raw(b);
  }
  return w.Take();
}

Checkpoint Checkpoint::Deserialize(const Bytes& bytes) {
  ByteReader r(bytes);
  Bytes magic = r.Raw(4);
  if (std::memcmp(magic.data(), kCkptMagic, 4) != 0) {
    throw DecodeError("not a checkpoint file");
  }
  const uint8_t version = r.U8();
  if (version != kCkptVersion) {
    throw DecodeError("unsupported checkpoint version");
  }
  Checkpoint ck;
  ck.stage = r.Str();
  ck.config_json = r.Str();
  const size_t count = r.Varint();
  for (size_t i = 0; i < count; ++i) {
    const std::string name = r.Str();
    const int ndim = r.U8();
    std::vector<int> shape(static_cast<size_t>(ndim));
    for (int d = 0; d < ndim; ++d) shape[static_cast<size_t>(d)] = static_cast<int>(r.Varint());
    Tensor t(shape);
    for (size_t j = 0; j < t.size(); ++j) t[j] = r.F32();
    ck.arrays.emplace(name, std::move(t));
  }
  const size_t nblobs = r.Varint();
  for (size_t i = 0; i < nblobs; ++i) {
    const std::string name = r.Str();
    const size_t len = r.Varint();
    ck.blobs.emplace(name, r.Raw(len));
  }
  return ck;
}

void Checkpoint::SaveFile(const std::string& path) const {
  const Bytes b = Serialize();
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError("cannot write checkpoint: " + path);
  f.write(reinterpret_cast<const char*>(b.data()),
          static_cast<std::streamsize>(b.size()));
  if (!f) throw DataError("short write on checkpoint: " + path);
}

Checkpoint Checkpoint::LoadFile(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DependencyError("missing checkpoint: " + path);
  Bytes b((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return Deserialize(b);
}

Checkpoint Checkpoint::FromParams(const std::string& stage,
                                  const std::string& config_json,
                                  const std::vector<nn::Parameter*>& params) {
  Checkpoint ck;
  ck.stage = stage;
  ck.config_json = config_json;
  for (const nn::Parameter* p : params) {
    Check(!p->name.empty(), "parameter missing a name");
    ck.arrays.emplace(p->name, p->value);
  }
  return ck;
}

void Checkpoint::ToParams(const std::vector<nn::Parameter*>& params) const {
  for (nn::Parameter* p : params) {
    auto it = arrays.find(p->name);
    if (it == arrays.end()) {
      throw DecodeError("checkpoint missing array: " + p->name);
    }
    if (!it->second.SameShape(p->value)) {
      throw DecodeError("checkpoint shape mismatch for " + p->name);
    }
    p->value = it->second;
  }
}

}  // namespace sfc
