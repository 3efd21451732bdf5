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

#ifndef SFC_HASH_H_
#define SFC_HASH_H_

#include <array>
#include <cstdint>
#include <string>

#include "sfc/bits.h"

namespace sfc {

// Streaming SHA-256. Checkpoints and dataset manifests are content-addressed
// with it so the stage dependency DAG is tamper-evident.
class Sha256 {
 public:
  Sha256();
  void Update(const uint8_t* data, size_t n);
  void Update(const Bytes& b) { Update(b.data(), b.size()); }
  void Update(const std::string& s) {
    Update(reinterpret_cast<const uint8_t*>(s.data()), s.size());
  }
  std::array<uint8_t, 32> Finish();

  static std::string HexDigest(const Bytes& data);

 private:
  void Block(const uint8_t* p);
  std::array<uint32_t, 8> state_;
  uint64_t length_ = 0;
  std::array<uint8_t, 64> buf_;
  size_t buffered_ = 0;
};

std::string ToHex(const uint8_t* data, size_t n);

// SHA-256 hex digest of a file's contents. Throws DataError if unreadable.
std::string HashFile(const std::string& path);

}  // namespace sfc

#endif  // SFC_HASH_H_
