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

#ifndef SFC_BITSTREAM_H_
#define SFC_BITSTREAM_H_

#include <optional>
#include <string>

#include "sfc/bits.h"

namespace sfc {

// Scalable container (.sfc):
//   magic "SFC1" | version u8 | flags u8 (bit 0: enhancement present)
//   | height varint | width varint
//   | base block (varint length + bytes)
//   | enhancement block (varint length + bytes, only if flagged)
//   | CRC-32C over everything before it (4 bytes).
//
// Base-only reads stop after the base block and rely on the base payload's
// own checksum; the trailing CRC covers the whole stream and is validated by
// full demux. Stripping the enhancement block never changes base bytes.

inline constexpr char kMagic[4] = {'S', 'F', 'C', '1'};
inline constexpr uint8_t kContainerVersion = 1;

class BadMagicError : public DecodeError {
 public:
  BadMagicError() : DecodeError("not an SFC1 stream (bad magic)") {}
};
class VersionError : public DecodeError {
 public:
  explicit VersionError(int got)
      : DecodeError("unsupported container version " + std::to_string(got)) {}
};
class ChecksumError : public DecodeError {
 public:
  explicit ChecksumError(const std::string& what)
      : DecodeError("checksum mismatch: " + what) {}
};

struct ContainerContents {
  Bytes base_payload;
  std::optional<Bytes> enhancement_payload;
  int height = 0;
  int width = 0;
};

Bytes Mux(const Bytes& base_payload, const std::optional<Bytes>& enhancement,
          int height, int width);

// Full parse with trailing-checksum validation.
ContainerContents Demux(const Bytes& stream);

// Reads only the header and base block; never touches enhancement bytes or
// the trailing checksum, so cost is independent of enhancement size.
ContainerContents DemuxBaseOnly(const Bytes& stream);

// Rewrites a full stream as a valid base-only stream (clears flag bit 0,
// drops the enhancement block, recomputes the checksum).
Bytes TruncateToBase(const Bytes& stream);

enum class BppLayer { kBase, kEnhancement, kTotal };

// 8 * layer_bytes / (H * W). Per-layer figures count payload content only;
// kTotal additionally amortizes the container header, length prefixes and
// trailing checksum.
double Bpp(const Bytes& stream, BppLayer layer);

// Human-readable layout for the `dump` subcommand.
std::string DumpLayout(const Bytes& stream);

}  // namespace sfc

#endif  // SFC_BITSTREAM_H_
