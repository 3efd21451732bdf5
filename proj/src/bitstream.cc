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

#include "sfc/bitstream.h"

#include <cstring>
#include <sstream>

#include "sfc/common.h"

namespace sfc {

namespace {

constexpr uint8_t kFlagEnhancement = 0x01;

struct Header {
  uint8_t flags = 0;
  int height = 0;
  int width = 0;
  size_t base_offset = 0;  // position of the base block length prefix
};

Header ReadHeader(ByteReader& r) {
  Bytes magic = r.Raw(4);
  if (std::memcmp(magic.data(), kMagic, 4) != 0) throw BadMagicError();
  const uint8_t version = r.U8();
  if (version != kContainerVersion) throw VersionError(version);
  Header h;
  h.flags = r.U8();
  h.height = static_cast<int>(r.Varint());
  h.width = static_cast<int>(r.Varint());
  if (h.height <= 0 || h.width <= 0) throw DecodeError("bad image dims");
  h.base_offset = r.pos();
  return h;
}

}  // namespace

Bytes Mux(const Bytes& base_payload, const std::optional<Bytes>& enhancement,
          int height, int width) {
  Check(height > 0 && width > 0, "image dims must be positive");
  Check(!base_payload.empty(), "base payload is required");
  ByteWriter w;
  w.Raw(reinterpret_cast<const uint8_t*>(kMagic), 4);
  w.U8(kContainerVersion);
  w.U8(enhancement.has_value() ? kFlagEnhancement : 0);
  w.Varint(static_cast<uint64_t>(height));
  w.Varint(static_cast<uint64_t>(width));
  w.Varint(base_payload.size());
  w.Raw(base_payload);
  if (enhancement.has_value()) {
    w.Varint(enhancement->size());
    w.Raw(*enhancement);
  }
  const uint32_t crc = Crc32c(w.bytes());
  w.U32(crc);
  return w.Take();
}

ContainerContents Demux(const Bytes& stream) {
  if (stream.size() < 4) throw DecodeError("stream too short");
  const size_t body = stream.size() - 4;
  const uint32_t stored = static_cast<uint32_t>(stream[body]) |
                          static_cast<uint32_t>(stream[body + 1]) << 8 |
                          static_cast<uint32_t>(stream[body + 2]) << 16 |
                          static_cast<uint32_t>(stream[body + 3]) << 24;
  if (Crc32c(stream.data(), body) != stored) {
    throw ChecksumError("container");
  }
  ByteReader r(stream.data(), body);
  const Header h = ReadHeader(r);
  ContainerContents out;
  out.height = h.height;
  out.width = h.width;
  const size_t base_len = r.Varint();
  out.base_payload = r.Raw(base_len);
  if (h.flags & kFlagEnhancement) {
    const size_t enh_len = r.Varint();
    out.enhancement_payload = r.Raw(enh_len);
  }
  if (!r.AtEnd()) throw DecodeError("trailing bytes in container");
  return out;
}

ContainerContents DemuxBaseOnly(const Bytes& stream) {
  ByteReader r(stream);
  const Header h = ReadHeader(r);
  ContainerContents out;
  out.height = h.height;
  out.width = h.width;
  const size_t base_len = r.Varint();
  out.base_payload = r.Raw(base_len);
  return out;
}

Bytes TruncateToBase(const Bytes& stream) {
  const ContainerContents c = Demux(stream);
  return Mux(c.base_payload, std::nullopt, c.height, c.width);
}

double Bpp(const Bytes& stream, BppLayer layer) {
  const ContainerContents c = Demux(stream);
  const double pixels = static_cast<double>(c.height) * c.width;
  const size_t base = c.base_payload.size();
  const size_t enh =
      c.enhancement_payload.has_value() ? c.enhancement_payload->size() : 0;
  switch (layer) {
    case BppLayer::kBase:
      return 8.0 * static_cast<double>(base) / pixels;
    case BppLayer::kEnhancement:
      return 8.0 * static_cast<double>(enh) / pixels;
    case BppLayer::kTotal:
      return 8.0 * static_cast<double>(stream.size()) / pixels;
  }
  return 0.0;
}

std::string DumpLayout(const Bytes& stream) {
  const ContainerContents c = Demux(stream);
  ByteReader r(stream);
  const Header h = ReadHeader(r);
  std::ostringstream os;
  os << "SFC1 container, " << stream.size() << " bytes\n";
  os << "  version:      " << static_cast<int>(kContainerVersion) << "\n";
  os << "  flags:        0x" << std::hex << static_cast<int>(h.flags)
     << std::dec << (h.flags & kFlagEnhancement ? " (base+enhancement)" : " (base only)")
     << "\n";
  os << "  image dims:   " << c.height << " x " << c.width << " (H x W)\n";
  os << "  base block:   " << c.base_payload.size() << " bytes, "
     << Bpp(stream, BppLayer::kBase) << " bpp\n";
  if (c.enhancement_payload.has_value()) {
    os << "  enh block:    " << c.enhancement_payload->size() << " bytes, "
       << Bpp(stream, BppLayer::kEnhancement) << " bpp\n";
  } else {
    os << "  enh block:    absent\n";
  }
  os << "  total:        " << Bpp(stream, BppLayer::kTotal) << " bpp\n";
  return os.str();
}

}  // namespace sfc
