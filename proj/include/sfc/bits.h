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

#ifndef SFC_BITS_H_
#define SFC_BITS_H_

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "sfc/common.h"

namespace sfc {

using Bytes = std::vector<uint8_t>;

// CRC-32C (Castagnoli), reflected polynomial 0x82F63B78.
uint32_t Crc32c(const uint8_t* data, size_t n, uint32_t seed = 0);
inline uint32_t Crc32c(const Bytes& b, uint32_t seed = 0) {
  return Crc32c(b.data(), b.size(), seed);
}

class ByteWriter {
 public:
  const Bytes& bytes() const { return buf_; }
  Bytes Take() { return std::move(buf_); }
  size_t size() const { return buf_.size(); }

  void U8(uint8_t v) { buf_.push_back(v); }
  void U16(uint16_t v) {  // little-endian
    buf_.push_back(static_cast<uint8_t>(v));
    buf_.push_back(static_cast<uint8_t>(v >> 8));
  }
  void U32(uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }
  void F32(float v) {
    uint32_t bits;
    std::memcpy(&bits, &v, 4);
    U32(bits);
  }
  void Varint(uint64_t v) {  // LEB128
    while (v >= 0x80) {
      buf_.push_back(static_cast<uint8_t>(v) | 0x80);
      v >>= 7;
    }
    buf_.push_back(static_cast<uint8_t>(v));
  }
  void Raw(const uint8_t* p, size_t n) { buf_.insert(buf_.end(), p, p + n); }
  void Raw(const Bytes& b) { Raw(b.data(), b.size()); }
  void Str(const std::string& s) {
    Varint(s.size());
    Raw(reinterpret_cast<const uint8_t*>(s.data()), s.size());
  }

 private:
  Bytes buf_;
};

class ByteReader {
 public:
  ByteReader(const uint8_t* data, size_t n) : data_(data), n_(n) {}
  explicit ByteReader(const Bytes& b) : ByteReader(b.data(), b.size()) {}

  size_t pos() const { return pos_; }
  size_t remaining() const { return n_ - pos_; }
  bool AtEnd() const { return pos_ == n_; }

  uint8_t U8() {
    Need(1);
    return data_[pos_++];
  }
  uint16_t U16() {
    Need(2);
    uint16_t v = static_cast<uint16_t>(data_[pos_]) |
                 static_cast<uint16_t>(data_[pos_ + 1]) << 8;
    pos_ += 2;
    return v;
  }
  uint32_t U32() {
    Need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(data_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  float F32() {
    uint32_t bits = U32();
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }
  uint64_t Varint() {
    uint64_t v = 0;
    int shift = 0;
    for (;;) {
      if (shift > 63) throw DecodeError("varint overflow");
      uint8_t b = U8();
      v |= static_cast<uint64_t>(b & 0x7F) << shift;
      if (!(b & 0x80)) return v;
      shift += 7;
    }
  }
  Bytes Raw(size_t n) {
    Need(n);
    Bytes out(data_ + pos_, data_ + pos_ + n);
    pos_ += n;
    return out;
  }
  std::string Str() {
    size_t n = Varint();
    Bytes b = Raw(n);
    return std::string(b.begin(), b.end());
  }
  void Skip(size_t n) {
    Need(n);
    pos_ += n;
  }

 private:
  void Need(size_t n) const {
    if (pos_ + n > n_) throw DecodeError("truncated stream");
  }
  const uint8_t* data_;
  size_t n_;
  size_t pos_ = 0;
};

}  // namespace sfc

#endif  // SFC_BITS_H_
