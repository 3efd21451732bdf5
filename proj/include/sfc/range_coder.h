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

#ifndef SFC_RANGE_CODER_H_
#define SFC_RANGE_CODER_H_

#include <cstdint>

#include "sfc/bits.h"

namespace sfc {

// Byte-oriented 32-bit range coder with carry propagation (64-bit low, byte
// cache plus pending-0xFF run). Cumulative frequency totals must not exceed
// kMaxTotal and every codable symbol needs frequency >= 1, which keeps
// range/total nonzero under the 2^24 renormalization bound. The stream is
// self-delimiting only together with an external symbol count. The first
// output byte is the carry anchor (0x00 or 0x01).
class RangeEncoder {
 public:
  static constexpr uint32_t kTopValue = 1u << 24;
  static constexpr uint32_t kMaxTotal = 1u << 16;
  static constexpr size_t kFlushBytes = 5;

  void Encode(uint32_t cum, uint32_t freq, uint32_t total) {
    range_ /= total;
    low_ += static_cast<uint64_t>(cum) * range_;
    range_ *= freq;
    while (range_ < kTopValue) {
      range_ <<= 8;
      ShiftLow();
    }
  }

  Bytes Finish() {
    for (size_t i = 0; i < kFlushBytes; ++i) ShiftLow();
    return out_.Take();
  }

 private:
  void ShiftLow() {
    if (static_cast<uint32_t>(low_) < 0xFF000000u || (low_ >> 32) != 0) {
      const uint8_t carry = static_cast<uint8_t>(low_ >> 32);
      out_.U8(static_cast<uint8_t>(cache_ + carry));
      for (; pending_ > 0; --pending_) {
        out_.U8(static_cast<uint8_t>(0xFF + carry));
      }
      cache_ = static_cast<uint8_t>(low_ >> 24);
    } else {
      ++pending_;
    }
    low_ = (low_ << 8) & 0xFFFFFFFFull;
  }

  ByteWriter out_;
  uint64_t low_ = 0;
  uint32_t range_ = 0xFFFFFFFFu;
  uint8_t cache_ = 0;
  uint64_t pending_ = 0;
};

class RangeDecoder {
 public:
  RangeDecoder(const uint8_t* data, size_t n) : data_(data), n_(n) {
    // Consumes the carry anchor plus four payload bytes; all further
    // arithmetic is modulo 2^32, matching the encoder's wrapped low.
    for (int i = 0; i < 5; ++i) code_ = (code_ << 8) | NextByte();
  }
  explicit RangeDecoder(const Bytes& b) : RangeDecoder(b.data(), b.size()) {}

  // Returns a value in [0, total); the caller locates the symbol whose
  // cumulative interval contains it, then calls Consume.
  uint32_t DecodeFreq(uint32_t total) {
    range_ /= total;
    const uint32_t f = code_ / range_;
    return f >= total ? total - 1 : f;
  }

  void Consume(uint32_t cum, uint32_t freq) {
    code_ -= cum * range_;
    range_ *= freq;
    while (range_ < RangeEncoder::kTopValue) {
      code_ = (code_ << 8) | NextByte();
      range_ <<= 8;
    }
  }

 private:
  uint8_t NextByte() {
    // Running past the payload means truncation; the container checksum also
    // reports it, but fail fast here.
    if (pos_ >= n_) throw DecodeError("range coder ran past end of stream");
    return data_[pos_++];
  }

  const uint8_t* data_;
  size_t n_;
  size_t pos_ = 0;
  uint32_t code_ = 0;
  uint32_t range_ = 0xFFFFFFFFu;
};

}  // namespace sfc

#endif  // SFC_RANGE_CODER_H_
