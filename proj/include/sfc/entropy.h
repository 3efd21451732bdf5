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

#ifndef SFC_ENTROPY_H_
#define SFC_ENTROPY_H_

#include <cstdint>
#include <vector>

#include "sfc/bits.h"

namespace sfc {

// Quantized latent symbols. Every entry lies in [-r_clip, r_clip].
struct LatentCode {
  std::vector<int32_t> symbols;
};

// Adaptive-free frequency model over the integer alphabet [-r_clip, r_clip]
// with add-one smoothing. kShared pools all vector positions into one table;
// kPerDimension keeps one table per position (features are near-independent
// per dimension). Coding uses tables quantized to 16-bit totals; Probability
// reports the exact smoothed ratio.
enum class SymbolModelMode : uint8_t { kShared = 0, kPerDimension = 1 };

class SymbolModel {
 public:
  SymbolModel() = default;
  SymbolModel(SymbolModelMode mode, int r_clip, int dims);

  SymbolModelMode mode() const { return mode_; }
  int r_clip() const { return r_clip_; }
  int dims() const { return dims_; }
  int alphabet_size() const { return 2 * r_clip_ + 1; }

  double Probability(int dim, int32_t symbol) const;

  // Coding-table access for one vector position.
  struct Table {
    const uint32_t* cum;  // alphabet_size + 1 entries
    uint32_t total;
  };
  Table CodingTable(int dim) const;

  Bytes Serialize() const;
  static SymbolModel Deserialize(ByteReader& reader);

  // Builds the model from training codes. All codes must have length == dims
  // in per-dimension mode.
  static SymbolModel Fit(const std::vector<LatentCode>& codes,
                         SymbolModelMode mode, int r_clip, int dims);

 private:
  void BuildCodingTables();

  SymbolModelMode mode_ = SymbolModelMode::kShared;
  int r_clip_ = 0;
  int dims_ = 0;
  // Smoothed counts, one row per table (1 row shared, or dims rows).
  std::vector<std::vector<uint64_t>> counts_;
  std::vector<std::vector<uint32_t>> cum_;  // quantized cumulative tables
  std::vector<uint32_t> totals_;
};

// Serialized layout of a coded base layer:
//   symbol-model ID (1 byte: SymbolModelMode) + code length (varint) +
//   range-coded payload + CRC-32C (4 bytes, over everything before it).
Bytes EntropyEncode(const LatentCode& code, const SymbolModel& model);
LatentCode EntropyDecode(const Bytes& bytes, const SymbolModel& model);

// Expected bits of `code` under `model` (Shannon information content).
double ShannonBits(const LatentCode& code, const SymbolModel& model);

// Builds a range-coder cumulative table (total <= 2^16, every frequency
// >= 1) from nonnegative weights. cum gets weights.size() + 1 entries.
void BuildQuantizedCdf(const std::vector<double>& weights,
                       std::vector<uint32_t>* cum, uint32_t* total);

}  // namespace sfc

#endif  // SFC_ENTROPY_H_
