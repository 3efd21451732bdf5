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

#include "sfc/entropy.h"

#include <algorithm>
#include <cmath>

#include "sfc/common.h"
#include "sfc/range_coder.h"

namespace sfc {

namespace {

// Rescales smoothed counts to a cumulative table with total <= 2^16 and every
// frequency >= 1. Deterministic: rounding drift lands on the first maximal
// bucket.
void QuantizeRow(const std::vector<uint64_t>& counts,
                 std::vector<uint32_t>* cum, uint32_t* total_out) {
  const size_t a = counts.size();
  uint64_t raw_total = 0;
  for (uint64_t c : counts) raw_total += c;

  std::vector<uint64_t> freq(a);
  uint64_t total = 0;
  if (raw_total <= RangeEncoder::kMaxTotal) {
    freq.assign(counts.begin(), counts.end());
    total = raw_total;
  } else {
    const uint64_t target = RangeEncoder::kMaxTotal;
    for (size_t i = 0; i < a; ++i) {
      freq[i] = std::max<uint64_t>(1, (counts[i] * target + raw_total / 2) / raw_total);
      total += freq[i];
    }
    while (total != target) {
      size_t pick = 0;
      if (total > target) {
        // shrink the largest shrinkable bucket
        for (size_t i = 0; i < a; ++i) {
          if (freq[i] > freq[pick]) pick = i;
        }
        if (freq[pick] <= 1) break;
        --freq[pick];
        --total;
      } else {
        for (size_t i = 0; i < a; ++i) {
          if (freq[i] > freq[pick]) pick = i;
        }
        ++freq[pick];
        ++total;
      }
    }
  }
  cum->assign(a + 1, 0);
  for (size_t i = 0; i < a; ++i) {
    (*cum)[i + 1] = (*cum)[i] + static_cast<uint32_t>(freq[i]);
  }
  *total_out = static_cast<uint32_t>(total);
}

}  // namespace

SymbolModel::SymbolModel(SymbolModelMode mode, int r_clip, int dims)
    : mode_(mode), r_clip_(r_clip), dims_(dims) {
  Check(r_clip >= 0, "negative clip range");
  Check(dims >= 0, "negative dims");
  const size_t rows = mode == SymbolModelMode::kShared
                          ? 1
                          : static_cast<size_t>(std::max(dims, 1));
  counts_.assign(rows, std::vector<uint64_t>(
                           static_cast<size_t>(alphabet_size()), 1));
  BuildCodingTables();
}

double SymbolModel::Probability(int dim, int32_t symbol) const {
  Check(std::abs(symbol) <= r_clip_, "symbol outside alphabet");
  const size_t row =
      mode_ == SymbolModelMode::kShared ? 0 : static_cast<size_t>(dim);
  const auto& c = counts_.at(row);
  uint64_t total = 0;
  for (uint64_t v : c) total += v;
  return static_cast<double>(c[static_cast<size_t>(symbol + r_clip_)]) /
         static_cast<double>(total);
}

SymbolModel::Table SymbolModel::CodingTable(int dim) const {
  const size_t row =
      mode_ == SymbolModelMode::kShared ? 0 : static_cast<size_t>(dim);
  return Table{cum_.at(row).data(), totals_.at(row)};
}

void SymbolModel::BuildCodingTables() {
  cum_.resize(counts_.size());
  totals_.resize(counts_.size());
  for (size_t r = 0; r < counts_.size(); ++r) {
    QuantizeRow(counts_[r], &cum_[r], &totals_[r]);
  }
}

Bytes SymbolModel::Serialize() const {
  ByteWriter w;
  w.U8(static_cast<uint8_t>(mode_));
  w.Varint(static_cast<uint64_t>(r_clip_));
  w.Varint(static_cast<uint64_t>(dims_));
  w.Varint(counts_.size());
  for (const auto& row : counts_) {
    for (uint64_t c : row) w.Varint(c);
  }
  return w.Take();
}

SymbolModel SymbolModel::Deserialize(ByteReader& reader) {
  const uint8_t mode = reader.U8();
  if (mode > 1) throw DecodeError("unknown symbol-model mode");
  const int r_clip = static_cast<int>(reader.Varint());
  const int dims = static_cast<int>(reader.Varint());
  SymbolModel m(static_cast<SymbolModelMode>(mode), r_clip, dims);
  const size_t rows = reader.Varint();
  if (rows != m.counts_.size()) throw DecodeError("symbol-model row mismatch");
  for (auto& row : m.counts_) {
    for (auto& c : row) {
      c = reader.Varint();
      if (c == 0) throw DecodeError("zero frequency in symbol model");
    }
  }
  m.BuildCodingTables();
  return m;
}

SymbolModel SymbolModel::Fit(const std::vector<LatentCode>& codes,
                             SymbolModelMode mode, int r_clip, int dims) {
  if (codes.empty()) {
    throw InvalidArgumentError("fit_symbol_model needs at least one code");
  }
  SymbolModel m(mode, r_clip, dims);
  for (const auto& code : codes) {
    if (mode == SymbolModelMode::kPerDimension &&
        static_cast<int>(code.symbols.size()) != dims) {
      throw InvalidArgumentError("code length must equal dims in per-dimension mode");
    }
    for (size_t i = 0; i < code.symbols.size(); ++i) {
      const int32_t s = code.symbols[i];
      if (std::abs(s) > r_clip) {
        throw InvalidArgumentError("training symbol outside alphabet");
      }
      const size_t row = mode == SymbolModelMode::kShared ? 0 : i;
      ++m.counts_[row][static_cast<size_t>(s + r_clip)];
    }
  }
  m.BuildCodingTables();
  return m;
}

Bytes EntropyEncode(const LatentCode& code, const SymbolModel& model) {
  ByteWriter w;
  w.U8(static_cast<uint8_t>(model.mode()));
  w.Varint(code.symbols.size());
  if (model.mode() == SymbolModelMode::kPerDimension &&
      static_cast<int>(code.symbols.size()) != model.dims()) {
    throw InvalidArgumentError("code length must equal model dims");
  }
  if (!code.symbols.empty()) {
    RangeEncoder enc;
    for (size_t i = 0; i < code.symbols.size(); ++i) {
      const int32_t s = code.symbols[i];
      if (std::abs(s) > model.r_clip()) {
        throw InvalidArgumentError("symbol outside alphabet");
      }
      const auto t = model.CodingTable(static_cast<int>(i));
      const size_t idx = static_cast<size_t>(s + model.r_clip());
      enc.Encode(t.cum[idx], t.cum[idx + 1] - t.cum[idx], t.total);
    }
    w.Raw(enc.Finish());
  }
  const uint32_t crc = Crc32c(w.bytes());
  w.U32(crc);
  return w.Take();
}

LatentCode EntropyDecode(const Bytes& bytes, const SymbolModel& model) {
  if (bytes.size() < 4) throw DecodeError("coded base layer too short");
  const uint32_t stored = static_cast<uint32_t>(bytes[bytes.size() - 4]) |
                          static_cast<uint32_t>(bytes[bytes.size() - 3]) << 8 |
                          static_cast<uint32_t>(bytes[bytes.size() - 2]) << 16 |
                          static_cast<uint32_t>(bytes[bytes.size() - 1]) << 24;
  if (Crc32c(bytes.data(), bytes.size() - 4) != stored) {
    throw DecodeError("coded base layer checksum mismatch");
  }
  ByteReader r(bytes.data(), bytes.size() - 4);
  const uint8_t mode = r.U8();
  if (mode != static_cast<uint8_t>(model.mode())) {
    throw DecodeError("symbol-model mode mismatch");
  }
  const size_t n = r.Varint();
  if (model.mode() == SymbolModelMode::kPerDimension &&
      static_cast<int>(n) != model.dims()) {
    throw DecodeError("code length mismatch for per-dimension model");
  }
  LatentCode code;
  code.symbols.resize(n);
  if (n > 0) {
    RangeDecoder dec(bytes.data() + r.pos(), bytes.size() - 4 - r.pos());
    const int a = model.alphabet_size();
    for (size_t i = 0; i < n; ++i) {
      const auto t = model.CodingTable(static_cast<int>(i));
      const uint32_t f = dec.DecodeFreq(t.total);
      // Largest idx with cum[idx] <= f.
      int lo = 0, hi = a;
      while (hi - lo > 1) {
        const int mid = (lo + hi) / 2;
        if (t.cum[mid] <= f) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      dec.Consume(t.cum[lo], t.cum[lo + 1] - t.cum[lo]);
      code.symbols[i] = lo - model.r_clip();
    }
  }
  return code;
}

void BuildQuantizedCdf(const std::vector<double>& weights,
                       std::vector<uint32_t>* cum, uint32_t* total) {
  Check(!weights.empty(), "empty weight vector");
  double sum = 0.0;
  for (double w : weights) {
    Check(w >= 0.0, "negative weight");
    sum += w;
  }
  Check(sum > 0.0, "all-zero weights");
  // Scale into integer counts and reuse the count quantizer.
  std::vector<uint64_t> counts(weights.size());
  const double scale = static_cast<double>(RangeEncoder::kMaxTotal) * 64.0 / sum;
  for (size_t i = 0; i < weights.size(); ++i) {
    counts[i] = std::max<uint64_t>(1, static_cast<uint64_t>(weights[i] * scale));
  }
  QuantizeRow(counts, cum, total);
}

double ShannonBits(const LatentCode& code, const SymbolModel& model) {
  double bits = 0.0;
  for (size_t i = 0; i < code.symbols.size(); ++i) {
    const auto t = model.CodingTable(static_cast<int>(i));
    const size_t idx = static_cast<size_t>(code.symbols[i] + model.r_clip());
    const double p = static_cast<double>(t.cum[idx + 1] - t.cum[idx]) /
                     static_cast<double>(t.total);
    bits -= std::log2(p);
  }
  return bits;
}

}  // namespace sfc
