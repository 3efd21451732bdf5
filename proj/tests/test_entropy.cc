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

#include <doctest.h>

#include <cmath>

#include "sfc/entropy.h"
#include "sfc/range_coder.h"
#include "sfc/rng.h"

using namespace sfc;

namespace {

LatentCode RandomCode(int len, int r_clip, Rng& rng) {
  LatentCode c;
  c.symbols.resize(static_cast<size_t>(len));
  for (auto& s : c.symbols) {
    s = static_cast<int32_t>(rng.NextIndex(static_cast<uint64_t>(2 * r_clip + 1))) -
        r_clip;
  }
  return c;
}

}  // namespace

TEST_CASE("range coder round-trips random symbol streams") {
  Rng rng(100);
  for (int rep = 0; rep < 50; ++rep) {
    const int n = 1 + static_cast<int>(rng.NextIndex(300));
    std::vector<uint32_t> freqs = {1, 7, 100, 50, 3, 1000, 9};
    std::vector<uint32_t> cum(freqs.size() + 1, 0);
    for (size_t i = 0; i < freqs.size(); ++i) cum[i + 1] = cum[i] + freqs[i];
    const uint32_t total = cum.back();
    std::vector<int> syms(static_cast<size_t>(n));
    RangeEncoder enc;
    for (auto& s : syms) {
      s = static_cast<int>(rng.NextIndex(freqs.size()));
      enc.Encode(cum[static_cast<size_t>(s)], freqs[static_cast<size_t>(s)], total);
    }
    const Bytes bytes = enc.Finish();
    RangeDecoder dec(bytes);
    for (int s : syms) {
      const uint32_t f = dec.DecodeFreq(total);
      int got = 0;
      while (cum[static_cast<size_t>(got + 1)] <= f) ++got;
      CHECK(got == s);
      dec.Consume(cum[static_cast<size_t>(got)], freqs[static_cast<size_t>(got)]);
    }
  }
}

TEST_CASE("entropy_encode/decode round-trips 10000 random codes") {
  Rng rng(101);
  const int r_clip = 20;
  std::vector<LatentCode> training;
  for (int i = 0; i < 50; ++i) training.push_back(RandomCode(16, r_clip, rng));
  const SymbolModel shared = SymbolModel::Fit(training, SymbolModelMode::kShared,
                                              r_clip, 16);
  const SymbolModel perdim = SymbolModel::Fit(training,
                                              SymbolModelMode::kPerDimension,
                                              r_clip, 16);
  for (int rep = 0; rep < 10000; ++rep) {
    const LatentCode code = RandomCode(16, r_clip, rng);
    const LatentCode back_s = EntropyDecode(EntropyEncode(code, shared), shared);
    CHECK(back_s.symbols == code.symbols);
    const LatentCode back_p = EntropyDecode(EntropyEncode(code, perdim), perdim);
    CHECK(back_p.symbols == code.symbols);
  }
}

TEST_CASE("skewed all-zero stream compresses close to its entropy") {
  // P(0) ~ 0.99 model: 1024 zero symbols should land well under 40 bytes.
  const int r_clip = 20;
  std::vector<LatentCode> training;
  LatentCode zeros;
  zeros.symbols.assign(1024, 0);
  for (int i = 0; i < 100; ++i) training.push_back(zeros);
  const SymbolModel model = SymbolModel::Fit(training, SymbolModelMode::kShared,
                                             r_clip, 1024);
  CHECK(model.Probability(0, 0) > 0.99);
  const Bytes bytes = EntropyEncode(zeros, model);
  CHECK(bytes.size() < 40);
  CHECK(EntropyDecode(bytes, model).symbols == zeros.symbols);
}

TEST_CASE("coded length tracks the Shannon estimate on long codes") {
  Rng rng(102);
  const int r_clip = 20;
  std::vector<LatentCode> training;
  for (int i = 0; i < 200; ++i) {
    LatentCode c;
    c.symbols.resize(4096);
    for (auto& s : c.symbols) {
      // Rough two-sided geometric shape.
      const double u = rng.NextUnit();
      const int mag = u < 0.5 ? 0 : (u < 0.8 ? 1 : (u < 0.95 ? 2 : 5));
      s = (rng.NextIndex(2) ? mag : -mag);
    }
    training.push_back(std::move(c));
  }
  const SymbolModel model = SymbolModel::Fit(training, SymbolModelMode::kShared,
                                             r_clip, 4096);
  const LatentCode& probe = training[0];
  const double shannon_bytes = ShannonBits(probe, model) / 8.0;
  const Bytes bytes = EntropyEncode(probe, model);
  CHECK(static_cast<double>(bytes.size()) <
        shannon_bytes * 1.02 + 4.0 + 7.0 /* payload framing */);
}

TEST_CASE("empty code encodes to a header-only payload") {
  const SymbolModel model(SymbolModelMode::kShared, 20, 0);
  LatentCode empty;
  const Bytes bytes = EntropyEncode(empty, model);
  CHECK(bytes.size() == 1 + 1 + 4);  // mode + zero length + crc
  CHECK(EntropyDecode(bytes, model).symbols.empty());
}

TEST_CASE("single-symbol code round-trips") {
  const SymbolModel model(SymbolModelMode::kShared, 20, 1);
  LatentCode one;
  one.symbols = {-20};
  CHECK(EntropyDecode(EntropyEncode(one, model), model).symbols == one.symbols);
}

TEST_CASE("bit flips are detected by the payload checksum") {
  Rng rng(103);
  const SymbolModel model(SymbolModelMode::kShared, 20, 0);
  int detected = 0;
  const int trials = 200;
  for (int rep = 0; rep < trials; ++rep) {
    const LatentCode code = RandomCode(64, 20, rng);
    Bytes bytes = EntropyEncode(code, model);
    const size_t bit = rng.NextIndex(bytes.size() * 8);
    bytes[bit / 8] ^= static_cast<uint8_t>(1u << (bit % 8));
    try {
      (void)EntropyDecode(bytes, model);
      // Without the checksum this could silently decode; with it we must
      // never get here.
    } catch (const DecodeError&) {
      ++detected;
    }
  }
  CHECK(detected == trials);
}

TEST_CASE("out-of-alphabet symbols are rejected") {
  const SymbolModel model(SymbolModelMode::kShared, 20, 0);
  LatentCode bad;
  bad.symbols = {21};
  CHECK_THROWS_AS(EntropyEncode(bad, model), InvalidArgumentError);
}

TEST_CASE("fit_symbol_model applies add-one smoothing") {
  // Single code [0, 0, 1]: P(0) = 3/(3+A), P(1) = 2/(3+A), alphabet size A.
  LatentCode c;
  c.symbols = {0, 0, 1};
  const int r_clip = 20;
  const int a = 2 * r_clip + 1;
  const SymbolModel m = SymbolModel::Fit({c}, SymbolModelMode::kShared, r_clip, 3);
  CHECK(m.Probability(0, 0) == doctest::Approx(3.0 / (3 + a)));
  CHECK(m.Probability(0, 1) == doctest::Approx(2.0 / (3 + a)));
  CHECK(m.Probability(0, -5) == doctest::Approx(1.0 / (3 + a)));
}

TEST_CASE("fit_symbol_model rejects an empty collection") {
  CHECK_THROWS_AS(SymbolModel::Fit({}, SymbolModelMode::kShared, 20, 16),
                  InvalidArgumentError);
}

TEST_CASE("uniform random codes produce a near-uniform table") {
  Rng rng(104);
  std::vector<LatentCode> codes;
  // 10^5 samples across codes of length 100.
  for (int i = 0; i < 1000; ++i) codes.push_back(RandomCode(100, 20, rng));
  const SymbolModel m = SymbolModel::Fit(codes, SymbolModelMode::kShared, 20, 100);
  double lo = 1.0, hi = 0.0;
  for (int s = -20; s <= 20; ++s) {
    const double p = m.Probability(0, s);
    lo = std::min(lo, p);
    hi = std::max(hi, p);
  }
  CHECK(hi / lo < 1.2);
}

TEST_CASE("coding tables always fit the range coder precision") {
  Rng rng(105);
  std::vector<LatentCode> codes;
  for (int i = 0; i < 3000; ++i) codes.push_back(RandomCode(64, 20, rng));
  const SymbolModel m = SymbolModel::Fit(codes, SymbolModelMode::kPerDimension,
                                         20, 64);
  for (int d = 0; d < 64; ++d) {
    const auto t = m.CodingTable(d);
    CHECK(t.total <= RangeEncoder::kMaxTotal);
    for (int s = 0; s < m.alphabet_size(); ++s) {
      CHECK(t.cum[s + 1] > t.cum[s]);  // every frequency >= 1
    }
  }
}

TEST_CASE("symbol model serialization round-trips") {
  Rng rng(106);
  std::vector<LatentCode> codes;
  for (int i = 0; i < 20; ++i) codes.push_back(RandomCode(8, 5, rng));
  const SymbolModel m = SymbolModel::Fit(codes, SymbolModelMode::kPerDimension, 5, 8);
  const Bytes blob = m.Serialize();
  ByteReader r(blob);
  const SymbolModel back = SymbolModel::Deserialize(r);
  const LatentCode probe = RandomCode(8, 5, rng);
  CHECK(EntropyEncode(probe, m) == EntropyEncode(probe, back));
}
