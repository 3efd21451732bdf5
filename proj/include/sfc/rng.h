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

#ifndef SFC_RNG_H_
#define SFC_RNG_H_

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace sfc {

// Deterministic random source. std::mt19937_64 is bit-exact across
// implementations; the distributions below are hand-rolled because the
// std::*_distribution classes are not, and seed-fixed reproducibility is a
// contract of every training stage.
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  uint64_t NextU64() { return eng_(); }

  // Uniform in [0, 1) with 53 random bits.
  double NextUnit() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double NextUniform(double lo, double hi) {
    return lo + (hi - lo) * NextUnit();
  }

  // Uniform integer in [0, n). n must be positive.
  uint64_t NextIndex(uint64_t n) {
    // Rejection sampling on the top bits keeps the draw unbiased and
    // implementation-independent.
    uint64_t mask = n - 1;
    mask |= mask >> 1;
    mask |= mask >> 2;
    mask |= mask >> 4;
    mask |= mask >> 8;
    mask |= mask >> 16;
    mask |= mask >> 32;
    for (;;) {
      uint64_t v = eng_() & mask;
      if (v < n) return v;
    }
  }

  double NextGaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = NextUnit();
    double u2 = NextUnit();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    double r = std::sqrt(-2.0 * std::log(u1));
    double t = 2.0 * M_PI * u2;
    spare_ = r * std::sin(t);
    have_spare_ = true;
    return r * std::cos(t);
  }

  template <typename T>
  void Shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(NextIndex(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // Derives an independent stream for a named sub-task. FNV-1a over the tag
  // mixed into the parent's next output.
  Rng Fork(std::string_view tag) {
    uint64_t h = 1469598103934665603ull;
    for (char c : tag) {
      h ^= static_cast<uint8_t>(c);
      h *= 1099511628211ull;
    }
    return Rng(h ^ NextU64());
  }

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace sfc

#endif  // SFC_RNG_H_
