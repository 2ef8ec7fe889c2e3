// core/include/tspl/rng.hpp

// Copyright 2026  The tspl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef TSPL_RNG_HPP_
#define TSPL_RNG_HPP_

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>

namespace tspl {

// Portable random streams.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the C++
// standard. The distributions below are written out explicitly (the standard
// library ones are implementation-defined), so a stream can be reproduced in
// any language that implements MT19937-64:
//
//   uniform()   = (next_u64() >> 11) * 2^-53                  in [0, 1)
//   below(n)    = rejection: draw x, accept if x < 2^64 - (2^64 mod n), x mod n
//   normal()    = Box-Muller, u1 = 1 - uniform(), u2 = uniform(),
//                 sqrt(-2 ln u1) * cos(2 pi u2); one value per call
//   shuffle(v)  = Fisher-Yates from the back, j = below(i + 1)
//
// Independent streams are keyed by derive_seed(base, purpose, index):
//
//   h = fnv1a64(purpose)
//   seed = splitmix64(splitmix64(base) ^ splitmix64(h + index))
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::uint64_t below(std::uint64_t n);
  double normal();

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      using std::swap;
      swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view text);
std::uint64_t derive_seed(std::uint64_t base, std::string_view purpose,
                          std::uint64_t index);

}  // namespace tspl

#endif  // TSPL_RNG_HPP_
