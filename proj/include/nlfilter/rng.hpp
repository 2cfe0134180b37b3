// Copyright 2026 The nlfilter Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef NLFILTER_RNG_HPP
#define NLFILTER_RNG_HPP

#include <array>
#include <cstdint>
#include <initializer_list>
#include <limits>

namespace nlfilter {

/// Philox4x32-10 block function (Salmon et al., SC'11).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) noexcept;

/// SplitMix64 finalizer, used to fold path coordinates into stream ids.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Folds an ordered list of coordinates (domain tag, run, step, particle, ...) into one id.
constexpr std::uint64_t stream_id(std::initializer_list<std::uint64_t> coords) noexcept {
  std::uint64_t h = 0x6a09e667f3bcc909ull;
  for (std::uint64_t c : coords) h = mix64(h ^ mix64(c));
  return h;
}

/// Domain tags keep substreams of different consumers disjoint.
enum class StreamDomain : std::uint64_t {
  path = 1,
  filter_init = 2,
  filter_step = 3,
  filter_resample = 4,
  counterexample = 5,
  quadrature = 6,
  diagnostics = 7,
  residual_run = 8,
};

/**
 * Counter-based random stream.
 *
 * The (seed, stream) pair is the key/counter-high of a Philox4x32-10 generator; the low
 * 64 counter bits advance with each block. A stream is therefore a pure function of its
 * coordinates, and a substream can be derived for any (path, step, particle) without
 * touching shared state. Satisfies UniformRandomBitGenerator, so it plugs into the
 * standard <random> distributions.
 */
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept : seed_(seed), stream_(stream) {}

  static CounterRng for_coords(std::uint64_t seed, StreamDomain domain,
                               std::initializer_list<std::uint64_t> coords) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept;

  /// Uniform on the open interval (0, 1).
  double uniform_open() noexcept;

  /// Child stream; the parent is left untouched.
  CounterRng split(std::uint64_t child) const noexcept {
    return {seed_, mix64(stream_ ^ mix64(child + 0x632be59bd9b4e019ull))};
  }

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }
  std::uint64_t blocks_used() const noexcept { return counter_; }

 private:
  void refill() noexcept;

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int available_ = 0;
};

}  // namespace nlfilter

#endif  // NLFILTER_RNG_HPP
