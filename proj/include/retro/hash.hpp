// SPDX-License-Identifier: Apache-2.0

#ifndef RETRO_HASH_HPP
#define RETRO_HASH_HPP

#include <cstdint>
#include <string>
#include <string_view>

namespace retro {

// 64-bit FNV-1a. Fixed constants, so hashes are stable across runs and
// platforms; fingerprints and scripted-proposer keys depend on that.
constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

constexpr std::uint64_t fnv1a(std::string_view data,
                              std::uint64_t seed = kFnvOffset) {
  std::uint64_t h = seed;
  for (char c : data) {
    h ^= static_cast<std::uint8_t>(c);
    h *= kFnvPrime;
  }
  return h;
}

constexpr std::uint64_t fnv1a_u64(std::uint64_t value,
                                  std::uint64_t seed = kFnvOffset) {
  std::uint64_t h = seed;
  for (int i = 0; i < 8; ++i) {
    h ^= value & 0xffU;
    h *= kFnvPrime;
    value >>= 8;
  }
  return h;
}

// Final avalanche from splitmix64; spreads FNV output across all bits
// before bucket reduction.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string hex64(std::uint64_t value);

}  // namespace retro

#endif  // RETRO_HASH_HPP
