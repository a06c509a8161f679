// SPDX-License-Identifier: Apache-2.0

#include "retro/rng.hpp"

#include <stdexcept>

namespace retro {

double unit_draw(std::mt19937 &rng) {
  std::uint64_t hi = rng() >> 5;  // 27 bits
  std::uint64_t lo = rng() >> 6;  // 26 bits
  return static_cast<double>((hi << 26) | lo) *
         (1.0 / 9007199254740992.0);  // 2^53
}

std::size_t weighted_index(const std::vector<double> &weights,
                           std::mt19937 &rng) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0)) {
    throw std::invalid_argument("weighted_index requires a positive total");
  }
  double u = unit_draw(rng) * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (u < acc) return i;
  }
  return weights.size() - 1;  // guards rounding at the top end
}

}  // namespace retro
