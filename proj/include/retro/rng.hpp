// SPDX-License-Identifier: Apache-2.0

#ifndef RETRO_RNG_HPP
#define RETRO_RNG_HPP

#include <cstddef>
#include <random>
#include <vector>

namespace retro {

// 53-bit uniform draw in [0, 1) built from two generator words. Avoids
// std::uniform_real_distribution, whose output is implementation defined,
// so seeded runs reproduce byte-identically on every platform.
double unit_draw(std::mt19937 &rng);

// Categorical draw over non-negative weights; the total must be positive.
std::size_t weighted_index(const std::vector<double> &weights,
                           std::mt19937 &rng);

}  // namespace retro

#endif  // RETRO_RNG_HPP
