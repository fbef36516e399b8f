#pragma once

#include <random>

#include "anibes/matrix.hpp"

namespace anibes {

// All randomized certifications in the library draw from an explicitly seeded
// generator so that identical inputs and configs reproduce byte-identical
// results.
inline std::mt19937_64 seeded_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline Vector unit_direction(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vector v(d);
  do {
    for (int i = 0; i < d; ++i) v(i) = g(rng);
  } while (v.norm() < 1e-8);
  return v / v.norm();
}

}  // namespace anibes
