#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

namespace climatescope {

// std::mt19937_64 is fully specified by the standard; the std:: distributions
// are not, so sampling goes through Boost.Random to stay platform-identical.
using Rng = std::mt19937_64;

inline double standard_normal(Rng& rng) {
  return boost::random::normal_distribution<double>(0.0, 1.0)(rng);
}

inline double uniform_real(Rng& rng, double lo, double hi) {
  return boost::random::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Uniform integer in [0, n).
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  return boost::random::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

template <typename Container>
void seeded_shuffle(Container& items, Rng& rng) {
  using std::swap;
  for (std::size_t i = items.size(); i > 1; --i) {
    swap(items[i - 1], items[uniform_index(rng, i)]);
  }
}

}  // namespace climatescope
