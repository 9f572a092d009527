#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "semsum/error.hpp"

namespace semsum {

// Deterministic RNG wrapper. The standard distributions are
// implementation-defined, so everything that must reproduce bit-identically
// across reruns is derived from the raw mt19937_64 stream here.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next() { return eng_(); }

  // [0, 1)
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller, one fresh pair per call.
  double normal() {
    double u1 = 1.0 - uniform();  // (0, 1]
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  // Uniform integer in [0, n). Multiply-shift keeps it independent of the
  // standard library's uniform_int_distribution.
  std::size_t below(std::size_t n) {
    return static_cast<std::size_t>(
        (static_cast<unsigned __int128>(eng_()) * n) >> 64);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

  // `count` distinct values from [0, n) \ {exclude}, in draw order.
  std::vector<std::size_t> sample_excluding(std::size_t n, std::size_t count,
                                            std::size_t exclude) {
    if (n == 0 || count > n - (exclude < n ? 1 : 0)) {
      throw Error(errc::out_of_range, "not enough items to sample from");
    }
    std::vector<std::size_t> pool;
    pool.reserve(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
      if (i != exclude) pool.push_back(i);
    }
    std::vector<std::size_t> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      std::size_t j = i + below(pool.size() - i);
      std::swap(pool[i], pool[j]);
      out.push_back(pool[i]);
    }
    return out;
  }

private:
  std::mt19937_64 eng_;
};

}  // namespace semsum
