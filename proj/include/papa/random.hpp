#pragma once

#include "papa/common.hpp"

#include <cstdint>
#include <numeric>
#include <random>
#include <string_view>
#include <vector>

namespace papa {

// Portable random streams. The engine is std::mt19937_64, whose output
// sequence is fixed by the standard; the distributions below are written
// out by hand because the standard library ones are implementation-defined.
// Each array of a generated instance draws from its own named stream so that
// changing one array's size leaves the others untouched.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::string_view name)
      : engine_(mix(seed ^ hash(name))) {}

  // Uniform on [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller; the second variate is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(t);
    has_spare_ = true;
    return r * std::cos(t);
  }

  // Uniform integer in [0, n) by rejection, no modulo bias.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t v;
    do {
      v = engine_();
    } while (v >= limit);
    return v % n;
  }

  Vec<double> normal_vector(Index n) {
    Vec<double> v(n);
    for (Index i = 0; i < n; ++i) v[i] = normal();
    return v;
  }

  Vec<double> uniform_vector(Index n, double lo = 0.0, double hi = 1.0) {
    Vec<double> v(n);
    for (Index i = 0; i < n; ++i) v[i] = uniform(lo, hi);
    return v;
  }

  // Column-major fill.
  Mat<double> normal_matrix(Index rows, Index cols) {
    Mat<double> m(rows, cols);
    for (Index j = 0; j < cols; ++j)
      for (Index i = 0; i < rows; ++i) m(i, j) = normal();
    return m;
  }

  // Fisher-Yates.
  std::vector<Index> permutation(Index n) {
    std::vector<Index> p(static_cast<std::size_t>(n));
    std::iota(p.begin(), p.end(), Index{0});
    for (Index i = n - 1; i > 0; --i) {
      const auto j = static_cast<Index>(below(static_cast<std::uint64_t>(i) + 1));
      std::swap(p[static_cast<std::size_t>(i)], p[static_cast<std::size_t>(j)]);
    }
    return p;
  }

  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  static std::uint64_t hash(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (unsigned char ch : s) {
      h ^= ch;
      h *= 0x100000001b3ULL;
    }
    return h;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace papa
