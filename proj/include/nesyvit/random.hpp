#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace nesyvit {

// Seeded generator whose outputs are identical across standard libraries.
// std::*_distribution is implementation-defined, so the draws are done here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(make_engine({seed})) {}
  Rng(std::uint64_t seed, std::uint64_t stream) : engine_(make_engine({seed, stream})) {}

  std::uint64_t next() { return engine_(); }

  // [0, 1)
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller; caches the second variate.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  // Uniform in [0, n).
  std::uint64_t below(std::uint64_t n) { return engine_() % n; }

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[below(i)]);
    }
  }

 private:
  static std::mt19937_64 make_engine(std::initializer_list<std::uint64_t> words) {
    std::vector<std::uint32_t> parts;
    for (auto w : words) {
      parts.push_back(static_cast<std::uint32_t>(w & 0xffffffffu));
      parts.push_back(static_cast<std::uint32_t>(w >> 32));
    }
    std::seed_seq s(parts.begin(), parts.end());
    return std::mt19937_64(s);
  }

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace nesyvit
