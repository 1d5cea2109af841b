#pragma once

// Reference computations used by the tests. Each one takes the slow,
// obvious route and shares no code with the library path it checks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace collab::testing {

// Sort, then index the ceil(level * (m + 1))-th smallest; +inf on overflow.
inline double naive_conformal_quantile(std::vector<double> scores, double level) {
  std::sort(scores.begin(), scores.end());
  const double m = static_cast<double>(scores.size());
  const double k = std::ceil(level * (m + 1.0));
  if (k > m) return std::numeric_limits<double>::infinity();
  return scores[static_cast<std::size_t>(k) - 1];
}

// Midpoint-grid estimate of the measure of a union of [lo, hi] pairs on
// [-10, 10].
inline double grid_measure(const std::vector<std::pair<double, double>>& raw, int cells = 2000000) {
  const double lo = -10.0, hi = 10.0, h = (hi - lo) / cells;
  std::size_t inside = 0;
  for (int i = 0; i < cells; ++i) {
    const double x = lo + (i + 0.5) * h;
    for (const auto& [a, b] : raw) {
      if (a <= x && x <= b) {
        ++inside;
        break;
      }
    }
  }
  return static_cast<double>(inside) * h;
}

// Small deterministic generator for property tests (SplitMix64).
class TestRng {
 public:
  explicit TestRng(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(next() % n); }

 private:
  std::uint64_t state_;
};

}  // namespace collab::testing
