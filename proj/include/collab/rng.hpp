#pragma once

// Seeded random source for the simulators. Uniforms come from
// std::mt19937_64 (53-bit mantissa), normals from Box-Muller, gammas from
// Marsaglia-Tsang. Every draw is a pure function of the seed and call order,
// so streams are reproducible across platforms.

#include <cstdint>
#include <random>
#include <vector>

namespace collab {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }
  double laplace(double loc, double scale);
  double gamma(double shape);
  // Dirichlet(alpha, ..., alpha) over k coordinates, strictly positive.
  std::vector<double> dirichlet(std::size_t k, double alpha);
  std::vector<double> dirichlet(const std::vector<double>& alphas);
  bool bernoulli(double p) { return uniform() < p; }
  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace collab
