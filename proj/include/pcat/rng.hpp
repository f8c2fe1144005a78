#pragma once

#include <cstdint>
#include <random>

#include "pcat/common.hpp"

namespace pcat {

// Deterministic generator used everywhere randomness is needed. Wraps
// std::mt19937_64 (whose output sequence is fixed by the standard) and keeps
// the seed around so that independent child streams can be derived:
// child(i) is seeded with splitmix64(seed ^ (i+1)*GOLDEN). Replication r of
// an experiment always uses child(r) of the master seed, so serial and
// parallel runs consume identical streams.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  Rng child(std::uint64_t index) const;

  std::uint64_t seed() const { return seed_; }

  double uniform();                 // [0, 1)
  double normal();                  // N(0, 1), Box-Muller, no cached state
  std::uint64_t uniform_index(std::uint64_t n);  // {0, ..., n-1}, unbiased

  Vector normal_vector(int n);
  Matrix normal_matrix(int rows, int cols);
  Vector unit_vector(int n);        // uniform on the sphere
  double chi_squared(int df);       // sum of df squared normals

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace pcat
