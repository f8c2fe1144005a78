#include "pcat/rng.hpp"

#include <cmath>

namespace pcat {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

Rng Rng::child(std::uint64_t index) const {
  return Rng(splitmix64(seed_ ^ (index + 1) * kGolden));
}

double Rng::uniform() {
  // 53-bit mantissa in [0, 1).
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  const double u1 = 1.0 - uniform();  // (0, 1], keeps the log finite
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

std::uint64_t Rng::uniform_index(std::uint64_t n) {
  if (n == 0) throw DataError("uniform_index: n must be positive");
  // Rejection sampling to avoid modulo bias.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

Vector Rng::normal_vector(int n) {
  Vector out(n);
  // Consume both Box-Muller halves when filling bulk data.
  int i = 0;
  while (i + 1 < n) {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    out[i] = radius * std::cos(kTwoPi * u2);
    out[i + 1] = radius * std::sin(kTwoPi * u2);
    i += 2;
  }
  if (i < n) out[i] = normal();
  return out;
}

Matrix Rng::normal_matrix(int rows, int cols) {
  Vector flat = normal_vector(rows * cols);
  return Eigen::Map<const Matrix>(flat.data(), rows, cols);
}

Vector Rng::unit_vector(int n) {
  Vector v = normal_vector(n);
  double norm = v.norm();
  while (norm < 1e-12) {  // astronomically unlikely
    v = normal_vector(n);
    norm = v.norm();
  }
  return v / norm;
}

double Rng::chi_squared(int df) {
  double sum = 0.0;
  for (int i = 0; i < df; ++i) {
    const double z = normal();
    sum += z * z;
  }
  return sum;
}

}  // namespace pcat
