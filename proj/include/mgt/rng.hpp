#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace mgt {

/// splitmix64 finalizer. Stable across platforms; used for every keyed hash.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t hash_string(std::string_view s);

/// Seed for one unit of work, derived from the global seed and string keys
/// (cell name, document id). Independent of scheduling order.
std::uint64_t derive_seed(std::uint64_t base, std::string_view a, std::string_view b = {});
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

/// mt19937_64 with distribution code written out here, since the standard
/// distributions are implementation-defined and would break golden files.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, 1) with 53 bits of precision.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  bool bernoulli(double p) { return uniform() < p; }
  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);
  /// Index drawn proportionally to non-negative weights; returns weights.size() if all are zero.
  std::size_t weighted(std::span<const double> weights);

 private:
  std::mt19937_64 engine_;
};

}  // namespace mgt
