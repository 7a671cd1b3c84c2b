#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <utility>

namespace fdisim {

/// Seeded pseudo-random stream.
///
/// Engine is std::mt19937_64. Uniform and normal variates are produced by
/// fixed formulas (53-bit mantissa, Box-Muller without caching) so the output
/// does not depend on the standard library's distribution implementations.
/// Every normal() consumes exactly two engine outputs.
class Rng {
 public:
  static constexpr std::string_view kAlgorithm = "mt19937_64/splitmix64-fnv1a-substreams/box-muller";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Named sub-stream of a scenario seed. Streams with different names are
  /// statistically independent, so adding a consumer never perturbs another.
  static Rng substream(std::uint64_t seed, std::string_view name);

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform();

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal.
  double normal();

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  /// Both Box-Muller outputs of one uniform pair, for bulk draws.
  std::pair<double, double> normal_pair();

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a(std::string_view s);

}  // namespace fdisim
