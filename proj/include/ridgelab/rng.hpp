#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace ridgelab {

using Rng = std::mt19937_64;

/// Stream tags keep independent quantities of one trial on separate substreams.
enum class Stream : std::uint64_t {
  design = 0,
  noise = 1,
  projection = 2,
  features = 3,
  subset = 4,
  uncoupled = 5,
  aux = 6,
};

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of the substream for (seed, trial, stream).
///
/// Every trial of every experiment draws from its own generator seeded here,
/// so results never depend on which worker thread ran the trial or in what
/// order trials were scheduled.
constexpr std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t trial,
                                       Stream stream = Stream::design) noexcept {
  return mix64(mix64(mix64(seed) ^ trial) ^ (static_cast<std::uint64_t>(stream) * 0xd1342543de82ef95ULL));
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t trial, Stream stream = Stream::design) {
  return Rng(substream_seed(seed, trial, stream));
}

/// rows x cols i.i.d. N(0, 1), filled row by row so that a taller draw from
/// the same generator extends a shorter one.
inline Eigen::MatrixXd standard_normal(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = normal(rng);
  return out;
}

}  // namespace ridgelab
