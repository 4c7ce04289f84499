#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

namespace vpgnn {

// Counter-based deterministic random stream. A stream is addressed by a
// (seed, stream id) pair: the same pair yields the same draw sequence on
// every platform, and derive() mints independent substreams. Bounded and
// real-valued draws are implemented directly on the 64-bit output because
// the <random> distributions are implementation-defined.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

  std::uint64_t next_u64();

  // Uniform in [0, 1) with 53 bits of precision.
  double next_real();

  // Uniform in [0, n), unbiased via rejection. n must be positive.
  std::uint64_t next_below(std::uint64_t n);

  // Standard normal deviate (Box-Muller).
  double next_normal();

  // Independent stream for the same seed, addressed by a child id.
  RngStream derive(std::uint64_t substream) const;

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[next_below(i)]);
    }
  }

  // Uniform random permutation of 0..n-1.
  std::vector<std::size_t> permutation(std::size_t n);

  // k distinct indices from [0, n), uniform without replacement. If k >= n,
  // returns all n indices.
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_;
};

// Stable 64-bit mix of a master seed and a tag; used to hand unrelated
// pipeline stages their own seeds.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag);

}  // namespace vpgnn
