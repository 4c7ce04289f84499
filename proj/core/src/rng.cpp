#include "vpgnn/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace vpgnn {
namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4B7C15ULL;

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream) {
  counter_ = mix64(seed + kGolden) ^ mix64(stream * 0xBF58476D1CE4E5B9ULL + 1);
}

std::uint64_t RngStream::next_u64() {
  counter_ += kGolden;
  return mix64(counter_);
}

double RngStream::next_real() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t RngStream::next_below(std::uint64_t n) {
  if (n == 0) {
    throw std::invalid_argument("RngStream::next_below: n must be positive");
  }
  // Reject the tail of the 64-bit range that would bias the modulus.
  const std::uint64_t threshold = (0 - n) % n;
  for (;;) {
    const std::uint64_t r = next_u64();
    if (r >= threshold) {
      return r % n;
    }
  }
}

double RngStream::next_normal() {
  const double u1 = 1.0 - next_real();  // (0, 1], keeps log() finite
  const double u2 = next_real();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

RngStream RngStream::derive(std::uint64_t substream) const {
  return RngStream(seed_, mix64(stream_ + kGolden) ^ mix64(substream + 1));
}

std::vector<std::size_t> RngStream::permutation(std::size_t n) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) {
    idx[i] = i;
  }
  shuffle(idx);
  return idx;
}

std::vector<std::size_t> RngStream::sample_without_replacement(std::size_t n,
                                                               std::size_t k) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) {
    idx[i] = i;
  }
  if (k >= n) {
    return idx;
  }
  // Partial Fisher–Yates: first k slots end up uniform without replacement.
  for (std::size_t i = 0; i < k; ++i) {
    std::swap(idx[i], idx[i + next_below(n - i)]);
  }
  idx.resize(k);
  return idx;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag) {
  return mix64(master + kGolden) ^ mix64(tag * 0x94D049BB133111EBULL + 0x2545F4914F6CDD1DULL);
}

}  // namespace vpgnn
