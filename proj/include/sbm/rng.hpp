#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string_view>

namespace sbm {

// xoshiro256** seeded through splitmix64. Every random consumer derives its
// own stream as derive_stream(seed, purpose_tag), so adding a new consumer
// never perturbs the draws of an existing one.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed);

  static constexpr std::string_view generator_name() { return "xoshiro256**/splitmix64"; }
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }
  // Uniform on (0, 1], safe as a log argument.
  double uniform_open0() { return 1.0 - uniform(); }
  // Uniform integer in [0, bound), bound > 0 (Lemire's nearly-divisionless method).
  std::uint64_t below(std::uint64_t bound);
  double exponential() { return -std::log(uniform_open0()); }
  // Index drawn from a probability vector by inverse CDF.
  int categorical(std::span<const double> cumulative);

 private:
  std::uint64_t state_[4];
};

std::uint64_t splitmix64(std::uint64_t& state);
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ULL);
std::uint64_t derive_stream(std::uint64_t seed, std::string_view purpose);
// Seed for the index-th independent draw within a stream; lets parallel
// workers reproduce exactly what a sequential loop would see.
std::uint64_t substream(std::uint64_t stream, std::uint64_t index);

template <typename T>
void shuffle(std::span<T> values, Rng& rng) {
  for (std::size_t i = values.size(); i > 1; --i) {
    const std::size_t j = rng.below(i);
    std::swap(values[i - 1], values[j]);
  }
}

}  // namespace sbm
