#pragma once

#include <cstdint>
#include <string_view>

namespace seqleak {

// Deterministic, platform-independent random stream (xoshiro256** seeded via
// splitmix64). Two streams built from the same (seed, stream id) produce
// bit-identical draw sequences on every platform; std:: distributions are
// avoided because their output is implementation-defined.
class RngStream {
 public:
  RngStream() : RngStream(0, 0) {}
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  std::uint64_t next_u64();

  // Uniform double in [0, 1), 53-bit resolution.
  double uniform();

  // Uniform integer in [0, n). Unbiased; n must be >= 1.
  std::size_t uniform_index(std::size_t n);

  bool bernoulli(double p);

  // Independent stream derived from this stream's identity and a tag.
  // Derivation depends only on (seed, stream id, tag), not on draws made so
  // far, so derived streams are reproducible regardless of consumption order.
  RngStream derive(std::uint64_t tag) const;

  // Stable 64-bit combine used for (seed, trial, role)-style derivations.
  static std::uint64_t mix(std::uint64_t a, std::uint64_t b);
  static std::uint64_t hash_tag(std::string_view name);

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t stream_id_ = 0;
  std::uint64_t state_[4] = {0, 0, 0, 0};
};

}  // namespace seqleak
