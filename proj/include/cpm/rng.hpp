#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace cpm {

// Philox4x32-10 counter-based generator. The stream is a pure function of
// (key, stream words), so replicates can be drawn in any order or in
// parallel without changing their values. Satisfies
// UniformRandomBitGenerator for use with <random> distributions.
class Philox4x32 {
 public:
  using result_type = std::uint32_t;
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  // Two counter words select the stream; the other two count blocks.
  Philox4x32(std::uint64_t seed, std::uint32_t stream_a, std::uint32_t stream_b);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

  // One bijective round-function application; exposed for known-answer tests.
  static Block bijection(Block counter, Key key);

 private:
  Key key_;
  Block counter_;
  Block buffer_{};
  int index_ = 4;
};

}  // namespace cpm
