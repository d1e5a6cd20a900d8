#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace hetho {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// Counter layout used by every stream in this library:
///   word 0  block index within the stream (advanced by the engine)
///   word 1  entity (UE index, tier index, ...)
///   word 2  replication index
///   word 3  stream kind
/// The 64-bit seed is the key. Any (seed, kind, replication, entity) tuple
/// therefore names an independent stream, and results do not depend on
/// the order in which streams are consumed.
class Philox4x32 {
 public:
  using result_type = std::uint32_t;
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  Philox4x32(Key key, Block counter) : key_(key), counter_(counter) {}

  /// The raw bijection: ten rounds of Philox on one counter block.
  static Block generate(Block counter, Key key);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (used_ == 4) refill();
    return buffer_[used_++];
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() {
    const std::uint64_t a = (*this)() >> 5;
    const std::uint64_t b = (*this)() >> 6;
    return (static_cast<double>(a) * 67108864.0 + static_cast<double>(b)) *
           (1.0 / 9007199254740992.0);
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  void refill() {
    buffer_ = generate(counter_, key_);
    ++counter_[0];
    used_ = 0;
  }

  Key key_;
  Block counter_;
  Block buffer_{};
  int used_ = 4;
};

enum class StreamKind : std::uint32_t {
  field = 1,
  population = 2,
  ue = 3,
  oracle = 4,
  test = 15,
};

Philox4x32 make_stream(std::uint64_t seed, StreamKind kind, std::uint32_t replication,
                       std::uint32_t entity);

}  // namespace hetho
