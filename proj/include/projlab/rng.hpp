#pragma once

#include <array>
#include <cstdint>

namespace projlab {

/// Philox4x32-10 block function (Salmon et al., Random123).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Counter-based random stream.
///
/// A stream is a Philox key plus a running block counter. Substreams are
/// derived by hashing the parent key with an index, so a path such as
/// root -> d -> beta -> replicate always lands on the same sequence no matter
/// which worker draws it or in what order.
class Stream {
 public:
  explicit Stream(std::uint64_t seed);

  /// Independent child stream identified by `index`. Does not advance *this.
  Stream substream(std::uint64_t index) const;

  std::uint64_t next_u64();

  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform();

  /// Standard normal (ziggurat).
  double normal();

  // UniformRandomBitGenerator interface.
  using result_type = std::uint64_t;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() { return next_u64(); }

  std::uint64_t key() const {
    return (static_cast<std::uint64_t>(key_[1]) << 32) | key_[0];
  }

 private:
  Stream(std::array<std::uint32_t, 2> key) : key_(key) {}

  static constexpr int kBlocksPerRefill = 8;
  static constexpr int kBufferWords = 4 * kBlocksPerRefill;

  void refill();

  std::array<std::uint32_t, 2> key_{};
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, kBufferWords> buffer_{};
  int available_ = 0;
};

}  // namespace projlab
