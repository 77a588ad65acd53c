#include "projlab/rng.hpp"

#include <boost/random/normal_distribution.hpp>

namespace projlab {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

// Tag stored in the upper counter words when deriving child keys, so key
// derivation never shares a counter block with ordinary draws.
constexpr std::uint32_t kSplitTag = 0x53504C54u;  // "SPLT"

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                    std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) {
  std::uint32_t c0 = ctr[0], c1 = ctr[1], c2 = ctr[2], c3 = ctr[3];
  std::uint32_t k0 = key[0], k1 = key[1];
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, c0, hi0, lo0);
    mulhilo(kMul1, c2, hi1, lo1);
    c0 = hi1 ^ c1 ^ k0;
    c1 = lo1;
    c2 = hi0 ^ c3 ^ k1;
    c3 = lo0;
    k0 += kWeyl0;
    k1 += kWeyl1;
  }
  return {c0, c1, c2, c3};
}

Stream::Stream(std::uint64_t seed)
    : key_{static_cast<std::uint32_t>(seed),
           static_cast<std::uint32_t>(seed >> 32)} {}

Stream Stream::substream(std::uint64_t index) const {
  const auto out = philox4x32({static_cast<std::uint32_t>(index),
                               static_cast<std::uint32_t>(index >> 32),
                               kSplitTag, 0u},
                              key_);
  return Stream(std::array<std::uint32_t, 2>{out[0], out[1]});
}

void Stream::refill() {
  // Lane-parallel evaluation of consecutive blocks; output equals
  // philox4x32 applied to each block counter in turn.
  constexpr int L = kBlocksPerRefill;
  std::uint32_t c0[L], c1[L], c2[L], c3[L];
  for (int b = 0; b < L; ++b) {
    const std::uint64_t blk = block_ + static_cast<std::uint64_t>(b);
    c0[b] = static_cast<std::uint32_t>(blk);
    c1[b] = static_cast<std::uint32_t>(blk >> 32);
    c2[b] = 0u;
    c3[b] = 0u;
  }
  std::uint32_t k0 = key_[0], k1 = key_[1];
  for (int round = 0; round < 10; ++round) {
    for (int b = 0; b < L; ++b) {
      const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c0[b];
      const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c2[b];
      const std::uint32_t n0 = static_cast<std::uint32_t>(p1 >> 32) ^ c1[b] ^ k0;
      const std::uint32_t n2 = static_cast<std::uint32_t>(p0 >> 32) ^ c3[b] ^ k1;
      c1[b] = static_cast<std::uint32_t>(p1);
      c3[b] = static_cast<std::uint32_t>(p0);
      c0[b] = n0;
      c2[b] = n2;
    }
    k0 += kWeyl0;
    k1 += kWeyl1;
  }
  for (int b = 0; b < L; ++b) {
    buffer_[4 * b] = c0[b];
    buffer_[4 * b + 1] = c1[b];
    buffer_[4 * b + 2] = c2[b];
    buffer_[4 * b + 3] = c3[b];
  }
  block_ += L;
  available_ = kBufferWords;
}

std::uint64_t Stream::next_u64() {
  if (available_ < 2) refill();
  const std::uint64_t lo = buffer_[kBufferWords - available_];
  const std::uint64_t hi = buffer_[kBufferWords + 1 - available_];
  available_ -= 2;
  return (hi << 32) | lo;
}

double Stream::uniform() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double Stream::normal() {
  return boost::random::normal_distribution<double>()(*this);
}

}  // namespace projlab
