#pragma once

#include <array>
#include <cstdint>
#include <limits>

#include <boost/random/normal_distribution.hpp>

namespace stochsym {

// Philox4x32-10 block function (Salmon et al., SC'11).
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

inline PhiloxCounter philox4x32(PhiloxCounter ctr, PhiloxKey key) {
  std::uint32_t c0 = ctr[0], c1 = ctr[1], c2 = ctr[2], c3 = ctr[3];
  std::uint32_t k0 = key[0], k1 = key[1];
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * c0;
    const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * c2;
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    c0 = hi1 ^ c1 ^ k0;
    c2 = hi0 ^ c3 ^ k1;
    c1 = static_cast<std::uint32_t>(p1);
    c3 = static_cast<std::uint32_t>(p0);
    k0 += 0x9E3779B9u;
    k1 += 0xBB67AE85u;
  }
  return {c0, c1, c2, c3};
}

// Leg identifiers used to separate substreams of one master seed.
enum class Leg : std::uint32_t { kDirect = 1, kReduced = 2, kAux = 3 };

// Counter-based substream keyed by (master seed, leg, path index). Draws are a
// pure function of those three values and the draw position.
class Stream {
 public:
  using result_type = std::uint64_t;

  Stream(std::uint64_t seed, std::uint32_t leg, std::uint64_t index);
  Stream(std::uint64_t seed, Leg leg, std::uint64_t index)
      : Stream(seed, static_cast<std::uint32_t>(leg), index) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (pos_ == 2 * kBlocks) refill();
    const std::size_t i = 2 * pos_++;
    return (static_cast<std::uint64_t>(buf_[i]) << 32) | buf_[i + 1];
  }

  double normal() { return normal_(*this); }
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  // Blocks are generated kBlocks at a time so the rounds of independent
  // counters can overlap; the sequence equals consecutive philox4x32 calls.
  static constexpr int kBlocks = 8;

  void refill() {
    std::uint32_t c0[kBlocks], c1[kBlocks], c2[kBlocks], c3[kBlocks];
    for (int b = 0; b < kBlocks; ++b) {
      c0[b] = ctr_[0];
      c1[b] = ctr_[1];
      c2[b] = ctr_[2];
      c3[b] = ctr_[3] + static_cast<std::uint32_t>(b);
    }
    std::uint32_t k0 = key_[0], k1 = key_[1];
    for (int round = 0; round < 10; ++round) {
      for (int b = 0; b < kBlocks; ++b) {
        const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * c0[b];
        const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * c2[b];
        const auto n0 = static_cast<std::uint32_t>(p1 >> 32) ^ c1[b] ^ k0;
        const auto n2 = static_cast<std::uint32_t>(p0 >> 32) ^ c3[b] ^ k1;
        c1[b] = static_cast<std::uint32_t>(p1);
        c3[b] = static_cast<std::uint32_t>(p0);
        c0[b] = n0;
        c2[b] = n2;
      }
      k0 += 0x9E3779B9u;
      k1 += 0xBB67AE85u;
    }
    for (int b = 0; b < kBlocks; ++b) {
      buf_[4 * b] = c0[b];
      buf_[4 * b + 1] = c1[b];
      buf_[4 * b + 2] = c2[b];
      buf_[4 * b + 3] = c3[b];
    }
    ctr_[3] += kBlocks;
    pos_ = 0;
  }

  PhiloxKey key_;
  PhiloxCounter ctr_;
  std::array<std::uint32_t, 4 * kBlocks> buf_{};
  int pos_ = 2 * kBlocks;
  boost::random::normal_distribution<double> normal_;
};

}  // namespace stochsym
