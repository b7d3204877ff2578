#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace expfun {

// Philox4x32-10 counter-based generator.  The key is the user seed and the
// upper counter half is the path index, so every (seed, path) pair owns a
// private stream of 2^64 blocks.  Draws depend only on (seed, path, draw
// index), never on thread scheduling, which makes estimates reproducible for
// any worker count.
class PhiloxRng {
 public:
  PhiloxRng(std::uint64_t seed, std::uint64_t path)
      : key0_(static_cast<std::uint32_t>(seed)),
        key1_(static_cast<std::uint32_t>(seed >> 32)),
        path_lo_(static_cast<std::uint32_t>(path)),
        path_hi_(static_cast<std::uint32_t>(path >> 32)) {}

  std::uint64_t next_u64() {
    if (pos_ == 2) fill();
    return out_[pos_++];
  }

  // Uniform on the open interval (0, 1); cannot return an endpoint.
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53;
  }

  // Standard normal deviate (Box-Muller, pairs cached).
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.28318530717958647692 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
  static constexpr std::uint32_t kMult0 = 0xD2511F53u;
  static constexpr std::uint32_t kMult1 = 0xCD9E8D57u;

  void fill() {
    std::uint32_t c0 = static_cast<std::uint32_t>(counter_);
    std::uint32_t c1 = static_cast<std::uint32_t>(counter_ >> 32);
    std::uint32_t c2 = path_lo_;
    std::uint32_t c3 = path_hi_;
    std::uint32_t k0 = key0_;
    std::uint32_t k1 = key1_;
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = static_cast<std::uint64_t>(kMult0) * c0;
      const std::uint64_t p1 = static_cast<std::uint64_t>(kMult1) * c2;
      const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
      const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
      c0 = hi1 ^ c1 ^ k0;
      c1 = lo1;
      c2 = hi0 ^ c3 ^ k1;
      c3 = lo0;
      k0 += kWeyl0;
      k1 += kWeyl1;
    }
    out_[0] = (static_cast<std::uint64_t>(c1) << 32) | c0;
    out_[1] = (static_cast<std::uint64_t>(c3) << 32) | c2;
    pos_ = 0;
    ++counter_;
  }

  std::uint32_t key0_;
  std::uint32_t key1_;
  std::uint32_t path_lo_;
  std::uint32_t path_hi_;
  std::uint64_t counter_ = 0;
  std::uint64_t out_[2] = {0, 0};
  int pos_ = 2;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Family of per-path streams used by the simulators.
class RngStreams {
 public:
  RngStreams(std::uint64_t seed, int streams) : seed_(seed), streams_(streams) {
    if (streams < 1) {
      throw std::invalid_argument("RngStreams: streams must be >= 1");
    }
  }

  std::uint64_t seed() const { return seed_; }
  int streams() const { return streams_; }
  PhiloxRng path_rng(std::uint64_t path_index) const {
    return PhiloxRng(seed_, path_index);
  }

 private:
  std::uint64_t seed_;
  int streams_;
};

}  // namespace expfun
