#pragma once

#include <cmath>
#include <cstdint>

#include <Eigen/Dense>

namespace dglmc {

/// Counter-based pseudo-random stream (Philox 4x32-10).
///
/// Each stream is identified by (seed, stream_id). Streams with distinct ids
/// are statistically independent for a fixed seed and produce their output
/// purely as a function of their own counter, so per-worker draws never
/// depend on thread scheduling or on how many other streams exist. This is
/// what makes a run reproducible bit-for-bit whether the workers execute
/// serially or in parallel.
class PhiloxStream {
 public:
  PhiloxStream(std::uint64_t seed, std::uint64_t stream_id)
      : key0_(static_cast<std::uint32_t>(seed)),
        key1_(static_cast<std::uint32_t>(seed >> 32)),
        ctr2_(static_cast<std::uint32_t>(stream_id)),
        ctr3_(static_cast<std::uint32_t>(stream_id >> 32)) {}

  /// Next 64 uniform random bits.
  std::uint64_t next_u64() {
    if (have_half_) {
      have_half_ = false;
      return half_;
    }
    std::uint32_t c0 = static_cast<std::uint32_t>(block_);
    std::uint32_t c1 = static_cast<std::uint32_t>(block_ >> 32);
    std::uint32_t x0 = c0, x1 = c1, x2 = ctr2_, x3 = ctr3_;
    std::uint32_t k0 = key0_, k1 = key1_;
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = 0xD2511F53ull * x0;
      const std::uint64_t p1 = 0xCD9E8D57ull * x2;
      const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
      const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
      x0 = hi1 ^ x1 ^ k0;
      x1 = lo1;
      x2 = hi0 ^ x3 ^ k1;
      x3 = lo0;
      k0 += 0x9E3779B9u;
      k1 += 0xBB67AE85u;
    }
    ++block_;
    half_ = (static_cast<std::uint64_t>(x2) << 32) | x3;
    have_half_ = true;
    return (static_cast<std::uint64_t>(x0) << 32) | x1;
  }

  /// Uniform double in (0, 1].
  double next_unit() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1p-53;
  }

  /// Uniform index in [0, n). n must be positive.
  std::size_t uniform_index(std::size_t n) { return next_u64() % n; }

 private:
  std::uint32_t key0_, key1_;
  std::uint32_t ctr2_, ctr3_;
  std::uint64_t block_ = 0;       // low 64 bits of the counter
  std::uint64_t half_ = 0;        // second u64 of the current block
  bool have_half_ = false;
};

/// Stream of independent standard normal deviates on top of a PhiloxStream
/// (Box-Muller with a one-deviate carry).
class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::uint64_t stream_id)
      : bits_(seed, stream_id) {}

  double next() {
    if (have_carry_) {
      have_carry_ = false;
      return carry_;
    }
    const double u1 = bits_.next_unit();
    const double u2 = bits_.next_unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    carry_ = r * std::sin(a);
    have_carry_ = true;
    return r * std::cos(a);
  }

  void fill(Eigen::Ref<Eigen::VectorXd> out) {
    for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = next();
  }

  Eigen::VectorXd vector(Eigen::Index n) {
    Eigen::VectorXd out(n);
    fill(out);
    return out;
  }

  PhiloxStream& bits() { return bits_; }

 private:
  PhiloxStream bits_;
  double carry_ = 0.0;
  bool have_carry_ = false;
};

}  // namespace dglmc
