#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include "rsms/bytes.hpp"
#include "rsms/digest.hpp"

namespace rsms {

// Deterministic byte stream: SHAKE-256 over (key, block counter). A fixed
// seed reproduces every draw bit-for-bit, which is what transcripts, golden
// files, and common-random-number simulation arms rely on. fork() derives an
// independent child stream, so replications and per-request substreams can be
// keyed without sharing state.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    Bytes seed_bytes;
    put_u64(seed_bytes, seed);
    init_key(seed_bytes);
  }

  explicit Rng(ByteView seed_material) { init_key(seed_material); }

  Rng fork(std::uint64_t label) {
    Bytes material(key_.begin(), key_.end());
    append(material, str_bytes("fork"));
    put_u64(material, label);
    return Rng(ByteView(material));
  }

  void fill(std::uint8_t* out, std::size_t n) {
    while (n > 0) {
      if (buf_pos_ == buf_.size()) refill();
      std::size_t chunk = std::min(n, buf_.size() - buf_pos_);
      std::memcpy(out, buf_.data() + buf_pos_, chunk);
      buf_pos_ += chunk;
      out += chunk;
      n -= chunk;
    }
  }

  Bytes bytes(std::size_t n) {
    Bytes out(n);
    fill(out.data(), n);
    return out;
  }

  std::uint64_t next_u64() {
    std::uint8_t b[8];
    fill(b, 8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = v << 8 | b[i];
    return v;
  }

  // Unbiased integer in [0, bound).
  std::uint64_t uniform(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("uniform: zero bound");
    std::uint64_t limit = ~std::uint64_t{0} - ~std::uint64_t{0} % bound;
    std::uint64_t v;
    do {
      v = next_u64();
    } while (v >= limit);
    return v % bound;
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double exponential(double rate) {
    if (rate <= 0.0) throw std::invalid_argument("exponential: rate must be > 0");
    double u;
    do {
      u = uniform01();
    } while (u == 0.0);
    return -std::log(u) / rate;
  }

 private:
  void init_key(ByteView material) {
    Bytes k = shake256({str_bytes("rsms-rng-v1"), material}, key_.size());
    std::copy(k.begin(), k.end(), key_.begin());
  }

  void refill() {
    Bytes ctr;
    put_u64(ctr, block_++);
    Bytes block = shake256({ByteView(key_), ByteView(ctr)}, buf_.size());
    std::copy(block.begin(), block.end(), buf_.begin());
    buf_pos_ = 0;
  }

  std::array<std::uint8_t, 32> key_{};
  std::array<std::uint8_t, 64> buf_{};
  std::size_t buf_pos_ = buf_.size();
  std::uint64_t block_ = 0;
};

}  // namespace rsms
