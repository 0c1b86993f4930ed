#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "rsms/bytes.hpp"
#include "rsms/counters.hpp"
#include "rsms/digest.hpp"

namespace rsms {

// Probabilistic credential store: 1.44 * epsilon * N bits for N elements
// gives a false-positive rate of 2^-epsilon at capacity. Indices come from
// double hashing over one SHA-256 digest of the element.
class BloomFilter {
 public:
  BloomFilter(std::uint32_t capacity, std::uint32_t epsilon,
              std::uint32_t epoch_id = 0)
      : capacity_(capacity), epsilon_(epsilon), epoch_id_(epoch_id) {
    if (capacity == 0) throw std::invalid_argument("bloom: capacity must be >= 1");
    if (epsilon == 0) throw std::invalid_argument("bloom: epsilon must be >= 1");
    // L = ceil(1.44 * eps * N), exact in integer arithmetic
    std::uint64_t l = (144ull * epsilon * capacity + 99) / 100;
    bit_length_ = l;
    bits_.assign((l + 7) / 8, 0);
    std::uint32_t k =
        static_cast<std::uint32_t>(std::lround(std::log(2.0) * static_cast<double>(l) /
                                               static_cast<double>(capacity)));
    hash_count_ = k == 0 ? 1 : k;
  }

  // Returns false when the insert pushed the filter past capacity; the
  // element is stored either way but the FPR target no longer holds.
  bool insert(ByteView m) {
    for (std::uint64_t pos : index_list(m)) set_bit(pos);
    ++inserted_;
    if (inserted_ > capacity_) over_capacity_ = true;
    return !over_capacity_;
  }

  bool check(ByteView m) const {
    op_counters().bf_check++;
    for (std::uint64_t pos : index_list(m))
      if (!get_bit(pos)) return false;
    return true;
  }

  // The deterministic index set insert(m) would touch.
  std::vector<std::uint32_t> positions(ByteView m) const {
    std::vector<std::uint32_t> out;
    out.reserve(hash_count_);
    for (std::uint64_t pos : index_list(m))
      out.push_back(static_cast<std::uint32_t>(pos));
    return out;
  }

  std::uint64_t bit_length() const { return bit_length_; }
  std::uint32_t capacity() const { return capacity_; }
  std::uint32_t epsilon() const { return epsilon_; }
  std::uint32_t hash_count() const { return hash_count_; }
  std::uint32_t inserted() const { return inserted_; }
  bool over_capacity() const { return over_capacity_; }
  std::uint32_t epoch_id() const { return epoch_id_; }

  // Handoff payload: magic, version, epoch_id, N, epsilon, k, raw bit array.
  static constexpr std::uint8_t kVersion = 1;

  Bytes serialize() const {
    Bytes out;
    append(out, str_bytes("RSBF"));
    put_u8(out, kVersion);
    put_u32(out, epoch_id_);
    put_u32(out, capacity_);
    put_u32(out, epsilon_);
    put_u32(out, hash_count_);
    append(out, bits_);
    return out;
  }

  static BloomFilter deserialize(ByteView b) {
    ByteReader r(b);
    ByteView magic = r.take(4);
    if (!std::equal(magic.begin(), magic.end(), "RSBF"))
      throw std::invalid_argument("bloom: bad magic");
    if (r.u8() != kVersion) throw std::invalid_argument("bloom: bad version");
    std::uint32_t epoch = r.u32();
    std::uint32_t capacity = r.u32();
    std::uint32_t epsilon = r.u32();
    std::uint32_t k = r.u32();
    BloomFilter bf(capacity, epsilon, epoch);
    if (k != bf.hash_count_) throw std::invalid_argument("bloom: hash count mismatch");
    ByteView bits = r.take(bf.bits_.size());
    std::copy(bits.begin(), bits.end(), bf.bits_.begin());
    r.expect_end();
    return bf;
  }

 private:
  std::vector<std::uint64_t> index_list(ByteView m) const {
    static constexpr std::uint8_t kDomain = 0xB7;
    Bytes d = sha256({ByteView(&kDomain, 1), m});
    auto word = [&](std::size_t off) {
      std::uint64_t v = 0;
      for (int i = 0; i < 8; ++i) v = v << 8 | d[off + i];
      return v;
    };
    std::uint64_t h1 = word(0);
    std::uint64_t h2 = word(8) | 1;  // odd stride
    std::vector<std::uint64_t> out(hash_count_);
    for (std::uint32_t i = 0; i < hash_count_; ++i)
      out[i] = (h1 + static_cast<std::uint64_t>(i) * h2) % bit_length_;
    return out;
  }

  void set_bit(std::uint64_t pos) { bits_[pos / 8] |= std::uint8_t(1u << (pos % 8)); }
  bool get_bit(std::uint64_t pos) const {
    return (bits_[pos / 8] >> (pos % 8)) & 1u;
  }

  std::uint32_t capacity_;
  std::uint32_t epsilon_;
  std::uint32_t epoch_id_;
  std::uint64_t bit_length_ = 0;
  std::uint32_t hash_count_ = 0;
  std::uint32_t inserted_ = 0;
  bool over_capacity_ = false;
  Bytes bits_;
};

}  // namespace rsms
