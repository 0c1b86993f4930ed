#pragma once

#include <openssl/bn.h>
#include <openssl/ec.h>
#include <openssl/obj_mac.h>

#include <array>
#include <memory>
#include <optional>
#include <stdexcept>

#include "rsms/bytes.hpp"
#include "rsms/counters.hpp"
#include "rsms/rng.hpp"

namespace rsms {

// Canonical encoding widths, exported for the communication-cost accounting.
inline constexpr std::size_t kScalarBytes = 32;  // group order element, big-endian
inline constexpr std::size_t kPointBytes = 33;   // SEC1 compressed encoding
inline constexpr std::size_t kPidBytes = 20;     // pseudonym / real-identity width
inline constexpr std::size_t kScalarBits = kScalarBytes * 8;
inline constexpr std::size_t kPointBits = kPointBytes * 8;
inline constexpr std::size_t kPidBits = kPidBytes * 8;

namespace detail {

struct BnDeleter {
  void operator()(BIGNUM* b) const { BN_free(b); }
};
using BnPtr = std::unique_ptr<BIGNUM, BnDeleter>;

struct BnCtxDeleter {
  void operator()(BN_CTX* c) const { BN_CTX_free(c); }
};
using BnCtxPtr = std::unique_ptr<BN_CTX, BnCtxDeleter>;

struct EcPointDeleter {
  void operator()(EC_POINT* p) const { EC_POINT_free(p); }
};
using EcPointPtr = std::unique_ptr<EC_POINT, EcPointDeleter>;

inline BnPtr new_bn() {
  BnPtr b(BN_new());
  if (!b) throw std::runtime_error("BN_new failed");
  return b;
}

inline BN_CTX* tl_bn_ctx() {
  thread_local BnCtxPtr ctx(BN_CTX_new());
  if (!ctx) throw std::runtime_error("BN_CTX_new failed");
  return ctx.get();
}

// Process-wide curve context. The artifact runs on one prime-order group
// (secp256r1, 128-bit security); the generator table is precomputed once.
class Curve {
 public:
  static const Curve& get() {
    static Curve instance;
    return instance;
  }

  EC_GROUP* group() const { return group_; }
  const BIGNUM* order() const { return order_.get(); }

  Curve(const Curve&) = delete;
  Curve& operator=(const Curve&) = delete;

 private:
  Curve() {
    group_ = EC_GROUP_new_by_curve_name(NID_X9_62_prime256v1);
    if (!group_) throw std::runtime_error("EC_GROUP_new_by_curve_name failed");
    order_ = new_bn();
    if (EC_GROUP_get_order(group_, order_.get(), tl_bn_ctx()) != 1)
      throw std::runtime_error("EC_GROUP_get_order failed");
  }

  EC_GROUP* group_ = nullptr;
  BnPtr order_;
};

inline BnPtr bn_from_be(ByteView b) {
  BnPtr r(BN_bin2bn(b.data(), static_cast<int>(b.size()), nullptr));
  if (!r) throw std::runtime_error("BN_bin2bn failed");
  return r;
}

inline std::array<std::uint8_t, kScalarBytes> bn_to_be32(const BIGNUM* v) {
  std::array<std::uint8_t, kScalarBytes> out{};
  if (BN_bn2binpad(v, out.data(), kScalarBytes) < 0)
    throw std::runtime_error("BN_bn2binpad failed");
  return out;
}

}  // namespace detail

inline const char* curve_name() { return "secp256r1"; }

// Element of Z_q, q the prime group order. Stored as the reduced canonical
// 32-byte big-endian encoding, so values are immutable, trivially copyable,
// and safe to share across threads. Operations that the scheme restricts to
// Z_q* (inversion, random nonzero draws) reject zero.
class Scalar {
 public:
  Scalar() : v_{} {}

  static Scalar zero() { return Scalar(); }

  static Scalar one() { return from_u64(1); }

  static Scalar from_u64(std::uint64_t v) {
    std::array<std::uint8_t, kScalarBytes> b{};
    for (int i = 0; i < 8; ++i)
      b[kScalarBytes - 1 - i] = static_cast<std::uint8_t>(v >> (8 * i));
    return Scalar(b);
  }

  // Canonical decode: exactly 32 bytes, value < q.
  static std::optional<Scalar> try_from_bytes(ByteView b) {
    if (b.size() != kScalarBytes) return std::nullopt;
    auto bn = detail::bn_from_be(b);
    if (BN_cmp(bn.get(), detail::Curve::get().order()) >= 0) return std::nullopt;
    std::array<std::uint8_t, kScalarBytes> v{};
    std::copy(b.begin(), b.end(), v.begin());
    return Scalar(v);
  }

  static Scalar from_bytes(ByteView b) {
    auto s = try_from_bytes(b);
    if (!s) throw std::invalid_argument("Scalar: non-canonical encoding");
    return *s;
  }

  // Uniform over [0, q); rejection keeps the draw exact.
  static Scalar random(Rng& rng) {
    const BIGNUM* q = detail::Curve::get().order();
    for (;;) {
      Bytes draw = rng.bytes(kScalarBytes);
      auto bn = detail::bn_from_be(draw);
      if (BN_cmp(bn.get(), q) < 0) {
        std::array<std::uint8_t, kScalarBytes> v{};
        std::copy(draw.begin(), draw.end(), v.begin());
        return Scalar(v);
      }
    }
  }

  // Uniform over Z_q* = [1, q-1].
  static Scalar random_nonzero(Rng& rng) {
    for (;;) {
      Scalar s = random(rng);
      if (!s.is_zero()) return s;
    }
  }

  const std::array<std::uint8_t, kScalarBytes>& bytes() const { return v_; }

  Bytes to_bytes() const { return Bytes(v_.begin(), v_.end()); }

  bool is_zero() const {
    for (auto b : v_)
      if (b != 0) return false;
    return true;
  }

  Scalar add(const Scalar& o) const {
    auto a = detail::bn_from_be(v_);
    auto b = detail::bn_from_be(o.v_);
    auto r = detail::new_bn();
    if (BN_mod_add(r.get(), a.get(), b.get(), detail::Curve::get().order(),
                   detail::tl_bn_ctx()) != 1)
      throw std::runtime_error("BN_mod_add failed");
    return Scalar(detail::bn_to_be32(r.get()));
  }

  Scalar sub(const Scalar& o) const {
    auto a = detail::bn_from_be(v_);
    auto b = detail::bn_from_be(o.v_);
    auto r = detail::new_bn();
    if (BN_mod_sub(r.get(), a.get(), b.get(), detail::Curve::get().order(),
                   detail::tl_bn_ctx()) != 1)
      throw std::runtime_error("BN_mod_sub failed");
    return Scalar(detail::bn_to_be32(r.get()));
  }

  Scalar mul(const Scalar& o) const {
    op_counters().mod_mul++;
    auto a = detail::bn_from_be(v_);
    auto b = detail::bn_from_be(o.v_);
    auto r = detail::new_bn();
    if (BN_mod_mul(r.get(), a.get(), b.get(), detail::Curve::get().order(),
                   detail::tl_bn_ctx()) != 1)
      throw std::runtime_error("BN_mod_mul failed");
    return Scalar(detail::bn_to_be32(r.get()));
  }

  Scalar neg() const {
    if (is_zero()) return *this;
    auto a = detail::bn_from_be(v_);
    auto r = detail::new_bn();
    if (BN_sub(r.get(), detail::Curve::get().order(), a.get()) != 1)
      throw std::runtime_error("BN_sub failed");
    return Scalar(detail::bn_to_be32(r.get()));
  }

  Scalar inverse() const {
    if (is_zero()) throw std::invalid_argument("Scalar: inverse of zero");
    op_counters().mod_inv++;
    auto a = detail::bn_from_be(v_);
    auto r = detail::new_bn();
    if (!BN_mod_inverse(r.get(), a.get(), detail::Curve::get().order(),
                        detail::tl_bn_ctx()))
      throw std::runtime_error("BN_mod_inverse failed");
    return Scalar(detail::bn_to_be32(r.get()));
  }

  bool operator==(const Scalar& o) const { return v_ == o.v_; }
  bool operator!=(const Scalar& o) const { return !(*this == o); }
  bool operator<(const Scalar& o) const { return v_ < o.v_; }

 private:
  explicit Scalar(const std::array<std::uint8_t, kScalarBytes>& v) : v_(v) {}

  std::array<std::uint8_t, kScalarBytes> v_;
};

// Point on the curve, identity included. Wire form is the 33-byte compressed
// encoding; the identity is encoded as 33 zero bytes, which no affine point
// uses, so decoding stays unambiguous and width stays fixed.
class GroupPoint {
 public:
  GroupPoint() : pt_(make_identity()) {}

  static GroupPoint generator() {
    const auto& curve = detail::Curve::get();
    detail::EcPointPtr p(EC_POINT_dup(EC_GROUP_get0_generator(curve.group()),
                                      curve.group()));
    if (!p) throw std::runtime_error("EC_POINT_dup failed");
    return GroupPoint(std::move(p));
  }

  static GroupPoint from_bytes(ByteView b) {
    if (b.size() != kPointBytes)
      throw std::invalid_argument("GroupPoint: bad encoding width");
    bool all_zero = true;
    for (auto c : b)
      if (c != 0) {
        all_zero = false;
        break;
      }
    if (all_zero) return GroupPoint();
    const auto& curve = detail::Curve::get();
    detail::EcPointPtr p(EC_POINT_new(curve.group()));
    if (!p) throw std::runtime_error("EC_POINT_new failed");
    if (EC_POINT_oct2point(curve.group(), p.get(), b.data(), b.size(),
                           detail::tl_bn_ctx()) != 1)
      throw std::invalid_argument("GroupPoint: not a valid curve point");
    return GroupPoint(std::move(p));
  }

  Bytes to_bytes() const {
    Bytes out(kPointBytes, 0);
    if (is_identity()) return out;
    const auto& curve = detail::Curve::get();
    std::size_t n = EC_POINT_point2oct(curve.group(), pt_.get(),
                                       POINT_CONVERSION_COMPRESSED, out.data(),
                                       out.size(), detail::tl_bn_ctx());
    if (n != kPointBytes) throw std::runtime_error("EC_POINT_point2oct failed");
    return out;
  }

  bool is_identity() const {
    return EC_POINT_is_at_infinity(detail::Curve::get().group(), pt_.get()) == 1;
  }

  GroupPoint add(const GroupPoint& o) const {
    op_counters().point_add++;
    const auto& curve = detail::Curve::get();
    detail::EcPointPtr r(EC_POINT_new(curve.group()));
    if (!r) throw std::runtime_error("EC_POINT_new failed");
    if (EC_POINT_add(curve.group(), r.get(), pt_.get(), o.pt_.get(),
                     detail::tl_bn_ctx()) != 1)
      throw std::runtime_error("EC_POINT_add failed");
    return GroupPoint(std::move(r));
  }

  GroupPoint mul(const Scalar& k) const {
    op_counters().point_mul++;
    const auto& curve = detail::Curve::get();
    auto kb = detail::bn_from_be(k.bytes());
    detail::EcPointPtr r(EC_POINT_new(curve.group()));
    if (!r) throw std::runtime_error("EC_POINT_new failed");
    if (EC_POINT_mul(curve.group(), r.get(), nullptr, pt_.get(), kb.get(),
                     detail::tl_bn_ctx()) != 1)
      throw std::runtime_error("EC_POINT_mul failed");
    return GroupPoint(std::move(r));
  }

  static GroupPoint mul_generator(const Scalar& k) {
    op_counters().point_mul++;
    const auto& curve = detail::Curve::get();
    auto kb = detail::bn_from_be(k.bytes());
    detail::EcPointPtr r(EC_POINT_new(curve.group()));
    if (!r) throw std::runtime_error("EC_POINT_new failed");
    if (EC_POINT_mul(curve.group(), r.get(), kb.get(), nullptr, nullptr,
                     detail::tl_bn_ctx()) != 1)
      throw std::runtime_error("EC_POINT_mul failed");
    return GroupPoint(std::move(r));
  }

  bool operator==(const GroupPoint& o) const {
    return EC_POINT_cmp(detail::Curve::get().group(), pt_.get(), o.pt_.get(),
                        detail::tl_bn_ctx()) == 0;
  }
  bool operator!=(const GroupPoint& o) const { return !(*this == o); }

 private:
  explicit GroupPoint(detail::EcPointPtr p) : pt_(std::move(p)) {}

  static std::shared_ptr<EC_POINT> make_identity() {
    const auto& curve = detail::Curve::get();
    detail::EcPointPtr p(EC_POINT_new(curve.group()));
    if (!p || EC_POINT_set_to_infinity(curve.group(), p.get()) != 1)
      throw std::runtime_error("EC_POINT identity failed");
    return std::shared_ptr<EC_POINT>(p.release(), detail::EcPointDeleter{});
  }

  explicit GroupPoint(std::shared_ptr<EC_POINT> p) : pt_(std::move(p)) {}

  // Immutable after construction; copies share the underlying point.
  std::shared_ptr<EC_POINT> pt_;
};

struct KeyPair {
  Scalar sk;
  GroupPoint pk;
};

// sk uniform in Z_q*, pk = sk * P.
inline KeyPair keygen(Rng& rng) {
  Scalar sk = Scalar::random_nonzero(rng);
  return KeyPair{sk, GroupPoint::mul_generator(sk)};
}

}  // namespace rsms
