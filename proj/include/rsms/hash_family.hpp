#pragma once

#include <initializer_list>
#include <optional>
#include <vector>

#include "rsms/bytes.hpp"
#include "rsms/counters.hpp"
#include "rsms/curve.hpp"
#include "rsms/digest.hpp"

namespace rsms {

// One SHA-256 / SHAKE-256 pair, domain-separated by a leading tag byte per
// member. H1 and H6 emit pseudonym-width strings, H2/H4/H5 emit scalars, H3
// is the XOF whose output width follows the payload it masks.
enum class HashTag : std::uint8_t { H1 = 1, H2 = 2, H3 = 3, H4 = 4, H5 = 5, H6 = 6 };

namespace detail {

inline bool tag_returns_scalar(HashTag t) {
  return t == HashTag::H2 || t == HashTag::H4 || t == HashTag::H5;
}

inline Bytes concat_inputs(std::initializer_list<ByteView> inputs) {
  Bytes joined;
  for (ByteView in : inputs) append(joined, in);
  return joined;
}

// Scalar output by rejection resampling: re-hash with an incremented counter
// byte until the digest lands in [1, q-1]. Keeps the range exact instead of
// folding the bias of a plain modular reduction into the output.
inline Scalar digest_to_scalar(HashTag tag, ByteView payload) {
  std::uint8_t prefix[2] = {static_cast<std::uint8_t>(tag), 0};
  for (int ctr = 0; ctr < 256; ++ctr) {
    prefix[1] = static_cast<std::uint8_t>(ctr);
    Bytes d = sha256({ByteView(prefix, 2), payload});
    auto s = Scalar::try_from_bytes(d);
    if (s && !s->is_zero()) return *s;
  }
  throw std::runtime_error("hash: scalar rejection sampling exhausted");
}

}  // namespace detail

// Generic entry point. out_len is only meaningful for H3 (the XOF member);
// requesting it on any other tag is a caller error.
inline Bytes hash_bytes(HashTag tag, std::initializer_list<ByteView> inputs,
                        std::optional<std::size_t> out_len = std::nullopt) {
  if (inputs.size() == 0) throw std::invalid_argument("hash: empty input list");
  if (out_len && tag != HashTag::H3)
    throw std::invalid_argument("hash: out_len only valid for H3");
  op_counters().hash_calls++;
  Bytes payload = detail::concat_inputs(inputs);
  std::uint8_t tag_byte = static_cast<std::uint8_t>(tag);
  switch (tag) {
    case HashTag::H1:
    case HashTag::H6: {
      Bytes d = sha256({ByteView(&tag_byte, 1), ByteView(payload)});
      d.resize(kPidBytes);
      return d;
    }
    case HashTag::H3: {
      std::size_t n = out_len.value_or(kScalarBytes);
      return shake256({ByteView(&tag_byte, 1), ByteView(payload)}, n);
    }
    case HashTag::H2:
    case HashTag::H4:
    case HashTag::H5:
      return detail::digest_to_scalar(tag, payload).to_bytes();
  }
  throw std::invalid_argument("hash: unknown tag");
}

inline Scalar hash_scalar(HashTag tag, std::initializer_list<ByteView> inputs) {
  if (!detail::tag_returns_scalar(tag))
    throw std::invalid_argument("hash: tag does not return a scalar");
  return Scalar::from_bytes(hash_bytes(tag, inputs));
}

// --- typed members, in protocol vocabulary ---

// H1(PK_pub): the fixed pseudonym base XORed with real identities.
inline Bytes h1_pid_base(const GroupPoint& pk_pub) {
  return hash_bytes(HashTag::H1, {ByteView(pk_pub.to_bytes())});
}

inline Scalar h2(std::initializer_list<ByteView> inputs) {
  return hash_scalar(HashTag::H2, inputs);
}

inline Scalar h2_of_point_id(ByteView pid) { return h2({pid}); }

// H3(point, id) truncated/extended to the masked payload width.
inline Bytes h3_mask(const GroupPoint& p, ByteView id, std::size_t out_len) {
  return hash_bytes(HashTag::H3, {ByteView(p.to_bytes()), id}, out_len);
}

// H3 over a single point, used for the pairwise share masking.
inline Bytes h3_point_mask(const GroupPoint& p, std::size_t out_len) {
  return hash_bytes(HashTag::H3, {ByteView(p.to_bytes())}, out_len);
}

// H4(a): credential digest stored on the ledger.
inline Scalar h4_digest(const Scalar& a) {
  return hash_scalar(HashTag::H4, {ByteView(a.bytes())});
}

// H4(a, sk): next credential secret in the chain.
inline Scalar h4_chain(const Scalar& a, const Scalar& sk) {
  return hash_scalar(HashTag::H4, {ByteView(a.bytes()), ByteView(sk.bytes())});
}

// H5(Q, PK_pub): key-update delta multiplier.
inline Scalar h5_update_delta(const GroupPoint& q, const GroupPoint& pk_pub) {
  return hash_scalar(HashTag::H5, {ByteView(q.to_bytes()), ByteView(pk_pub.to_bytes())});
}

// H6(PID_k, a_{k+1}): next pseudonym in the chain.
inline Bytes h6_next_pid(ByteView pid, const Scalar& a_next) {
  return hash_bytes(HashTag::H6, {pid, ByteView(a_next.bytes())});
}

}  // namespace rsms
