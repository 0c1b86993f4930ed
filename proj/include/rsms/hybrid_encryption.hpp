#pragma once

#include <openssl/evp.h>

#include <array>
#include <optional>

#include "rsms/bytes.hpp"
#include "rsms/counters.hpp"
#include "rsms/curve.hpp"
#include "rsms/digest.hpp"
#include "rsms/rng.hpp"

namespace rsms {

inline constexpr std::size_t kAeadKeyBytes = 32;
inline constexpr std::size_t kAeadNonceBytes = 12;
inline constexpr std::size_t kAeadTagBytes = 16;

// AES-256-GCM. Decryption returns nullopt on any authentication failure, so
// tampered or wrongly keyed ciphertexts never surface as plaintext.
inline void aead_seal(ByteView key, ByteView nonce, ByteView plaintext,
                      ByteView aad, Bytes& out_ct,
                      std::array<std::uint8_t, kAeadTagBytes>& out_tag) {
  std::unique_ptr<EVP_CIPHER_CTX, decltype(&EVP_CIPHER_CTX_free)> ctx(
      EVP_CIPHER_CTX_new(), EVP_CIPHER_CTX_free);
  if (!ctx) throw std::runtime_error("EVP_CIPHER_CTX_new failed");
  if (EVP_EncryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, key.data(),
                         nonce.data()) != 1)
    throw std::runtime_error("aead_seal: init failed");
  int len = 0;
  if (!aad.empty() &&
      EVP_EncryptUpdate(ctx.get(), nullptr, &len, aad.data(),
                        static_cast<int>(aad.size())) != 1)
    throw std::runtime_error("aead_seal: aad failed");
  out_ct.resize(plaintext.size());
  if (!plaintext.empty() &&
      EVP_EncryptUpdate(ctx.get(), out_ct.data(), &len, plaintext.data(),
                        static_cast<int>(plaintext.size())) != 1)
    throw std::runtime_error("aead_seal: update failed");
  if (EVP_EncryptFinal_ex(ctx.get(), out_ct.data() + out_ct.size(), &len) != 1)
    throw std::runtime_error("aead_seal: final failed");
  if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, kAeadTagBytes,
                          out_tag.data()) != 1)
    throw std::runtime_error("aead_seal: tag failed");
}

inline std::optional<Bytes> aead_open(ByteView key, ByteView nonce,
                                      ByteView ciphertext, ByteView aad,
                                      ByteView tag) {
  std::unique_ptr<EVP_CIPHER_CTX, decltype(&EVP_CIPHER_CTX_free)> ctx(
      EVP_CIPHER_CTX_new(), EVP_CIPHER_CTX_free);
  if (!ctx) throw std::runtime_error("EVP_CIPHER_CTX_new failed");
  if (EVP_DecryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, key.data(),
                         nonce.data()) != 1)
    throw std::runtime_error("aead_open: init failed");
  int len = 0;
  if (!aad.empty() &&
      EVP_DecryptUpdate(ctx.get(), nullptr, &len, aad.data(),
                        static_cast<int>(aad.size())) != 1)
    return std::nullopt;
  Bytes out(ciphertext.size());
  if (!ciphertext.empty() &&
      EVP_DecryptUpdate(ctx.get(), out.data(), &len, ciphertext.data(),
                        static_cast<int>(ciphertext.size())) != 1)
    return std::nullopt;
  if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, kAeadTagBytes,
                          const_cast<std::uint8_t*>(tag.data())) != 1)
    return std::nullopt;
  if (EVP_DecryptFinal_ex(ctx.get(), out.data() + out.size(), &len) != 1)
    return std::nullopt;
  return out;
}

// Enc_PK(m): ephemeral keypair, shared point by scalar multiplication, key
// derivation into an authenticated cipher. Randomized per call; any modified
// field fails authentication at decrypt.
struct HybridCiphertext {
  GroupPoint ephemeral;
  Bytes body;
  std::array<std::uint8_t, kAeadTagBytes> auth_tag{};

  Bytes to_bytes() const {
    Bytes out;
    append(out, ephemeral.to_bytes());
    put_u16(out, static_cast<std::uint16_t>(body.size()));
    append(out, body);
    append(out, ByteView(auth_tag));
    return out;
  }

  static HybridCiphertext from_bytes(ByteView b) {
    ByteReader r(b);
    HybridCiphertext c;
    c.ephemeral = GroupPoint::from_bytes(r.take(kPointBytes));
    std::size_t n = r.u16();
    ByteView body = r.take(n);
    c.body.assign(body.begin(), body.end());
    ByteView tag = r.take(kAeadTagBytes);
    std::copy(tag.begin(), tag.end(), c.auth_tag.begin());
    r.expect_end();
    return c;
  }

  std::size_t wire_size() const { return kPointBytes + 2 + body.size() + kAeadTagBytes; }
};

namespace detail {

inline void derive_hybrid_key(const GroupPoint& shared, const GroupPoint& eph_pk,
                              std::array<std::uint8_t, kAeadKeyBytes>& key,
                              std::array<std::uint8_t, kAeadNonceBytes>& nonce) {
  op_counters().hash_calls++;
  Bytes okm = shake256({str_bytes("rsms-hybrid-v1"), ByteView(shared.to_bytes()),
                        ByteView(eph_pk.to_bytes())},
                       kAeadKeyBytes + kAeadNonceBytes);
  std::copy(okm.begin(), okm.begin() + kAeadKeyBytes, key.begin());
  std::copy(okm.begin() + kAeadKeyBytes, okm.end(), nonce.begin());
}

}  // namespace detail

inline HybridCiphertext pk_encrypt(const GroupPoint& pk, ByteView m, Rng& rng) {
  if (m.empty()) throw std::invalid_argument("pk_encrypt: empty message");
  if (pk.is_identity()) throw std::invalid_argument("pk_encrypt: identity public key");
  KeyPair eph = keygen(rng);
  GroupPoint shared = pk.mul(eph.sk);
  std::array<std::uint8_t, kAeadKeyBytes> key;
  std::array<std::uint8_t, kAeadNonceBytes> nonce;
  detail::derive_hybrid_key(shared, eph.pk, key, nonce);
  HybridCiphertext out;
  out.ephemeral = eph.pk;
  aead_seal(ByteView(key), ByteView(nonce), m, ByteView(eph.pk.to_bytes()),
            out.body, out.auth_tag);
  return out;
}

inline std::optional<Bytes> pk_decrypt(const Scalar& sk, const HybridCiphertext& c) {
  if (c.ephemeral.is_identity()) return std::nullopt;
  GroupPoint shared = c.ephemeral.mul(sk);
  std::array<std::uint8_t, kAeadKeyBytes> key;
  std::array<std::uint8_t, kAeadNonceBytes> nonce;
  detail::derive_hybrid_key(shared, c.ephemeral, key, nonce);
  return aead_open(ByteView(key), ByteView(nonce), ByteView(c.body),
                   ByteView(c.ephemeral.to_bytes()), ByteView(c.auth_tag));
}

}  // namespace rsms
