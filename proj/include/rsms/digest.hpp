#pragma once

#include <openssl/evp.h>

#include <memory>
#include <stdexcept>

#include "rsms/bytes.hpp"

namespace rsms {

namespace detail {

struct MdCtxDeleter {
  void operator()(EVP_MD_CTX* c) const { EVP_MD_CTX_free(c); }
};
using MdCtxPtr = std::unique_ptr<EVP_MD_CTX, MdCtxDeleter>;

inline MdCtxPtr new_md_ctx() {
  MdCtxPtr ctx(EVP_MD_CTX_new());
  if (!ctx) throw std::runtime_error("EVP_MD_CTX_new failed");
  return ctx;
}

}  // namespace detail

inline constexpr std::size_t kSha256Bytes = 32;

inline Bytes sha256(std::initializer_list<ByteView> inputs) {
  auto ctx = detail::new_md_ctx();
  if (EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 init failed");
  for (ByteView in : inputs)
    if (EVP_DigestUpdate(ctx.get(), in.data(), in.size()) != 1)
      throw std::runtime_error("sha256 update failed");
  Bytes out(kSha256Bytes);
  unsigned int len = 0;
  if (EVP_DigestFinal_ex(ctx.get(), out.data(), &len) != 1 || len != kSha256Bytes)
    throw std::runtime_error("sha256 final failed");
  return out;
}

inline Bytes sha256(ByteView input) { return sha256({input}); }

// SHAKE-256 with caller-chosen output length.
inline Bytes shake256(std::initializer_list<ByteView> inputs, std::size_t out_len) {
  auto ctx = detail::new_md_ctx();
  if (EVP_DigestInit_ex(ctx.get(), EVP_shake256(), nullptr) != 1)
    throw std::runtime_error("shake256 init failed");
  for (ByteView in : inputs)
    if (EVP_DigestUpdate(ctx.get(), in.data(), in.size()) != 1)
      throw std::runtime_error("shake256 update failed");
  Bytes out(out_len);
  if (out_len > 0 && EVP_DigestFinalXOF(ctx.get(), out.data(), out_len) != 1)
    throw std::runtime_error("shake256 final failed");
  return out;
}

inline Bytes shake256(ByteView input, std::size_t out_len) {
  return shake256({input}, out_len);
}

}  // namespace rsms
