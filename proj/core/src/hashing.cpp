#include "encpol/hashing.hpp"

#include <openssl/evp.h>

#include <stdexcept>

namespace encpol {

namespace {

[[noreturn]] void unknown_id(std::string_view kind, std::string_view id) {
  throw std::invalid_argument("unknown " + std::string(kind) + " id \"" +
                              std::string(id) + "\"");
}

}  // namespace

Digest hash_bytes(std::string_view hash_id, std::span<const std::uint8_t> data) {
  if (hash_id != kDefaultHashId) unknown_id("hash", hash_id);
  Digest out(EVP_MAX_MD_SIZE);
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("EVP_Digest failed");
  out.resize(len);
  return out;
}

Digest prf_bytes(std::string_view prf_id, std::span<const std::uint8_t> key,
                 std::span<const std::uint8_t> data) {
  if (prf_id != kDefaultPrfId) unknown_id("prf", prf_id);
  Digest out(EVP_MAX_MD_SIZE);
  std::size_t len = 0;
  if (EVP_Q_mac(nullptr, "HMAC", nullptr, "SHA256", nullptr, key.data(), key.size(),
                data.data(), data.size(), out.data(), out.size(), &len) == nullptr)
    throw std::runtime_error("EVP_Q_mac failed");
  out.resize(len);
  return out;
}

std::size_t hash_digest_size(std::string_view hash_id) {
  if (hash_id != kDefaultHashId) unknown_id("hash", hash_id);
  return 32;
}

}  // namespace encpol
