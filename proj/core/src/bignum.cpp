#include "encpol/bignum.hpp"

#include <openssl/bn.h>
#include <openssl/err.h>

#include <cctype>
#include <stdexcept>

namespace encpol {

namespace {

[[noreturn]] void throw_openssl(const char* what) {
  throw std::runtime_error(std::string(what) + " (openssl error " +
                           std::to_string(ERR_peek_last_error()) + ")");
}

BN_CTX* ctx() {
  thread_local std::unique_ptr<BN_CTX, decltype(&BN_CTX_free)> c(BN_CTX_new(),
                                                                 BN_CTX_free);
  if (!c) throw_openssl("BN_CTX_new");
  return c.get();
}

BIGNUM* checked_new() {
  BIGNUM* bn = BN_new();
  if (!bn) throw_openssl("BN_new");
  return bn;
}

}  // namespace

void Bignum::Deleter::operator()(BIGNUM* bn) const { BN_clear_free(bn); }

Bignum::Bignum() : bn_(checked_new()) { BN_zero(bn_.get()); }

Bignum::Bignum(std::uint64_t value) : bn_(checked_new()) {
  if (BN_set_word(bn_.get(), value) != 1) throw_openssl("BN_set_word");
}

Bignum::Bignum(const Bignum& other) : bn_(checked_new()) {
  if (!BN_copy(bn_.get(), other.bn_.get())) throw_openssl("BN_copy");
}

Bignum& Bignum::operator=(const Bignum& other) {
  if (this != &other) {
    if (!BN_copy(bn_.get(), other.bn_.get())) throw_openssl("BN_copy");
  }
  return *this;
}

Bignum Bignum::from_hex(const std::string& hex) {
  if (hex.empty()) throw std::invalid_argument("empty hex string");
  for (char c : hex) {
    if (!std::isxdigit(static_cast<unsigned char>(c)))
      throw std::invalid_argument("invalid hex digit in \"" + hex + "\"");
  }
  Bignum out;
  BIGNUM* bn = out.bn_.get();
  if (BN_hex2bn(&bn, hex.c_str()) == 0) throw_openssl("BN_hex2bn");
  return out;
}

Bignum Bignum::from_bytes(std::span<const std::uint8_t> bytes) {
  Bignum out;
  if (!BN_bin2bn(bytes.data(), static_cast<int>(bytes.size()), out.bn_.get()))
    throw_openssl("BN_bin2bn");
  return out;
}

std::string Bignum::to_hex() const {
  char* raw = BN_bn2hex(bn_.get());
  if (!raw) throw_openssl("BN_bn2hex");
  std::string out(raw);
  OPENSSL_free(raw);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  // BN_bn2hex may emit a leading zero nibble; strip to a canonical form.
  while (out.size() > 1 && out.front() == '0') out.erase(out.begin());
  return out;
}

std::string Bignum::to_hex_padded(std::size_t width) const {
  static const char* digits = "0123456789abcdef";
  std::vector<std::uint8_t> bytes = to_bytes(width);
  std::string out;
  out.reserve(bytes.size() * 2);
  for (std::uint8_t b : bytes) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0xf]);
  }
  return out;
}

std::vector<std::uint8_t> Bignum::to_bytes(std::size_t width) const {
  std::vector<std::uint8_t> out(width);
  if (BN_bn2binpad(bn_.get(), out.data(), static_cast<int>(width)) < 0)
    throw std::length_error("value does not fit in " + std::to_string(width) + " bytes");
  return out;
}

std::uint64_t Bignum::to_u64() const {
  if (bit_length() > 64) throw std::overflow_error("value exceeds 64 bits");
  BN_ULONG w = BN_get_word(bn_.get());
  return static_cast<std::uint64_t>(w);
}

int Bignum::bit_length() const { return BN_num_bits(bn_.get()); }

std::size_t Bignum::byte_length() const {
  return static_cast<std::size_t>(BN_num_bytes(bn_.get()));
}

bool Bignum::is_zero() const { return BN_is_zero(bn_.get()); }

bool Bignum::is_one() const { return BN_is_one(bn_.get()); }

bool Bignum::operator==(const Bignum& rhs) const {
  return BN_cmp(bn_.get(), rhs.bn_.get()) == 0;
}

std::strong_ordering Bignum::operator<=>(const Bignum& rhs) const {
  int c = BN_cmp(bn_.get(), rhs.bn_.get());
  if (c < 0) return std::strong_ordering::less;
  if (c > 0) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

Bignum Bignum::add(const Bignum& rhs) const {
  Bignum out;
  if (!BN_add(out.bn_.get(), bn_.get(), rhs.bn_.get())) throw_openssl("BN_add");
  return out;
}

Bignum Bignum::sub(const Bignum& rhs) const {
  if (*this < rhs) throw std::underflow_error("negative subtraction result");
  Bignum out;
  if (!BN_sub(out.bn_.get(), bn_.get(), rhs.bn_.get())) throw_openssl("BN_sub");
  return out;
}

Bignum Bignum::mul(const Bignum& rhs) const {
  Bignum out;
  if (!BN_mul(out.bn_.get(), bn_.get(), rhs.bn_.get(), ctx())) throw_openssl("BN_mul");
  return out;
}

Bignum Bignum::div_exact(const Bignum& rhs) const {
  Bignum quotient;
  Bignum remainder;
  if (!BN_div(quotient.bn_.get(), remainder.bn_.get(), bn_.get(), rhs.bn_.get(), ctx()))
    throw_openssl("BN_div");
  if (!remainder.is_zero()) throw std::invalid_argument("inexact division");
  return quotient;
}

Bignum Bignum::mod(const Bignum& m) const {
  Bignum out;
  if (!BN_nnmod(out.bn_.get(), bn_.get(), m.bn_.get(), ctx())) throw_openssl("BN_nnmod");
  return out;
}

Bignum Bignum::mod_add(const Bignum& rhs, const Bignum& m) const {
  Bignum out;
  if (!BN_mod_add(out.bn_.get(), bn_.get(), rhs.bn_.get(), m.bn_.get(), ctx()))
    throw_openssl("BN_mod_add");
  return out;
}

Bignum Bignum::mod_sub(const Bignum& rhs, const Bignum& m) const {
  Bignum out;
  if (!BN_mod_sub(out.bn_.get(), bn_.get(), rhs.bn_.get(), m.bn_.get(), ctx()))
    throw_openssl("BN_mod_sub");
  return out;
}

Bignum Bignum::mod_mul(const Bignum& rhs, const Bignum& m) const {
  Bignum out;
  if (!BN_mod_mul(out.bn_.get(), bn_.get(), rhs.bn_.get(), m.bn_.get(), ctx()))
    throw_openssl("BN_mod_mul");
  return out;
}

Bignum Bignum::mod_exp(const Bignum& exponent, const Bignum& m) const {
  Bignum out;
  if (!BN_mod_exp(out.bn_.get(), bn_.get(), exponent.bn_.get(), m.bn_.get(), ctx()))
    throw_openssl("BN_mod_exp");
  return out;
}

Bignum Bignum::mod_inverse(const Bignum& m) const {
  Bignum out;
  if (!BN_mod_inverse(out.bn_.get(), bn_.get(), m.bn_.get(), ctx()))
    throw std::invalid_argument("value is not invertible modulo m");
  return out;
}

bool Bignum::is_prime() const {
  int rc = BN_check_prime(bn_.get(), ctx(), nullptr);
  if (rc < 0) throw_openssl("BN_check_prime");
  return rc == 1;
}

bool Bignum::divides(const Bignum& value) const {
  return value.mod(*this).is_zero();
}

Bignum Bignum::generate_prime(int bits, const Bignum* congruent_one_mod) {
  Bignum out;
  const BIGNUM* add = congruent_one_mod ? congruent_one_mod->raw() : nullptr;
  if (!BN_generate_prime_ex(out.bn_.get(), bits, 0, add, nullptr, nullptr))
    throw_openssl("BN_generate_prime_ex");
  return out;
}

}  // namespace encpol
