#pragma once

#include <compare>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

typedef struct bignum_st BIGNUM;

namespace encpol {

/// Value-semantic arbitrary-precision unsigned integer backed by OpenSSL.
///
/// All values handled here are non-negative residues; modular helpers reduce
/// their results into [0, m). Instances are cheap to move and safe to use
/// from multiple threads as long as each thread works on its own copies.
class Bignum {
 public:
  Bignum();
  explicit Bignum(std::uint64_t value);
  Bignum(const Bignum& other);
  Bignum(Bignum&& other) noexcept = default;
  Bignum& operator=(const Bignum& other);
  Bignum& operator=(Bignum&& other) noexcept = default;
  ~Bignum() = default;

  /// Parses a (case-insensitive) hex string. Throws std::invalid_argument.
  static Bignum from_hex(const std::string& hex);
  /// Big-endian bytes to value.
  static Bignum from_bytes(std::span<const std::uint8_t> bytes);

  /// Lowercase hex, no leading zeros ("0" for zero).
  std::string to_hex() const;
  /// Lowercase hex zero-padded to exactly `width` bytes worth of digits.
  /// Throws std::length_error if the value does not fit.
  std::string to_hex_padded(std::size_t width) const;
  /// Fixed-width big-endian encoding. Throws std::length_error if too wide.
  std::vector<std::uint8_t> to_bytes(std::size_t width) const;

  std::uint64_t to_u64() const;  // throws std::overflow_error if too large

  int bit_length() const;
  std::size_t byte_length() const;
  bool is_zero() const;
  bool is_one() const;

  bool operator==(const Bignum& rhs) const;
  std::strong_ordering operator<=>(const Bignum& rhs) const;

  Bignum add(const Bignum& rhs) const;
  Bignum sub(const Bignum& rhs) const;  // throws if result would be negative
  Bignum mul(const Bignum& rhs) const;
  Bignum div_exact(const Bignum& rhs) const;  // throws unless rhs divides *this
  Bignum mod(const Bignum& m) const;

  Bignum mod_add(const Bignum& rhs, const Bignum& m) const;
  /// (*this - rhs) mod m, i.e. negative results wrap to the additive inverse.
  Bignum mod_sub(const Bignum& rhs, const Bignum& m) const;
  Bignum mod_mul(const Bignum& rhs, const Bignum& m) const;
  Bignum mod_exp(const Bignum& exponent, const Bignum& m) const;
  Bignum mod_inverse(const Bignum& m) const;  // throws if not invertible

  bool is_prime() const;
  bool divides(const Bignum& value) const;

  /// Random prime of `bits` bits. When `congruent_one_mod` is non-null the
  /// prime additionally satisfies p = 1 (mod *congruent_one_mod).
  static Bignum generate_prime(int bits, const Bignum* congruent_one_mod = nullptr);

  const BIGNUM* raw() const { return bn_.get(); }
  BIGNUM* raw() { return bn_.get(); }

 private:
  struct Deleter {
    void operator()(BIGNUM* bn) const;
  };
  std::unique_ptr<BIGNUM, Deleter> bn_;
};

}  // namespace encpol
