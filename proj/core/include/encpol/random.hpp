#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "encpol/bignum.hpp"

namespace encpol {

/// Source of randomness injected into every key-generation and encryption
/// operation. The default implementation draws from the process CSPRNG;
/// SeededRng produces a reproducible stream for replay and golden tests.
class Rng {
 public:
  virtual ~Rng() = default;

  virtual void fill(std::span<std::uint8_t> out) = 0;

  std::vector<std::uint8_t> bytes(std::size_t n);

  /// Uniform value in [1, q-1], by rejection sampling over fill().
  virtual Bignum exponent(const Bignum& q);
};

/// Cryptographically strong randomness (OpenSSL RAND).
class SystemRng final : public Rng {
 public:
  void fill(std::span<std::uint8_t> out) override;
};

/// Deterministic keyed counter stream. Identical seeds yield identical
/// byte streams (and therefore identical exponent sequences) on every
/// platform; intended for tests and reproducible benchmarks, not for
/// production key material.
class SeededRng final : public Rng {
 public:
  explicit SeededRng(std::uint64_t seed);
  explicit SeededRng(std::span<const std::uint8_t> seed);

  void fill(std::span<std::uint8_t> out) override;

 private:
  void refill();

  std::vector<std::uint8_t> seed_;
  std::vector<std::uint8_t> block_;
  std::size_t offset_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace encpol
