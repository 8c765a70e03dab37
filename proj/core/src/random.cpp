#include "encpol/random.hpp"

#include <openssl/rand.h>

#include <cstring>
#include <stdexcept>

#include "encpol/hashing.hpp"

namespace encpol {

std::vector<std::uint8_t> Rng::bytes(std::size_t n) {
  std::vector<std::uint8_t> out(n);
  fill(out);
  return out;
}

Bignum Rng::exponent(const Bignum& q) {
  // Uniform in [1, q-1]: sample [0, q-2] by rejection, then shift by one.
  Bignum bound = q.sub(Bignum(1));
  if (bound.is_zero() || bound.is_one())
    throw std::invalid_argument("modulus too small for a nonzero exponent");
  const int bits = bound.bit_length();
  const std::size_t width = (static_cast<std::size_t>(bits) + 7) / 8;
  const std::uint8_t top_mask =
      static_cast<std::uint8_t>(0xff >> ((8 - bits % 8) % 8));
  std::vector<std::uint8_t> buf(width);
  for (;;) {
    fill(buf);
    buf[0] &= top_mask;
    Bignum candidate = Bignum::from_bytes(buf);
    if (candidate < bound) return candidate.add(Bignum(1));
  }
}

void SystemRng::fill(std::span<std::uint8_t> out) {
  if (RAND_bytes(out.data(), static_cast<int>(out.size())) != 1)
    throw std::runtime_error("RAND_bytes failed");
}

SeededRng::SeededRng(std::uint64_t seed) {
  seed_.resize(8);
  for (int i = 0; i < 8; ++i)
    seed_[i] = static_cast<std::uint8_t>(seed >> (56 - 8 * i));
}

SeededRng::SeededRng(std::span<const std::uint8_t> seed)
    : seed_(seed.begin(), seed.end()) {}

void SeededRng::refill() {
  std::uint8_t ctr[8];
  for (int i = 0; i < 8; ++i)
    ctr[i] = static_cast<std::uint8_t>(counter_ >> (56 - 8 * i));
  ++counter_;
  block_ = prf_bytes(kDefaultPrfId, seed_, ctr);
  offset_ = 0;
}

void SeededRng::fill(std::span<std::uint8_t> out) {
  std::size_t written = 0;
  while (written < out.size()) {
    if (offset_ >= block_.size()) refill();
    std::size_t n = std::min(out.size() - written, block_.size() - offset_);
    std::memcpy(out.data() + written, block_.data() + offset_, n);
    written += n;
    offset_ += n;
  }
}

}  // namespace encpol
