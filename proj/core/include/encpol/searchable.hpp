#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "encpol/bignum.hpp"
#include "encpol/hashing.hpp"
#include "encpol/random.hpp"
#include "encpol/token.hpp"

namespace encpol {

/// Multi-user searchable encryption over a prime-order subgroup of Z_p*.
///
/// Every user i holds an exponent share x1; the provider holds the matching
/// share x2 with x1 + x2 = x (mod q). A token encrypted by any user and
/// re-encrypted by the provider becomes comparable, via trapdoors, with
/// queries issued by any other user -- without the provider learning the
/// token, and without users sharing per-pair keys.

/// Group parameters to generate, or a fixed injected group for tests.
struct SecurityProfile {
  int p_bits = 2048;
  int q_bits = 256;

  struct Injected {
    Bignum p, q, g;
  };
  std::optional<Injected> injected;

  static SecurityProfile production() { return {}; }
  static SecurityProfile bit_lengths(int p_bits, int q_bits) {
    SecurityProfile sp;
    sp.p_bits = p_bits;
    sp.q_bits = q_bits;
    return sp;
  }
  static SecurityProfile injected_group(Bignum p, Bignum q, Bignum g) {
    SecurityProfile sp;
    sp.injected = Injected{std::move(p), std::move(q), std::move(g)};
    return sp;
  }
};

/// Public parameters: modulus p, subgroup order q, generator g, h = g^x,
/// plus identifiers of the hash and keyed PRF in use.
struct SystemParams {
  Bignum p;
  Bignum q;
  Bignum g;
  Bignum h;
  std::string hash_id{kDefaultHashId};
  std::string prf_id{kDefaultPrfId};

  /// Width of the canonical element encoding (the byte length of p).
  std::size_t element_width() const { return p.byte_length(); }

  /// Fixed-width big-endian encoding of the representative in [0, p-1].
  /// This is the exact byte string fed to the hash.
  std::vector<std::uint8_t> encode_element(const Bignum& e) const;

  /// True iff e is in the order-q subgroup (e in (0, p) and e^q = 1 mod p).
  bool element_in_group(const Bignum& e) const;
};

struct MasterSecret {
  Bignum x;                          // h = g^x
  std::vector<std::uint8_t> prf_key;  // key s shared by all issued user keys
};

struct UserKey {
  std::string user_id;
  Bignum x1;
  std::vector<std::uint8_t> prf_key;
};

struct ServerKey {
  std::string user_id;
  Bignum x2;  // x - x1 mod q
};

/// Client-side encryption of one token: (g^{r+sigma}, c1^{x1}, H(h^r)).
struct ClientCiphertext {
  Bignum c1;
  Bignum c2;
  Digest c3;

  bool operator==(const ClientCiphertext&) const = default;
};

/// Provider-side completed form: (h^{r+sigma}, H(h^r)).
struct ServerCiphertext {
  Bignum c1;
  Digest c2;

  bool operator==(const ServerCiphertext&) const = default;
};

/// Query-side encryption of one token: (g^{sigma-r'}, g^{x2 r' + x1 sigma}).
struct Trapdoor {
  Bignum t1;
  Bignum t2;

  bool operator==(const Trapdoor&) const = default;
};

/// Checks every group invariant (p, q prime; q | p-1; g of order q; h in
/// the subgroup). Throws std::invalid_argument on the first violation.
void validate_params(const SystemParams& params);

/// Generates (or validates and adopts) the group, draws the master exponent
/// x uniformly from [1, q-1] and a fresh PRF key.
std::pair<SystemParams, MasterSecret> setup(const SecurityProfile& profile, Rng& rng);

/// Splits the master exponent for one user: x1 uniform in [1, q-1],
/// x2 = x - x1 mod q. Caller is responsible for user-id freshness.
std::pair<UserKey, ServerKey> issue_keys(const SystemParams& params,
                                         const MasterSecret& msk,
                                         std::string_view user_id, Rng& rng);

/// sigma = PRF_s(token) reduced mod (q-1), plus 1: a deterministic secret
/// exponent in [1, q-1].
Bignum token_exponent(const SystemParams& params,
                      std::span<const std::uint8_t> prf_key, const Token& token);

ClientCiphertext encrypt_token(const SystemParams& params, const UserKey& key,
                               const Token& token, Rng& rng);

/// Completes a client ciphertext with the provider's key share:
/// c1 = c1hat^{x2} * c2hat = h^{r+sigma}. A mismatched share silently
/// yields a ciphertext that never matches.
ServerCiphertext reencrypt_token(const SystemParams& params, const ServerKey& key,
                                 const ClientCiphertext& ct);

Trapdoor make_trapdoor(const SystemParams& params, const UserKey& key,
                       const Token& token, Rng& rng);

/// T = t1^{x2} * t2 = g^{x sigma}; identical for every trapdoor of the same
/// token regardless of issuer or query randomness.
Bignum combine_trapdoor(const SystemParams& params, const ServerKey& key,
                        const Trapdoor& trapdoor);

/// True iff c2 = H(c1 * T^{-1}), i.e. the stored token equals the queried one.
bool match_token(const SystemParams& params, const ServerCiphertext& ct,
                 const Bignum& combined);

/// match_token with the inverse precomputed (for loops over many ciphertexts).
bool match_token_inv(const SystemParams& params, const ServerCiphertext& ct,
                     const Bignum& combined_inverse);

}  // namespace encpol
