#include "encpol/searchable.hpp"

#include <stdexcept>

namespace encpol {

namespace {

const Bignum kOne(1);
const Bignum kTwo(2);

Bignum generate_group_modulus(int p_bits, const Bignum& q) {
  // p = 2q*t + 1 keeps candidates odd and guarantees q | p-1.
  Bignum two_q = q.mul(kTwo);
  return Bignum::generate_prime(p_bits, &two_q);
}

Bignum find_generator(const Bignum& p, const Bignum& q, Rng& rng) {
  // Any a^((p-1)/q) != 1 has order exactly q, since q is prime.
  Bignum cofactor = p.sub(kOne).div_exact(q);
  for (;;) {
    Bignum a = rng.exponent(p.sub(kOne)).add(kOne);  // [2, p-1]
    Bignum g = a.mod_exp(cofactor, p);
    if (!g.is_one() && !g.is_zero()) return g;
  }
}

}  // namespace

std::vector<std::uint8_t> SystemParams::encode_element(const Bignum& e) const {
  return e.mod(p).to_bytes(element_width());
}

bool SystemParams::element_in_group(const Bignum& e) const {
  if (e.is_zero() || !(e < p)) return false;
  return e.mod_exp(q, p).is_one();
}

namespace {

void validate_group(const Bignum& p, const Bignum& q, const Bignum& g) {
  if (!p.is_prime()) throw std::invalid_argument("p is not prime");
  if (!q.is_prime()) throw std::invalid_argument("q is not prime");
  if (!q.divides(p.sub(kOne)))
    throw std::invalid_argument("q does not divide p-1");
  if (g.is_zero() || g.is_one() || !(g < p))
    throw std::invalid_argument("generator out of range");
  if (!g.mod_exp(q, p).is_one())
    throw std::invalid_argument("generator does not have order q");
}

}  // namespace

void validate_params(const SystemParams& params) {
  validate_group(params.p, params.q, params.g);
  if (!params.element_in_group(params.h))
    throw std::invalid_argument("h is not in the order-q subgroup");
  hash_digest_size(params.hash_id);  // both ids must be registered
}

std::pair<SystemParams, MasterSecret> setup(const SecurityProfile& profile, Rng& rng) {
  SystemParams params;
  if (profile.injected) {
    params.p = profile.injected->p;
    params.q = profile.injected->q;
    params.g = profile.injected->g;
    validate_group(params.p, params.q, params.g);
  } else {
    if (profile.q_bits < 3 || profile.p_bits <= profile.q_bits + 1)
      throw std::invalid_argument("unusable bit lengths");
    params.q = Bignum::generate_prime(profile.q_bits);
    params.p = generate_group_modulus(profile.p_bits, params.q);
    params.g = find_generator(params.p, params.q, rng);
  }

  MasterSecret msk;
  msk.x = rng.exponent(params.q);
  msk.prf_key = rng.bytes(kPrfKeyBytes);
  params.h = params.g.mod_exp(msk.x, params.p);

  validate_params(params);
  return {std::move(params), std::move(msk)};
}

std::pair<UserKey, ServerKey> issue_keys(const SystemParams& params,
                                         const MasterSecret& msk,
                                         std::string_view user_id, Rng& rng) {
  UserKey uk;
  uk.user_id = std::string(user_id);
  uk.x1 = rng.exponent(params.q);
  uk.prf_key = msk.prf_key;

  ServerKey sk;
  sk.user_id = std::string(user_id);
  sk.x2 = msk.x.mod_sub(uk.x1, params.q);
  return {std::move(uk), std::move(sk)};
}

Bignum token_exponent(const SystemParams& params,
                      std::span<const std::uint8_t> prf_key, const Token& token) {
  const std::string& text = token.text();
  Digest image = prf_bytes(params.prf_id, prf_key,
                           std::span(reinterpret_cast<const std::uint8_t*>(text.data()),
                                     text.size()));
  Bignum q_minus_one = params.q.sub(kOne);
  return Bignum::from_bytes(image).mod(q_minus_one).add(kOne);
}

ClientCiphertext encrypt_token(const SystemParams& params, const UserKey& key,
                               const Token& token, Rng& rng) {
  Bignum sigma = token_exponent(params, key.prf_key, token);
  Bignum r = rng.exponent(params.q);

  ClientCiphertext ct;
  ct.c1 = params.g.mod_exp(r.mod_add(sigma, params.q), params.p);
  ct.c2 = ct.c1.mod_exp(key.x1, params.p);
  ct.c3 = hash_bytes(params.hash_id,
                     params.encode_element(params.h.mod_exp(r, params.p)));
  return ct;
}

ServerCiphertext reencrypt_token(const SystemParams& params, const ServerKey& key,
                                 const ClientCiphertext& ct) {
  ServerCiphertext out;
  out.c1 = ct.c1.mod_exp(key.x2, params.p).mod_mul(ct.c2, params.p);
  out.c2 = ct.c3;
  return out;
}

Trapdoor make_trapdoor(const SystemParams& params, const UserKey& key,
                       const Token& token, Rng& rng) {
  Bignum sigma = token_exponent(params, key.prf_key, token);
  Bignum r = rng.exponent(params.q);

  Trapdoor td;
  td.t1 = params.g.mod_exp(sigma.mod_sub(r, params.q), params.p);
  // t2 = h^{r'} * g^{-x1 r'} * g^{x1 sigma}; only the user's own share and
  // the public h appear, never the provider's share.
  Bignum neg = Bignum().mod_sub(key.x1.mod_mul(r, params.q), params.q);
  td.t2 = params.h.mod_exp(r, params.p)
              .mod_mul(params.g.mod_exp(neg, params.p), params.p)
              .mod_mul(params.g.mod_exp(key.x1.mod_mul(sigma, params.q), params.p),
                       params.p);
  return td;
}

Bignum combine_trapdoor(const SystemParams& params, const ServerKey& key,
                        const Trapdoor& trapdoor) {
  return trapdoor.t1.mod_exp(key.x2, params.p).mod_mul(trapdoor.t2, params.p);
}

bool match_token(const SystemParams& params, const ServerCiphertext& ct,
                 const Bignum& combined) {
  return match_token_inv(params, ct, combined.mod_inverse(params.p));
}

bool match_token_inv(const SystemParams& params, const ServerCiphertext& ct,
                     const Bignum& combined_inverse) {
  Bignum masked = ct.c1.mod_mul(combined_inverse, params.p);
  return ct.c2 == hash_bytes(params.hash_id, params.encode_element(masked));
}

}  // namespace encpol
