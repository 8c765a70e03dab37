#pragma once

#include <filesystem>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

#include "encpol/messages.hpp"
#include "encpol/policy.hpp"
#include "encpol/random.hpp"
#include "encpol/searchable.hpp"
#include "encpol/token.hpp"

namespace encpol {

class DuplicateUserError : public std::invalid_argument {
 public:
  explicit DuplicateUserError(std::string_view user_id)
      : std::invalid_argument("user \"" + std::string(user_id) +
                              "\" already has issued keys") {}
};

/// The trusted key authority. Owns the master secret, issues split key
/// pairs and remembers which ids it has issued (never the keys themselves).
/// The caller delivers each UserKey to its user and each ServerKey to the
/// provider's key store.
class KeyAuthority {
 public:
  static KeyAuthority initialise(const SecurityProfile& profile, Rng& rng);

  /// Throws DuplicateUserError when the id was issued before.
  std::pair<UserKey, ServerKey> register_user(std::string_view user_id, Rng& rng);

  const SystemParams& params() const { return params_; }
  const MasterSecret& master_secret() const { return msk_; }
  const std::set<std::string, std::less<>>& issued() const { return issued_; }

  void save(const std::filesystem::path& file) const;
  static KeyAuthority load(const std::filesystem::path& file);

 private:
  KeyAuthority() = default;

  SystemParams params_;
  MasterSecret msk_;
  std::set<std::string, std::less<>> issued_;
};

/// Encrypts every leaf token of a compiled condition tree with fresh
/// randomness; gates pass through untouched, so the encrypted tree has
/// exactly the plaintext tree's shape.
ClientTree encrypt_condition(const SystemParams& params, const UserKey& key,
                             const ConditionTree& tree, Rng& rng);

/// Encrypts the three tuple items, in subject/action/target order.
std::array<ClientCiphertext, 3> encrypt_sat(const SystemParams& params,
                                            const UserKey& key,
                                            const SatTuple& sat, Rng& rng);

/// Admin-side policy deployment payload: encrypted tuple plus encrypted
/// condition tree.
EncryptedPolicyBundle encrypt_policy(const SystemParams& params, const UserKey& key,
                                     const SatTuple& sat, const ConditionTree& tree,
                                     Rng& rng);

/// Requester-side query: one trapdoor per tuple item.
EncryptedRequest encrypt_request(const SystemParams& params, const UserKey& key,
                                 const SatTuple& sat, Rng& rng);

/// Attribute-source side: expands the assignment to its token set and
/// produces one trapdoor per token.
EncryptedAttributes encrypt_attributes(const SystemParams& params, const UserKey& key,
                                       const AttributeAssignment& attrs, Rng& rng);

}  // namespace encpol
