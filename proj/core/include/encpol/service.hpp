#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "encpol/messages.hpp"
#include "encpol/searchable.hpp"

namespace encpol {

/// The provider-side components. Nothing in this header (or behind it)
/// touches a UserKey, a MasterSecret or a plaintext token: the provider
/// works exclusively on re-encrypted ciphertexts, trapdoors and its own
/// key shares.

class UnknownPrincipalError : public std::runtime_error {
 public:
  explicit UnknownPrincipalError(std::string_view user_id)
      : std::runtime_error("principal \"" + std::string(user_id) +
                           "\" is revoked or unknown") {}
};

class DuplicateKeyError : public std::runtime_error {
 public:
  explicit DuplicateKeyError(std::string_view user_id)
      : std::runtime_error("key store already holds a key for \"" +
                           std::string(user_id) + "\"") {}
};

/// One stored policy: re-encrypted tuple plus re-encrypted condition tree.
struct PolicyRecord {
  std::uint64_t policy_id = 0;
  std::string admin_id;
  std::array<ServerCiphertext, 3> sat;
  StoredTree condition;
};

enum class Outcome { Permit, Deny, Rejected };

std::string_view to_string(Outcome outcome);

struct Decision {
  Outcome outcome = Outcome::Deny;
  std::optional<std::uint64_t> policy_id;  // engaged iff Permit
  std::string reason;                      // non-empty iff Rejected

  static Decision permit(std::uint64_t policy_id);
  static Decision deny();
  static Decision rejected(std::string reason);
};

/// userId -> provider key share. Persists as an append-only log of
/// server-key and revoke records; reload replays the log. Readers may run
/// concurrently; mutations are serialized.
class KeyStore {
 public:
  /// In-memory only when `file` is empty; otherwise loads the existing log
  /// and appends on every mutation.
  explicit KeyStore(const SystemParams& params, std::filesystem::path file = {});

  bool contains(std::string_view user_id) const;
  std::optional<ServerKey> find(std::string_view user_id) const;
  std::size_t size() const;

  /// Throws DuplicateKeyError when the user already has a key.
  void insert(const ServerKey& key);
  /// Removes the user's key; returns false (a no-op) when absent.
  bool erase(std::string_view user_id);

 private:
  void append_insert(const ServerKey& key);
  void append_erase(std::string_view user_id);

  SystemParams params_;
  std::filesystem::path file_;
  std::map<std::string, ServerKey, std::less<>> keys_;
  mutable std::shared_mutex mutex_;
};

/// Append-only policy log; policy ids are assigned in increasing deployment
/// order starting at 1 and records are never removed.
class PolicyStore {
 public:
  explicit PolicyStore(const SystemParams& params, std::filesystem::path file = {});

  std::uint64_t append(PolicyRecord record);  // returns the assigned id
  std::size_t size() const;
  const PolicyRecord& record(std::size_t index) const;  // deployment order

 private:
  SystemParams params_;
  std::filesystem::path file_;
  std::deque<PolicyRecord> records_;
  std::uint64_t next_id_ = 1;
  mutable std::shared_mutex mutex_;
};

/// Provider component performing key management actions and the second
/// encryption round on deployed policies.
class AdministrationPoint {
 public:
  AdministrationPoint(const SystemParams& params, KeyStore& keys, PolicyStore& policies);

  /// Installs a key share delivered by the key authority.
  void admit(const ServerKey& key);

  /// Re-encrypts the bundle with the admin's key share and persists it.
  /// Throws UnknownPrincipalError when the admin has no stored key.
  std::uint64_t deploy(const EncryptedPolicyBundle& bundle);

  /// Drops the user's key share. Existing policies are untouched and stay
  /// evaluable. Returns false when the user was not present.
  bool revoke(std::string_view user_id);

 private:
  SystemParams params_;
  KeyStore& keys_;
  PolicyStore& policies_;
};

/// Evaluates encrypted requests against the policy store.
class DecisionPoint {
 public:
  DecisionPoint(const SystemParams& params, const KeyStore& keys,
                const PolicyStore& policies);

  /// Records whose stored tuple matches the request on all three positions.
  /// Trapdoors are combined once and reused across records.
  std::vector<const PolicyRecord*> sat_search(const EncryptedRequest& request) const;

  /// Threshold-gate evaluation of one record's condition tree against the
  /// attribute trapdoors (each combined once, then trial-matched against
  /// every leaf). Never returns Rejected.
  Decision evaluate_condition(const EncryptedAttributes& attrs,
                              const PolicyRecord& record) const;

 private:
  SystemParams params_;
  const KeyStore& keys_;
  const PolicyStore& policies_;
};

/// Deny-by-default orchestration: revocation checks, tuple search, then
/// condition evaluation in deployment order with the first Permit winning.
class EnforcementPoint {
 public:
  EnforcementPoint(const SystemParams& params, const KeyStore& keys,
                   const PolicyStore& policies);

  Decision handle(const EncryptedRequest& request,
                  const EncryptedAttributes& attrs) const;

 private:
  SystemParams params_;
  const KeyStore& keys_;
  DecisionPoint pdp_;
};

}  // namespace encpol
