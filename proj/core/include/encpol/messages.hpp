#pragma once

#include <array>
#include <string>
#include <vector>

#include "encpol/policy.hpp"
#include "encpol/searchable.hpp"

namespace encpol {

/// Condition tree as produced in the trusted domain: gate structure in the
/// clear, every leaf token replaced by a client ciphertext.
using ClientTree = CondNode<ClientCiphertext>;

/// Condition tree as held by the provider after re-encryption.
using StoredTree = CondNode<ServerCiphertext>;

/// Everything an admin sends to the provider to deploy one policy.
struct EncryptedPolicyBundle {
  std::string admin_id;
  std::array<ClientCiphertext, 3> sat;  // subject, action, target
  ClientTree condition;
};

/// A requester's encrypted subject/action/target query.
struct EncryptedRequest {
  std::string requester_id;
  std::array<Trapdoor, 3> sat;
};

/// Contextual attributes encrypted by the attribute source, one trapdoor
/// per expanded token.
struct EncryptedAttributes {
  std::string pip_id;
  std::vector<Trapdoor> trapdoors;
};

}  // namespace encpol
