#include "encpol/service.hpp"

#include <fstream>
#include <mutex>

#include "encpol/serial.hpp"

namespace encpol {

namespace {

std::ofstream open_append(const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::app);
  if (!out) throw std::runtime_error("cannot append to " + file.string());
  return out;
}

}  // namespace

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::Permit: return "PERMIT";
    case Outcome::Deny: return "DENY";
    case Outcome::Rejected: return "REJECTED";
  }
  throw std::logic_error("unreachable");
}

Decision Decision::permit(std::uint64_t policy_id) {
  Decision d;
  d.outcome = Outcome::Permit;
  d.policy_id = policy_id;
  return d;
}

Decision Decision::deny() { return {}; }

Decision Decision::rejected(std::string reason) {
  Decision d;
  d.outcome = Outcome::Rejected;
  d.reason = std::move(reason);
  return d;
}

KeyStore::KeyStore(const SystemParams& params, std::filesystem::path file)
    : params_(params), file_(std::move(file)) {
  if (file_.empty() || !std::filesystem::exists(file_)) return;
  std::ifstream in(file_);
  if (!in) throw std::runtime_error("cannot read " + file_.string());
  // Replay the log: inserts and revocations in original order.
  for (std::string tag = peek_tag(in); !tag.empty(); tag = peek_tag(in)) {
    if (tag == "revoke") {
      keys_.erase(read_revocation(in));
    } else {
      ServerKey key = read_server_key(in);
      std::string id = key.user_id;
      keys_.insert_or_assign(std::move(id), std::move(key));
    }
  }
}

bool KeyStore::contains(std::string_view user_id) const {
  std::shared_lock lock(mutex_);
  return keys_.find(user_id) != keys_.end();
}

std::optional<ServerKey> KeyStore::find(std::string_view user_id) const {
  std::shared_lock lock(mutex_);
  auto it = keys_.find(user_id);
  if (it == keys_.end()) return std::nullopt;
  return it->second;
}

std::size_t KeyStore::size() const {
  std::shared_lock lock(mutex_);
  return keys_.size();
}

void KeyStore::insert(const ServerKey& key) {
  std::unique_lock lock(mutex_);
  if (keys_.find(key.user_id) != keys_.end()) throw DuplicateKeyError(key.user_id);
  keys_.emplace(key.user_id, key);
  if (!file_.empty()) append_insert(key);
}

bool KeyStore::erase(std::string_view user_id) {
  std::unique_lock lock(mutex_);
  auto it = keys_.find(user_id);
  if (it == keys_.end()) return false;
  keys_.erase(it);
  if (!file_.empty()) append_erase(user_id);
  return true;
}

void KeyStore::append_insert(const ServerKey& key) {
  auto out = open_append(file_);
  write_server_key(out, params_, key);
  out << '\n';
}

void KeyStore::append_erase(std::string_view user_id) {
  auto out = open_append(file_);
  write_revocation(out, user_id);
  out << '\n';
}

PolicyStore::PolicyStore(const SystemParams& params, std::filesystem::path file)
    : params_(params), file_(std::move(file)) {
  if (file_.empty() || !std::filesystem::exists(file_)) return;
  std::ifstream in(file_);
  if (!in) throw std::runtime_error("cannot read " + file_.string());
  while (!peek_tag(in).empty()) {
    records_.push_back(read_policy_record(in));
    next_id_ = std::max(next_id_, records_.back().policy_id + 1);
  }
}

std::uint64_t PolicyStore::append(PolicyRecord record) {
  std::unique_lock lock(mutex_);
  record.policy_id = next_id_++;
  if (!file_.empty()) {
    auto out = open_append(file_);
    write_policy_record(out, params_, record);
    out << '\n';
  }
  records_.push_back(std::move(record));
  return records_.back().policy_id;
}

std::size_t PolicyStore::size() const {
  std::shared_lock lock(mutex_);
  return records_.size();
}

const PolicyRecord& PolicyStore::record(std::size_t index) const {
  std::shared_lock lock(mutex_);
  return records_.at(index);
}

AdministrationPoint::AdministrationPoint(const SystemParams& params, KeyStore& keys,
                                         PolicyStore& policies)
    : params_(params), keys_(keys), policies_(policies) {}

void AdministrationPoint::admit(const ServerKey& key) { keys_.insert(key); }

std::uint64_t AdministrationPoint::deploy(const EncryptedPolicyBundle& bundle) {
  std::optional<ServerKey> key = keys_.find(bundle.admin_id);
  if (!key) throw UnknownPrincipalError(bundle.admin_id);

  PolicyRecord record;
  record.admin_id = bundle.admin_id;
  for (std::size_t i = 0; i < bundle.sat.size(); ++i)
    record.sat[i] = reencrypt_token(params_, *key, bundle.sat[i]);
  record.condition = map_leaves(bundle.condition, [&](const ClientCiphertext& ct) {
    return reencrypt_token(params_, *key, ct);
  });
  return policies_.append(std::move(record));
}

bool AdministrationPoint::revoke(std::string_view user_id) {
  return keys_.erase(user_id);
}

DecisionPoint::DecisionPoint(const SystemParams& params, const KeyStore& keys,
                             const PolicyStore& policies)
    : params_(params), keys_(keys), policies_(policies) {}

std::vector<const PolicyRecord*> DecisionPoint::sat_search(
    const EncryptedRequest& request) const {
  std::optional<ServerKey> key = keys_.find(request.requester_id);
  if (!key) throw UnknownPrincipalError(request.requester_id);

  // Combine (and invert) each trapdoor once; reuse across all records.
  std::array<Bignum, 3> inverses;
  for (std::size_t i = 0; i < 3; ++i)
    inverses[i] =
        combine_trapdoor(params_, *key, request.sat[i]).mod_inverse(params_.p);

  std::vector<const PolicyRecord*> matches;
  for (std::size_t r = 0; r < policies_.size(); ++r) {
    const PolicyRecord& record = policies_.record(r);
    bool all = true;
    for (std::size_t i = 0; i < 3 && all; ++i)
      all = match_token_inv(params_, record.sat[i], inverses[i]);
    if (all) matches.push_back(&record);
  }
  return matches;
}

namespace {

bool tree_satisfied(const SystemParams& params, const StoredTree& node,
                    const std::vector<Bignum>& combined_inverses) {
  if (node.is_leaf()) {
    for (const Bignum& inverse : combined_inverses) {
      if (match_token_inv(params, *node.leaf, inverse)) return true;
    }
    return false;
  }
  unsigned satisfied = 0;
  for (const auto& child : node.children) {
    if (tree_satisfied(params, child, combined_inverses)) ++satisfied;
    if (satisfied >= node.threshold) return true;
  }
  return false;
}

}  // namespace

Decision DecisionPoint::evaluate_condition(const EncryptedAttributes& attrs,
                                           const PolicyRecord& record) const {
  std::optional<ServerKey> key = keys_.find(attrs.pip_id);
  if (!key) throw UnknownPrincipalError(attrs.pip_id);

  std::vector<Bignum> inverses;
  inverses.reserve(attrs.trapdoors.size());
  for (const Trapdoor& td : attrs.trapdoors)
    inverses.push_back(combine_trapdoor(params_, *key, td).mod_inverse(params_.p));

  if (tree_satisfied(params_, record.condition, inverses))
    return Decision::permit(record.policy_id);
  return Decision::deny();
}

EnforcementPoint::EnforcementPoint(const SystemParams& params, const KeyStore& keys,
                                   const PolicyStore& policies)
    : params_(params), keys_(keys), pdp_(params, keys, policies) {}

Decision EnforcementPoint::handle(const EncryptedRequest& request,
                                  const EncryptedAttributes& attrs) const {
  if (!keys_.contains(request.requester_id))
    return Decision::rejected("requester \"" + request.requester_id +
                              "\" is revoked or unknown");
  if (!keys_.contains(attrs.pip_id))
    return Decision::rejected("attribute source \"" + attrs.pip_id +
                              "\" is revoked or unknown");

  for (const PolicyRecord* record : pdp_.sat_search(request)) {
    Decision d = pdp_.evaluate_condition(attrs, *record);
    if (d.outcome == Outcome::Permit) return d;
  }
  return Decision::deny();
}

}  // namespace encpol
