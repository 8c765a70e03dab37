#include "encpol/clients.hpp"

#include <fstream>
#include <sstream>

#include "encpol/serial.hpp"

namespace encpol {

KeyAuthority KeyAuthority::initialise(const SecurityProfile& profile, Rng& rng) {
  KeyAuthority kma;
  auto [params, msk] = setup(profile, rng);
  kma.params_ = std::move(params);
  kma.msk_ = std::move(msk);
  return kma;
}

std::pair<UserKey, ServerKey> KeyAuthority::register_user(std::string_view user_id,
                                                          Rng& rng) {
  Token id = Token::normalize(user_id);
  if (issued_.contains(id.text())) throw DuplicateUserError(id.text());
  auto keys = issue_keys(params_, msk_, id.text(), rng);
  issued_.insert(id.text());
  return keys;
}

void KeyAuthority::save(const std::filesystem::path& file) const {
  std::ostringstream out;
  write_system_params(out, params_);
  write_master_secret(out, params_, msk_);
  out << issued_.size() << '\n';
  for (const auto& id : issued_) out << id << '\n';

  std::ofstream f(file, std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + file.string());
  f << out.str();
}

KeyAuthority KeyAuthority::load(const std::filesystem::path& file) {
  std::ifstream f(file);
  if (!f) throw std::runtime_error("cannot read " + file.string());
  KeyAuthority kma;
  kma.params_ = read_system_params(f);
  kma.msk_ = read_master_secret(f);
  validate_params(kma.params_);
  std::string line;
  if (!std::getline(f, line)) throw SerialError("truncated key authority state");
  std::size_t count = std::stoull(line);
  for (std::size_t i = 0; i < count; ++i) {
    if (!std::getline(f, line) || line.empty())
      throw SerialError("truncated issued-id list");
    kma.issued_.insert(line);
  }
  return kma;
}

ClientTree encrypt_condition(const SystemParams& params, const UserKey& key,
                             const ConditionTree& tree, Rng& rng) {
  return map_leaves(tree, [&](const Token& token) {
    return encrypt_token(params, key, token, rng);
  });
}

std::array<ClientCiphertext, 3> encrypt_sat(const SystemParams& params,
                                            const UserKey& key,
                                            const SatTuple& sat, Rng& rng) {
  return {encrypt_token(params, key, sat.subject, rng),
          encrypt_token(params, key, sat.action, rng),
          encrypt_token(params, key, sat.target, rng)};
}

EncryptedPolicyBundle encrypt_policy(const SystemParams& params, const UserKey& key,
                                     const SatTuple& sat, const ConditionTree& tree,
                                     Rng& rng) {
  EncryptedPolicyBundle bundle;
  bundle.admin_id = key.user_id;
  bundle.sat = encrypt_sat(params, key, sat, rng);
  bundle.condition = encrypt_condition(params, key, tree, rng);
  return bundle;
}

EncryptedRequest encrypt_request(const SystemParams& params, const UserKey& key,
                                 const SatTuple& sat, Rng& rng) {
  EncryptedRequest request;
  request.requester_id = key.user_id;
  request.sat = {make_trapdoor(params, key, sat.subject, rng),
                 make_trapdoor(params, key, sat.action, rng),
                 make_trapdoor(params, key, sat.target, rng)};
  return request;
}

EncryptedAttributes encrypt_attributes(const SystemParams& params, const UserKey& key,
                                       const AttributeAssignment& attrs, Rng& rng) {
  EncryptedAttributes out;
  out.pip_id = key.user_id;
  for (const Token& token : expand_attributes(attrs))
    out.trapdoors.push_back(make_trapdoor(params, key, token, rng));
  return out;
}

}  // namespace encpol
