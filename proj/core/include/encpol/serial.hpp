#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "encpol/messages.hpp"
#include "encpol/searchable.hpp"
#include "encpol/service.hpp"

namespace encpol {

/// Line-oriented text records: a type tag line followed by one field per
/// line. Crypto material is lowercase hex, fixed-width (group elements get
/// the byte width of p, exponents the width of q); identifiers stay as
/// plain text and policy ids are decimal. Used by every on-disk store and
/// by the CLI.

class SerialError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void write_system_params(std::ostream& out, const SystemParams& params);
void write_master_secret(std::ostream& out, const SystemParams& params,
                         const MasterSecret& msk);
void write_user_key(std::ostream& out, const SystemParams& params, const UserKey& key);
void write_server_key(std::ostream& out, const SystemParams& params,
                      const ServerKey& key);
void write_client_ciphertext(std::ostream& out, const SystemParams& params,
                             const ClientCiphertext& ct);
void write_server_ciphertext(std::ostream& out, const SystemParams& params,
                             const ServerCiphertext& ct);
void write_trapdoor(std::ostream& out, const SystemParams& params, const Trapdoor& td);
void write_stored_tree(std::ostream& out, const SystemParams& params,
                       const StoredTree& tree);
void write_policy_record(std::ostream& out, const SystemParams& params,
                         const PolicyRecord& record);
void write_revocation(std::ostream& out, std::string_view user_id);

SystemParams read_system_params(std::istream& in);
MasterSecret read_master_secret(std::istream& in);
UserKey read_user_key(std::istream& in);
ServerKey read_server_key(std::istream& in);
ClientCiphertext read_client_ciphertext(std::istream& in);
ServerCiphertext read_server_ciphertext(std::istream& in);
Trapdoor read_trapdoor(std::istream& in);
StoredTree read_stored_tree(std::istream& in);
PolicyRecord read_policy_record(std::istream& in);
std::string read_revocation(std::istream& in);

/// Tag of the next record ("" at end of input); does not consume it.
std::string peek_tag(std::istream& in);

}  // namespace encpol
