#include "encpol/serial.hpp"

#include <charconv>
#include <istream>
#include <ostream>

namespace encpol {

namespace {

constexpr std::string_view kParamsTag = "system-params";
constexpr std::string_view kMasterTag = "master-secret";
constexpr std::string_view kUserKeyTag = "user-key";
constexpr std::string_view kServerKeyTag = "server-key";
constexpr std::string_view kClientCtTag = "client-ciphertext";
constexpr std::string_view kServerCtTag = "server-ciphertext";
constexpr std::string_view kTrapdoorTag = "trapdoor";
constexpr std::string_view kGateTag = "gate";
constexpr std::string_view kLeafTag = "leaf";
constexpr std::string_view kPolicyTag = "policy-record";
constexpr std::string_view kRevokeTag = "revoke";

std::string bytes_to_hex(std::span<const std::uint8_t> bytes) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (std::uint8_t b : bytes) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0xf]);
  }
  return out;
}

int hex_nibble(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

std::vector<std::uint8_t> hex_to_bytes(const std::string& hex) {
  if (hex.size() % 2 != 0) throw SerialError("odd-length hex field");
  std::vector<std::uint8_t> out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    int hi = hex_nibble(hex[2 * i]);
    int lo = hex_nibble(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw SerialError("invalid hex field \"" + hex + "\"");
    out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
  }
  return out;
}

std::string read_field(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw SerialError("unexpected end of record");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

/// First non-blank line; "" at end of input.
std::string next_tag(std::istream& in) {
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) return line;
  }
  return {};
}

void expect_tag(std::istream& in, std::string_view tag) {
  std::string got = next_tag(in);
  if (got != tag)
    throw SerialError("expected \"" + std::string(tag) + "\" record, got \"" + got +
                      "\"");
}

Bignum read_bignum(std::istream& in) {
  std::string field = read_field(in);
  try {
    return Bignum::from_hex(field);
  } catch (const std::invalid_argument& e) {
    throw SerialError(e.what());
  }
}

std::uint64_t read_u64(std::istream& in) {
  std::string field = read_field(in);
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size())
    throw SerialError("invalid integer field \"" + field + "\"");
  return value;
}

std::string element_hex(const SystemParams& params, const Bignum& e) {
  return e.to_hex_padded(params.element_width());
}

std::string exponent_hex(const SystemParams& params, const Bignum& e) {
  return e.to_hex_padded(params.q.byte_length());
}

}  // namespace

void write_system_params(std::ostream& out, const SystemParams& params) {
  out << kParamsTag << '\n'
      << params.p.to_hex() << '\n'
      << params.q.to_hex() << '\n'
      << element_hex(params, params.g) << '\n'
      << element_hex(params, params.h) << '\n'
      << params.hash_id << '\n'
      << params.prf_id << '\n';
}

SystemParams read_system_params(std::istream& in) {
  expect_tag(in, kParamsTag);
  SystemParams params;
  params.p = read_bignum(in);
  params.q = read_bignum(in);
  params.g = read_bignum(in);
  params.h = read_bignum(in);
  params.hash_id = read_field(in);
  params.prf_id = read_field(in);
  return params;
}

void write_master_secret(std::ostream& out, const SystemParams& params,
                         const MasterSecret& msk) {
  out << kMasterTag << '\n'
      << exponent_hex(params, msk.x) << '\n'
      << bytes_to_hex(msk.prf_key) << '\n';
}

MasterSecret read_master_secret(std::istream& in) {
  expect_tag(in, kMasterTag);
  MasterSecret msk;
  msk.x = read_bignum(in);
  msk.prf_key = hex_to_bytes(read_field(in));
  return msk;
}

void write_user_key(std::ostream& out, const SystemParams& params, const UserKey& key) {
  out << kUserKeyTag << '\n'
      << key.user_id << '\n'
      << exponent_hex(params, key.x1) << '\n'
      << bytes_to_hex(key.prf_key) << '\n';
}

UserKey read_user_key(std::istream& in) {
  expect_tag(in, kUserKeyTag);
  UserKey key;
  key.user_id = read_field(in);
  key.x1 = read_bignum(in);
  key.prf_key = hex_to_bytes(read_field(in));
  return key;
}

void write_server_key(std::ostream& out, const SystemParams& params,
                      const ServerKey& key) {
  out << kServerKeyTag << '\n'
      << key.user_id << '\n'
      << exponent_hex(params, key.x2) << '\n';
}

ServerKey read_server_key(std::istream& in) {
  expect_tag(in, kServerKeyTag);
  ServerKey key;
  key.user_id = read_field(in);
  key.x2 = read_bignum(in);
  return key;
}

void write_client_ciphertext(std::ostream& out, const SystemParams& params,
                             const ClientCiphertext& ct) {
  out << kClientCtTag << '\n'
      << element_hex(params, ct.c1) << '\n'
      << element_hex(params, ct.c2) << '\n'
      << bytes_to_hex(ct.c3) << '\n';
}

ClientCiphertext read_client_ciphertext(std::istream& in) {
  expect_tag(in, kClientCtTag);
  ClientCiphertext ct;
  ct.c1 = read_bignum(in);
  ct.c2 = read_bignum(in);
  ct.c3 = hex_to_bytes(read_field(in));
  return ct;
}

void write_server_ciphertext(std::ostream& out, const SystemParams& params,
                             const ServerCiphertext& ct) {
  out << kServerCtTag << '\n'
      << element_hex(params, ct.c1) << '\n'
      << bytes_to_hex(ct.c2) << '\n';
}

ServerCiphertext read_server_ciphertext(std::istream& in) {
  expect_tag(in, kServerCtTag);
  ServerCiphertext ct;
  ct.c1 = read_bignum(in);
  ct.c2 = hex_to_bytes(read_field(in));
  return ct;
}

void write_trapdoor(std::ostream& out, const SystemParams& params, const Trapdoor& td) {
  out << kTrapdoorTag << '\n'
      << element_hex(params, td.t1) << '\n'
      << element_hex(params, td.t2) << '\n';
}

Trapdoor read_trapdoor(std::istream& in) {
  expect_tag(in, kTrapdoorTag);
  Trapdoor td;
  td.t1 = read_bignum(in);
  td.t2 = read_bignum(in);
  return td;
}

void write_stored_tree(std::ostream& out, const SystemParams& params,
                       const StoredTree& tree) {
  if (tree.is_leaf()) {
    out << kLeafTag << '\n';
    write_server_ciphertext(out, params, *tree.leaf);
    return;
  }
  out << kGateTag << '\n' << tree.threshold << '\n' << tree.children.size() << '\n';
  for (const auto& child : tree.children) write_stored_tree(out, params, child);
}

StoredTree read_stored_tree(std::istream& in) {
  std::string tag = next_tag(in);
  if (tag == kLeafTag) return StoredTree::make_leaf(read_server_ciphertext(in));
  if (tag != kGateTag)
    throw SerialError("expected a tree node, got \"" + tag + "\"");
  std::uint64_t threshold = read_u64(in);
  std::uint64_t child_count = read_u64(in);
  if (child_count == 0 || threshold < 1 || threshold > child_count)
    throw SerialError("malformed gate record");
  std::vector<StoredTree> children;
  children.reserve(child_count);
  for (std::uint64_t i = 0; i < child_count; ++i)
    children.push_back(read_stored_tree(in));
  return StoredTree::make_gate(static_cast<unsigned>(threshold), std::move(children));
}

void write_policy_record(std::ostream& out, const SystemParams& params,
                         const PolicyRecord& record) {
  out << kPolicyTag << '\n' << record.policy_id << '\n' << record.admin_id << '\n';
  for (const auto& ct : record.sat) write_server_ciphertext(out, params, ct);
  write_stored_tree(out, params, record.condition);
}

PolicyRecord read_policy_record(std::istream& in) {
  expect_tag(in, kPolicyTag);
  PolicyRecord record;
  record.policy_id = read_u64(in);
  record.admin_id = read_field(in);
  for (auto& ct : record.sat) ct = read_server_ciphertext(in);
  record.condition = read_stored_tree(in);
  return record;
}

void write_revocation(std::ostream& out, std::string_view user_id) {
  out << kRevokeTag << '\n' << user_id << '\n';
}

std::string read_revocation(std::istream& in) {
  expect_tag(in, kRevokeTag);
  return read_field(in);
}

std::string peek_tag(std::istream& in) {
  std::string line;
  while (true) {
    auto pos = in.tellg();
    if (!std::getline(in, line)) {
      in.clear();
      return {};
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) {
      in.seekg(pos);
      return line;
    }
  }
}

}  // namespace encpol
