#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace encpol {

using Digest = std::vector<std::uint8_t>;

inline constexpr std::string_view kDefaultHashId = "sha256";
inline constexpr std::string_view kDefaultPrfId = "hmac-sha256";
inline constexpr std::size_t kPrfKeyBytes = 32;

/// Collision-resistant hash selected by id. Throws std::invalid_argument
/// for ids with no registered implementation.
Digest hash_bytes(std::string_view hash_id, std::span<const std::uint8_t> data);

/// Keyed pseudorandom function selected by id.
Digest prf_bytes(std::string_view prf_id, std::span<const std::uint8_t> key,
                 std::span<const std::uint8_t> data);

std::size_t hash_digest_size(std::string_view hash_id);

}  // namespace encpol
