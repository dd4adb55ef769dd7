#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qrng {

/// Lower-case hex SHA-256.
std::string sha256_hex(std::span<const std::uint8_t> data);
std::string sha256_file(const std::filesystem::path& path);

/// Deterministic byte expansion: SHA-256(label || le64(seed) || le64(counter)) blocks.
std::vector<std::uint8_t> expand_seed_bytes(std::uint64_t seed, std::string_view label,
                                            std::size_t count);

}  // namespace qrng
