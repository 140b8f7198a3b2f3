#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>

namespace v2v {

/// CRC-64/XZ (ECMA-182 polynomial, reflected, init and xorout all ones).
/// Check value for "123456789" is 0x995DC9BBDF1939FA.
std::uint64_t crc64(std::span<const std::byte> bytes) noexcept;

/// CRC-64 of a whole file's contents.
std::uint64_t crc64_file(const std::filesystem::path& path);

}  // namespace v2v
