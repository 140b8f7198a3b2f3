#include "v2v/checksum.hpp"

#include <boost/crc.hpp>

#include "v2v/binary_io.hpp"

namespace v2v {

using Crc64Xz = boost::crc_optimal<64, 0x42F0E1EBA9EA3693ULL, ~0ULL, ~0ULL, true, true>;

std::uint64_t crc64(std::span<const std::byte> bytes) noexcept {
    Crc64Xz crc;
    crc.process_bytes(bytes.data(), bytes.size());
    return crc.checksum();
}

std::uint64_t crc64_file(const std::filesystem::path& path) {
    const auto bytes = io::read_file(path);
    return crc64(bytes);
}

}  // namespace v2v
