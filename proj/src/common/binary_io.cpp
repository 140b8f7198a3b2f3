#include "v2v/binary_io.hpp"

#include <fstream>
#include <system_error>

#include <unistd.h>

namespace v2v {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::ZeroNorm: return "ZeroNorm";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::BadArchitecture: return "BadArchitecture";
        case ErrorCode::ShapeMismatch: return "ShapeMismatch";
        case ErrorCode::BadMagic: return "BadMagic";
        case ErrorCode::VersionUnsupported: return "VersionUnsupported";
        case ErrorCode::TruncatedFile: return "TruncatedFile";
        case ErrorCode::ChecksumMismatch: return "ChecksumMismatch";
        case ErrorCode::FileNotFound: return "FileNotFound";
        case ErrorCode::HeaderMismatch: return "HeaderMismatch";
        case ErrorCode::NotEnoughRecords: return "NotEnoughRecords";
        case ErrorCode::BadFraction: return "BadFraction";
        case ErrorCode::BadDimension: return "BadDimension";
        case ErrorCode::ConfigInvalid: return "ConfigInvalid";
        case ErrorCode::UnknownId: return "UnknownId";
        case ErrorCode::DuplicateId: return "DuplicateId";
        case ErrorCode::NonFinite: return "NonFinite";
        case ErrorCode::NumericFailure: return "NumericFailure";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

namespace io {

std::vector<std::byte> read_file(const std::filesystem::path& path) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) {
        throw Error(ErrorCode::FileNotFound, path.string());
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    in.seekg(0, std::ios::end);
    const auto size = static_cast<std::size_t>(in.tellg());
    in.seekg(0, std::ios::beg);
    std::vector<std::byte> bytes(size);
    if (size > 0 && !in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size))) {
        throw Error(ErrorCode::IoError, "short read on " + path.string());
    }
    return bytes;
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::byte> bytes) {
    auto tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::IoError, "cannot create " + tmp.string());
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) {
            out.close();
            std::filesystem::remove(tmp);
            throw Error(ErrorCode::IoError, "write failed for " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw Error(ErrorCode::IoError, "rename to " + path.string() + ": " + ec.message());
    }
}

void write_file_atomic(const std::filesystem::path& path, std::string_view text) {
    write_file_atomic(path, std::as_bytes(std::span<const char>(text.data(), text.size())));
}

}  // namespace io
}  // namespace v2v
