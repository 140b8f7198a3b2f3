#pragma once

// Little-endian encoding helpers shared by the model and pair file formats,
// plus the write-to-temporary-then-rename helper every file writer uses.

#include <bit>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "v2v/error.hpp"

namespace v2v::io {

static_assert(std::endian::native == std::endian::little, "file formats assume a little-endian host");

class ByteWriter {
public:
    void reserve(std::size_t n) { bytes_.reserve(n); }

    void put_raw(std::string_view s) {
        const auto* p = reinterpret_cast<const std::byte*>(s.data());
        bytes_.insert(bytes_.end(), p, p + s.size());
    }

    template <typename T>
    void put(T value) {
        static_assert(std::is_trivially_copyable_v<T>);
        const auto old = bytes_.size();
        bytes_.resize(old + sizeof(T));
        std::memcpy(bytes_.data() + old, &value, sizeof(T));
    }

    template <typename T>
    void put_span(std::span<const T> values) {
        const auto old = bytes_.size();
        bytes_.resize(old + values.size_bytes());
        if (!values.empty()) std::memcpy(bytes_.data() + old, values.data(), values.size_bytes());
    }

    std::size_t size() const noexcept { return bytes_.size(); }
    std::span<const std::byte> view() const noexcept { return bytes_; }
    std::vector<std::byte> take() && { return std::move(bytes_); }

private:
    std::vector<std::byte> bytes_;
};

/// Bounds-checked reader; running past the end raises TruncatedFile.
class ByteReader {
public:
    explicit ByteReader(std::span<const std::byte> bytes) : bytes_(bytes) {}

    template <typename T>
    T get() {
        static_assert(std::is_trivially_copyable_v<T>);
        require(sizeof(T));
        T value;
        std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return value;
    }

    template <typename T>
    void get_span(std::span<T> out) {
        require(out.size_bytes());
        if (!out.empty()) std::memcpy(out.data(), bytes_.data() + pos_, out.size_bytes());
        pos_ += out.size_bytes();
    }

    std::span<const std::byte> take(std::size_t n) {
        require(n);
        auto s = bytes_.subspan(pos_, n);
        pos_ += n;
        return s;
    }

    std::size_t position() const noexcept { return pos_; }
    std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

private:
    void require(std::size_t n) const {
        if (n > bytes_.size() - pos_) {
            throw Error(ErrorCode::TruncatedFile, "need " + std::to_string(n) + " bytes at offset " +
                                                      std::to_string(pos_) + ", have " +
                                                      std::to_string(bytes_.size() - pos_));
        }
    }

    std::span<const std::byte> bytes_;
    std::size_t pos_ = 0;
};

std::vector<std::byte> read_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it over `path` on success,
/// so readers never observe a partially written file.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::byte> bytes);
void write_file_atomic(const std::filesystem::path& path, std::string_view text);

}  // namespace v2v::io
