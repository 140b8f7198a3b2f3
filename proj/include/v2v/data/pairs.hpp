#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "v2v/numerics.hpp"

namespace v2v::data {

/// Aligned (source, target) embedding pairs with stable ids. Vectors are held
/// as f32, matching the file format, in two row-major blocks.
class PairDataset {
public:
    PairDataset(std::size_t d_in, std::size_t d_out);

    std::size_t d_in() const noexcept { return d_in_; }
    std::size_t d_out() const noexcept { return d_out_; }
    std::size_t size() const noexcept { return ids_.size(); }
    bool empty() const noexcept { return ids_.empty(); }

    /// Throws DimensionMismatch, DuplicateId or NonFinite.
    void add(std::uint64_t id, std::span<const float> source, std::span<const float> target);
    void add(std::uint64_t id, std::span<const double> source, std::span<const double> target);

    std::span<const std::uint64_t> ids() const noexcept { return ids_; }
    std::uint64_t id(std::size_t row) const noexcept { return ids_[row]; }
    std::span<const float> source(std::size_t row) const noexcept { return {sources_.data() + row * d_in_, d_in_}; }
    std::span<const float> target(std::size_t row) const noexcept { return {targets_.data() + row * d_out_, d_out_}; }

    /// Row index for an id; throws UnknownId.
    std::size_t row_of(std::uint64_t id) const;
    std::optional<std::size_t> find(std::uint64_t id) const;

    friend bool operator==(const PairDataset& a, const PairDataset& b) {
        return a.d_in_ == b.d_in_ && a.d_out_ == b.d_out_ && a.ids_ == b.ids_ && a.sources_ == b.sources_ &&
               a.targets_ == b.targets_;
    }

private:
    std::size_t d_in_;
    std::size_t d_out_;
    std::vector<std::uint64_t> ids_;
    std::vector<float> sources_;
    std::vector<float> targets_;
    std::unordered_map<std::uint64_t, std::size_t> index_;
};

// Pair file, little-endian:
//   "V2VP" | u32 version=1 | u64 n | u32 d_in | u32 d_out
//   | n x (u64 id, d_in x f32, d_out x f32) | u64 CRC-64/XZ of all preceding bytes
// A file with d_in = 0 holds target-space vectors only (stores, queries and
// predictions).
inline constexpr char kPairMagic[4] = {'V', '2', 'V', 'P'};
inline constexpr std::uint32_t kPairVersion = 1;

std::vector<std::byte> encode_pairs(const PairDataset& ds);
PairDataset decode_pairs(std::span<const std::byte> bytes);

void save_pairs(const PairDataset& ds, const std::filesystem::path& path);
PairDataset load_pairs(const std::filesystem::path& path);

}  // namespace v2v::data
