#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace v2v::data {

struct SplitIndices {
    std::vector<std::uint64_t> train;
    std::vector<std::uint64_t> validation;
    std::vector<std::uint64_t> test;
    std::uint64_t seed = 0;

    friend bool operator==(const SplitIndices&, const SplitIndices&) = default;
};

inline constexpr double kDefaultTestFraction = 0.2;
inline constexpr double kDefaultValidationFraction = 0.2;

/// floor(x + 0.5) for non-negative x.
std::size_t round_half_up(double x);

/// Test ids are drawn first (round(test_frac * n)), then validation ids from
/// the remainder (round(val_frac * remaining)); the rest train. Each list is
/// sorted ascending. The result depends only on the id set and the seed.
/// Throws BadFraction for fractions outside [0, 1) or an empty training set.
SplitIndices split_dataset(std::span<const std::uint64_t> ids, double test_frac, double val_frac, std::uint64_t seed);

// Split file:
//   seed: <u64>
//   train:
//   <id per line>
//   validation:
//   ...
//   test:
//   ...
std::string format_split(const SplitIndices& split);
SplitIndices parse_split(std::string_view text);

void save_split(const SplitIndices& split, const std::filesystem::path& path);
SplitIndices load_split(const std::filesystem::path& path);

}  // namespace v2v::data
