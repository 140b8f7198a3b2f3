#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "v2v/data/corpus.hpp"
#include "v2v/numerics.hpp"

namespace v2v::data {

inline constexpr std::size_t kDefaultMaxTokens = 8000;
inline constexpr std::size_t kDefaultChunkWords = 128;

/// Maximal runs of non-whitespace characters.
std::vector<std::string_view> split_words(std::string_view text);

/// ceil(words * 4 / 3): a tokenizer-free estimate of BPE token count.
std::size_t approx_token_count(std::string_view text);

/// Keeps records whose body is at most max_tokens by approx_token_count.
std::vector<ReviewRecord> filter_by_length(std::vector<ReviewRecord> records, std::size_t max_tokens = kDefaultMaxTokens);

/// Uniform sample of n records without replacement, returned in ascending id
/// order. Depends only on the set of ids and the seed. Throws NotEnoughRecords.
std::vector<ReviewRecord> sample_subset(std::vector<ReviewRecord> records, std::size_t n, std::uint64_t seed);

/// Greedy split into chunks of chunk_words words, joined by single spaces.
std::vector<std::string> chunk_text(std::string_view text, std::size_t chunk_words = kDefaultChunkWords);

/// Unweighted mean of per-chunk embeddings. Throws EmptyInput.
EmbeddingVector average_chunk_embeddings(std::span<const EmbeddingVector> chunks);

}  // namespace v2v::data
