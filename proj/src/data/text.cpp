#include "v2v/data/text.hpp"

#include <algorithm>
#include <cctype>

#include "v2v/error.hpp"
#include "v2v/rng.hpp"

namespace v2v::data {
namespace {

constexpr std::uint64_t kSampleStream = 0x5a3b;

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

}  // namespace

std::vector<std::string_view> split_words(std::string_view text) {
    std::vector<std::string_view> words;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && is_space(text[i])) ++i;
        const std::size_t start = i;
        while (i < text.size() && !is_space(text[i])) ++i;
        if (i > start) words.push_back(text.substr(start, i - start));
    }
    return words;
}

std::size_t approx_token_count(std::string_view text) {
    const std::size_t words = split_words(text).size();
    return (words * 4 + 2) / 3;
}

std::vector<ReviewRecord> filter_by_length(std::vector<ReviewRecord> records, std::size_t max_tokens) {
    std::erase_if(records, [max_tokens](const ReviewRecord& r) { return approx_token_count(r.body) > max_tokens; });
    return records;
}

std::vector<ReviewRecord> sample_subset(std::vector<ReviewRecord> records, std::size_t n, std::uint64_t seed) {
    if (n > records.size()) {
        throw Error(ErrorCode::NotEnoughRecords,
                    "asked for " + std::to_string(n) + " records, corpus has " + std::to_string(records.size()));
    }
    // Canonical order first, so the draw depends on the id set and not on input order.
    std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    auto rng = Xoshiro256::stream(seed, kSampleStream);
    // Partial Fisher-Yates: the first n slots end up a uniform n-subset.
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(records.size() - i));
        std::swap(records[i], records[j]);
    }
    records.resize(n);
    std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    return records;
}

std::vector<std::string> chunk_text(std::string_view text, std::size_t chunk_words) {
    if (chunk_words == 0) throw Error(ErrorCode::ConfigInvalid, "chunk size must be at least one word");
    const auto words = split_words(text);
    std::vector<std::string> chunks;
    for (std::size_t start = 0; start < words.size(); start += chunk_words) {
        const std::size_t end = std::min(words.size(), start + chunk_words);
        std::string chunk;
        for (std::size_t w = start; w < end; ++w) {
            if (w > start) chunk.push_back(' ');
            chunk.append(words[w]);
        }
        chunks.push_back(std::move(chunk));
    }
    return chunks;
}

EmbeddingVector average_chunk_embeddings(std::span<const EmbeddingVector> chunks) { return mean_vector(chunks); }

}  // namespace v2v::data
