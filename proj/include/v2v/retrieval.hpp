#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "v2v/data/corpus.hpp"
#include "v2v/data/pairs.hpp"
#include "v2v/numerics.hpp"

namespace v2v::retrieval {

/// Brute-force cosine index. Vectors are normalized once at build time, so a
/// query costs one normalization and one dot product per entry.
class VectorStore {
public:
    /// Throws EmptyInput, DuplicateId, ZeroNorm, DimensionMismatch.
    static VectorStore build(std::span<const std::pair<std::uint64_t, EmbeddingVector>> entries);
    /// Uses the target-space vectors of a pair dataset.
    static VectorStore from_targets(const data::PairDataset& pairs);

    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return ids_.size(); }
    std::span<const std::uint64_t> ids() const noexcept { return ids_; }
    std::span<const double> vector(std::size_t row) const noexcept { return {vectors_.data() + row * dim_, dim_}; }
    std::optional<std::size_t> find(std::uint64_t id) const;

private:
    VectorStore() = default;
    void append(std::uint64_t id, std::span<const double> v);

    std::size_t dim_ = 0;
    std::vector<std::uint64_t> ids_;
    std::vector<double> vectors_;
    std::unordered_map<std::uint64_t, std::size_t> index_;
};

struct Hit {
    std::uint64_t id = 0;
    double score = 0.0;

    friend bool operator==(const Hit&, const Hit&) = default;
};

struct SearchResult {
    std::vector<Hit> hits;  // non-increasing score, ties by ascending id
    std::size_t k = 0;
};

/// The k best entries by cosine similarity. Throws DimensionMismatch,
/// ZeroNorm, ConfigInvalid (k = 0).
SearchResult top_k(const VectorStore& store, const EmbeddingVector& query, std::size_t k);

/// |ids(a) & ids(b)| / max(|a|, |b|); equals |intersection| / k whenever the
/// store holds at least k entries.
double overlap_at_k(const SearchResult& a, const SearchResult& b);

struct SharedHit {
    std::uint64_t id = 0;
    std::size_t rank_translated = 0;  // 1-based
    std::size_t rank_true = 0;
    long displacement = 0;            // rank_translated - rank_true
};

struct DisplayFields {
    std::string title;
    std::string content;
};

/// Side-by-side retrieval with a translated query and a ground-truth query.
struct ComparisonReport {
    std::size_t k = 0;
    SearchResult translated;
    SearchResult truth;
    double overlap = 0.0;
    std::vector<SharedHit> shared;  // in translated-rank order
    std::map<std::uint64_t, DisplayFields> display;
};

using CorpusIndex = std::unordered_map<std::uint64_t, data::ReviewRecord>;

ComparisonReport compare_retrieval(const VectorStore& store, const EmbeddingVector& q_translated,
                                   const EmbeddingVector& q_true, std::size_t k = 5,
                                   const CorpusIndex* corpus = nullptr);

std::string comparison_to_json(std::span<const std::pair<std::uint64_t, ComparisonReport>> reports);
/// Aligned two-column table: rank | translated-query hit | true-query hit.
std::string comparison_to_text(const ComparisonReport& report, std::size_t column_width = 56);

/// Stores persist as pair files with d_in = 0.
void save_store(const VectorStore& store, const std::filesystem::path& path);
VectorStore load_store(const std::filesystem::path& path);

}  // namespace v2v::retrieval
