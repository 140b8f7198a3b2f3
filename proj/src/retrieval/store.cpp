#include <algorithm>
#include <cmath>
#include <string>

#include "v2v/retrieval.hpp"
#include "v2v/simd/kernels.hpp"

namespace v2v::retrieval {

void VectorStore::append(std::uint64_t id, std::span<const double> v) {
    if (ids_.empty() && dim_ == 0) dim_ = v.size();
    if (v.size() != dim_ || dim_ == 0) {
        throw Error(ErrorCode::DimensionMismatch, "entry " + std::to_string(id) + " has dim " + std::to_string(v.size()) +
                                                      ", store has " + std::to_string(dim_));
    }
    require_finite(v, "store vector");
    const double norm = l2_norm(v);
    if (norm < kNormFloor) throw Error(ErrorCode::ZeroNorm, "entry " + std::to_string(id));
    if (!index_.emplace(id, ids_.size()).second) throw Error(ErrorCode::DuplicateId, "id " + std::to_string(id));
    ids_.push_back(id);
    for (double x : v) vectors_.push_back(x / norm);
}

VectorStore VectorStore::build(std::span<const std::pair<std::uint64_t, EmbeddingVector>> entries) {
    if (entries.empty()) throw Error(ErrorCode::EmptyInput, "cannot build an empty store");
    VectorStore store;
    store.vectors_.reserve(entries.size() * entries.front().second.dim());
    for (const auto& [id, v] : entries) store.append(id, v.values());
    return store;
}

VectorStore VectorStore::from_targets(const data::PairDataset& pairs) {
    if (pairs.empty()) throw Error(ErrorCode::EmptyInput, "cannot build an empty store");
    VectorStore store;
    store.vectors_.reserve(pairs.size() * pairs.d_out());
    std::vector<double> v(pairs.d_out());
    for (std::size_t r = 0; r < pairs.size(); ++r) {
        const auto t = pairs.target(r);
        std::copy(t.begin(), t.end(), v.begin());
        store.append(pairs.id(r), v);
    }
    return store;
}

std::optional<std::size_t> VectorStore::find(std::uint64_t id) const {
    const auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

SearchResult top_k(const VectorStore& store, const EmbeddingVector& query, std::size_t k) {
    if (k == 0) throw Error(ErrorCode::ConfigInvalid, "k must be at least 1");
    if (query.dim() != store.dim()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "query has dim " + std::to_string(query.dim()) + ", store has " + std::to_string(store.dim()));
    }
    const auto unit = l2_normalize(query);
    std::vector<double> scores(store.size());
    simd::active().dot_rows(store.vector(0).data(), store.size(), store.dim(), unit.data(), scores.data());

    std::vector<std::size_t> order(store.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    const auto ids = store.ids();
    auto better = [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return ids[a] < ids[b];
    };
    const std::size_t take = std::min(k, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(), better);

    SearchResult result;
    result.k = k;
    result.hits.reserve(take);
    for (std::size_t i = 0; i < take; ++i) {
        result.hits.push_back({ids[order[i]], std::clamp(scores[order[i]], -1.0, 1.0)});
    }
    return result;
}

double overlap_at_k(const SearchResult& a, const SearchResult& b) {
    const std::size_t denom = std::max(a.hits.size(), b.hits.size());
    if (denom == 0) return 0.0;
    std::size_t shared = 0;
    for (const auto& ha : a.hits) {
        for (const auto& hb : b.hits) {
            if (ha.id == hb.id) {
                ++shared;
                break;
            }
        }
    }
    return static_cast<double>(shared) / static_cast<double>(denom);
}

void save_store(const VectorStore& store, const std::filesystem::path& path) {
    data::PairDataset ds(0, store.dim());
    for (std::size_t r = 0; r < store.size(); ++r) ds.add(store.ids()[r], std::span<const double>{}, store.vector(r));
    data::save_pairs(ds, path);
}

VectorStore load_store(const std::filesystem::path& path) { return VectorStore::from_targets(data::load_pairs(path)); }

}  // namespace v2v::retrieval
