#include "v2v/data/pairs.hpp"

#include <cmath>
#include <cstring>
#include <string>

#include "v2v/binary_io.hpp"
#include "v2v/checksum.hpp"

namespace v2v::data {
namespace {

constexpr std::uint64_t kHeaderBytes = 4 + 4 + 8 + 4 + 4;

void require_dim(std::size_t expected, std::size_t got, const char* what) {
    if (expected != got) {
        throw Error(ErrorCode::DimensionMismatch,
                    std::string(what) + " has dim " + std::to_string(got) + ", dataset expects " + std::to_string(expected));
    }
}

}  // namespace

PairDataset::PairDataset(std::size_t d_in, std::size_t d_out) : d_in_(d_in), d_out_(d_out) {
    if (d_out == 0) throw Error(ErrorCode::BadDimension, "target dimension must be positive");
    if (d_in > UINT32_MAX || d_out > UINT32_MAX) throw Error(ErrorCode::BadDimension, "dimension exceeds u32");
}

void PairDataset::add(std::uint64_t id, std::span<const float> source, std::span<const float> target) {
    require_dim(d_in_, source.size(), "source");
    require_dim(d_out_, target.size(), "target");
    require_finite(source, "source vector");
    require_finite(target, "target vector");
    if (!index_.emplace(id, ids_.size()).second) throw Error(ErrorCode::DuplicateId, "id " + std::to_string(id));
    ids_.push_back(id);
    sources_.insert(sources_.end(), source.begin(), source.end());
    targets_.insert(targets_.end(), target.begin(), target.end());
}

void PairDataset::add(std::uint64_t id, std::span<const double> source, std::span<const double> target) {
    const std::vector<float> s(source.begin(), source.end());
    const std::vector<float> t(target.begin(), target.end());
    add(id, std::span<const float>(s), std::span<const float>(t));
}

std::optional<std::size_t> PairDataset::find(std::uint64_t id) const {
    const auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::size_t PairDataset::row_of(std::uint64_t id) const {
    const auto row = find(id);
    if (!row) throw Error(ErrorCode::UnknownId, "id " + std::to_string(id) + " not in dataset");
    return *row;
}

std::vector<std::byte> encode_pairs(const PairDataset& ds) {
    io::ByteWriter w;
    w.reserve(kHeaderBytes + ds.size() * (8 + 4 * (ds.d_in() + ds.d_out())) + 8);
    w.put_raw(std::string_view(kPairMagic, 4));
    w.put<std::uint32_t>(kPairVersion);
    w.put<std::uint64_t>(ds.size());
    w.put<std::uint32_t>(static_cast<std::uint32_t>(ds.d_in()));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(ds.d_out()));
    for (std::size_t r = 0; r < ds.size(); ++r) {
        w.put<std::uint64_t>(ds.id(r));
        w.put_span(ds.source(r));
        w.put_span(ds.target(r));
    }
    w.put<std::uint64_t>(crc64(w.view()));
    return std::move(w).take();
}

PairDataset decode_pairs(std::span<const std::byte> bytes) {
    io::ByteReader r(bytes);
    const auto magic = r.take(4);
    if (std::memcmp(magic.data(), kPairMagic, 4) != 0) throw Error(ErrorCode::BadMagic, "not a V2VP pair file");
    const auto version = r.get<std::uint32_t>();
    if (version != kPairVersion) throw Error(ErrorCode::VersionUnsupported, "pair file version " + std::to_string(version));
    const auto n = r.get<std::uint64_t>();
    const auto d_in = r.get<std::uint32_t>();
    const auto d_out = r.get<std::uint32_t>();

    const std::uint64_t record_bytes = 8 + 4 * (static_cast<std::uint64_t>(d_in) + d_out);
    if (n > 0 && record_bytes > 0 && n > (r.remaining() / record_bytes)) {
        throw Error(ErrorCode::TruncatedFile, "header declares " + std::to_string(n) + " records of " +
                                                  std::to_string(record_bytes) + " bytes; file has " +
                                                  std::to_string(r.remaining()) + " bytes left");
    }
    const std::size_t payload_start = r.position();
    (void)r.take(static_cast<std::size_t>(n * record_bytes));
    const std::size_t covered = r.position();
    const auto stored = r.get<std::uint64_t>();
    if (r.remaining() != 0) {
        throw Error(ErrorCode::ChecksumMismatch, std::to_string(r.remaining()) + " unexpected bytes after the checksum");
    }
    if (crc64(bytes.first(covered)) != stored) throw Error(ErrorCode::ChecksumMismatch, "pair file checksum");

    PairDataset ds(d_in, d_out);
    io::ByteReader records(bytes.subspan(payload_start, covered - payload_start));
    std::vector<float> source(d_in);
    std::vector<float> target(d_out);
    for (std::uint64_t i = 0; i < n; ++i) {
        const auto id = records.get<std::uint64_t>();
        records.get_span(std::span<float>(source));
        records.get_span(std::span<float>(target));
        ds.add(id, std::span<const float>(source), std::span<const float>(target));
    }
    return ds;
}

void save_pairs(const PairDataset& ds, const std::filesystem::path& path) {
    io::write_file_atomic(path, encode_pairs(ds));
}

PairDataset load_pairs(const std::filesystem::path& path) { return decode_pairs(io::read_file(path)); }

}  // namespace v2v::data
