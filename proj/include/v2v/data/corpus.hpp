#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace v2v::data {

struct ReviewRecord {
    std::uint64_t id = 0;
    std::string product_id;
    std::string user_id;
    int score = 0;
    std::string summary;
    std::string body;

    friend bool operator==(const ReviewRecord&, const ReviewRecord&) = default;
};

struct RowDiagnostic {
    std::size_t line = 0;  // 1-based line where the row starts
    std::string message;
};

struct CorpusParseResult {
    std::vector<ReviewRecord> records;
    std::vector<RowDiagnostic> diagnostics;
};

/// Column names bound by header, in any order; extra columns are ignored.
inline constexpr const char* kCorpusColumns[] = {"Id", "ProductId", "UserId", "Score", "Summary", "Text"};

/// Parses an RFC 4180 CSV review corpus (quoted fields may hold commas,
/// doubled quotes and newlines). Rows that fail the schema are skipped and
/// reported; FileNotFound / HeaderMismatch abort.
CorpusParseResult parse_corpus(const std::filesystem::path& path);
CorpusParseResult parse_corpus_text(std::string_view text);

/// Writes records back out with the canonical header and quoting.
std::string format_corpus(const std::vector<ReviewRecord>& records);

/// Text that stands in for the review when it is embedded: "summary: body".
std::string embedding_text(const ReviewRecord& record);

}  // namespace v2v::data
