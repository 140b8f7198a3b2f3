#include "v2v/data/corpus.hpp"

#include <array>
#include <charconv>
#include <optional>
#include <string_view>
#include <unordered_set>

#include "v2v/binary_io.hpp"
#include "v2v/error.hpp"

namespace v2v::data {
namespace {

struct CsvRow {
    std::size_t line = 0;
    std::vector<std::string> fields;
    bool unterminated = false;
};

/// RFC 4180 reader. Records end at an unquoted LF (CR before it is dropped).
class CsvReader {
public:
    explicit CsvReader(std::string_view text) : text_(text) {
        if (text_.starts_with("\xEF\xBB\xBF")) text_.remove_prefix(3);
    }

    std::optional<CsvRow> next() {
        if (pos_ >= text_.size()) return std::nullopt;
        CsvRow row;
        row.line = line_;
        std::string field;
        bool quoted = false;
        bool field_was_quoted = false;
        while (pos_ < text_.size()) {
            const char c = text_[pos_++];
            if (quoted) {
                if (c == '"') {
                    if (pos_ < text_.size() && text_[pos_] == '"') {
                        field.push_back('"');
                        ++pos_;
                    } else {
                        quoted = false;
                    }
                } else {
                    if (c == '\n') ++line_;
                    field.push_back(c);
                }
                continue;
            }
            if (c == '"' && field.empty() && !field_was_quoted) {
                quoted = true;
                field_was_quoted = true;
            } else if (c == ',') {
                row.fields.push_back(std::move(field));
                field.clear();
                field_was_quoted = false;
            } else if (c == '\n') {
                ++line_;
                if (!field.empty() && field.back() == '\r' && !field_was_quoted) field.pop_back();
                row.fields.push_back(std::move(field));
                return row;
            } else if (c == '\r' && field_was_quoted) {
                // CR after a closing quote belongs to the line ending.
            } else {
                field.push_back(c);
            }
        }
        row.unterminated = quoted;
        if (!field.empty() && field.back() == '\r' && !field_was_quoted) field.pop_back();
        row.fields.push_back(std::move(field));
        return row;
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
};

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n\f\v");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n\f\v");
    return s.substr(first, last - first + 1);
}

template <typename Int>
std::optional<Int> parse_int(std::string_view s) {
    s = trim(s);
    Int value{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return value;
}

bool is_blank_row(const CsvRow& row) { return row.fields.size() == 1 && trim(row.fields[0]).empty(); }

std::string quote_field(std::string_view s) {
    if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

}  // namespace

CorpusParseResult parse_corpus_text(std::string_view text) {
    CsvReader reader(text);
    auto header = reader.next();
    if (!header || is_blank_row(*header)) throw Error(ErrorCode::HeaderMismatch, "missing header row");

    constexpr std::size_t kColumns = std::size(kCorpusColumns);
    std::array<std::size_t, kColumns> column{};
    for (std::size_t c = 0; c < kColumns; ++c) {
        std::optional<std::size_t> found;
        for (std::size_t f = 0; f < header->fields.size(); ++f) {
            if (trim(header->fields[f]) != kCorpusColumns[c]) continue;
            if (found) throw Error(ErrorCode::HeaderMismatch, std::string("duplicate column ") + kCorpusColumns[c]);
            found = f;
        }
        if (!found) throw Error(ErrorCode::HeaderMismatch, std::string("missing column ") + kCorpusColumns[c]);
        column[c] = *found;
    }

    CorpusParseResult result;
    std::unordered_set<std::uint64_t> seen;
    auto reject = [&](const CsvRow& row, std::string message) {
        result.diagnostics.push_back({row.line, std::move(message)});
    };
    while (auto row = reader.next()) {
        if (is_blank_row(*row)) continue;
        if (row->unterminated) {
            reject(*row, "unterminated quoted field");
            continue;
        }
        if (row->fields.size() != header->fields.size()) {
            reject(*row, "expected " + std::to_string(header->fields.size()) + " fields, found " +
                             std::to_string(row->fields.size()));
            continue;
        }
        const auto& f = row->fields;
        const auto id = parse_int<std::uint64_t>(f[column[0]]);
        if (!id) {
            reject(*row, "Id is not an unsigned integer: '" + f[column[0]] + "'");
            continue;
        }
        const auto score = parse_int<int>(f[column[3]]);
        if (!score || *score < 1 || *score > 5) {
            reject(*row, "Score must be an integer in 1..5: '" + f[column[3]] + "'");
            continue;
        }
        if (trim(f[column[5]]).empty()) {
            reject(*row, "empty review body");
            continue;
        }
        if (!seen.insert(*id).second) {
            reject(*row, "duplicate Id " + std::to_string(*id));
            continue;
        }
        result.records.push_back({*id, f[column[1]], f[column[2]], *score, f[column[4]], f[column[5]]});
    }
    return result;
}

CorpusParseResult parse_corpus(const std::filesystem::path& path) {
    const auto bytes = io::read_file(path);
    return parse_corpus_text(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

std::string format_corpus(const std::vector<ReviewRecord>& records) {
    std::string out = "Id,ProductId,UserId,Score,Summary,Text\n";
    for (const auto& r : records) {
        out += std::to_string(r.id);
        out += ',';
        out += quote_field(r.product_id);
        out += ',';
        out += quote_field(r.user_id);
        out += ',';
        out += std::to_string(r.score);
        out += ',';
        out += quote_field(r.summary);
        out += ',';
        out += quote_field(r.body);
        out += '\n';
    }
    return out;
}

std::string embedding_text(const ReviewRecord& record) {
    if (trim(record.summary).empty()) return record.body;
    return record.summary + ": " + record.body;
}

}  // namespace v2v::data
