#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "v2v/data/text.hpp"
#include "v2v/retrieval.hpp"

namespace v2v::retrieval {
namespace {

std::string cell_text(const ComparisonReport& report, const Hit& hit) {
    std::ostringstream out;
    if (const auto it = report.display.find(hit.id); it != report.display.end()) {
        out << "Title: " << it->second.title << "; Content: " << it->second.content;
    } else {
        out << "id " << hit.id;
    }
    out << " [" << std::fixed << std::setprecision(4) << hit.score << "]";
    return out.str();
}

/// Greedy word wrap; words longer than the width are hard-split.
std::vector<std::string> wrap(const std::string& text, std::size_t width) {
    std::vector<std::string> lines;
    std::string line;
    for (auto word : data::split_words(text)) {
        while (word.size() > width) {
            if (!line.empty()) {
                lines.push_back(std::move(line));
                line.clear();
            }
            lines.emplace_back(word.substr(0, width));
            word.remove_prefix(width);
        }
        if (word.empty()) continue;
        if (!line.empty() && line.size() + 1 + word.size() > width) {
            lines.push_back(std::move(line));
            line.clear();
        }
        if (!line.empty()) line.push_back(' ');
        line.append(word);
    }
    if (!line.empty()) lines.push_back(std::move(line));
    return lines;
}

nlohmann::json hits_json(const SearchResult& r) {
    auto arr = nlohmann::json::array();
    for (std::size_t i = 0; i < r.hits.size(); ++i) {
        arr.push_back({{"rank", i + 1}, {"id", r.hits[i].id}, {"score", r.hits[i].score}});
    }
    return arr;
}

}  // namespace

ComparisonReport compare_retrieval(const VectorStore& store, const EmbeddingVector& q_translated,
                                   const EmbeddingVector& q_true, std::size_t k, const CorpusIndex* corpus) {
    ComparisonReport report;
    report.k = k;
    report.translated = top_k(store, q_translated, k);
    report.truth = top_k(store, q_true, k);
    report.overlap = overlap_at_k(report.translated, report.truth);
    for (std::size_t i = 0; i < report.translated.hits.size(); ++i) {
        for (std::size_t j = 0; j < report.truth.hits.size(); ++j) {
            if (report.translated.hits[i].id == report.truth.hits[j].id) {
                report.shared.push_back({report.translated.hits[i].id, i + 1, j + 1,
                                         static_cast<long>(i) - static_cast<long>(j)});
            }
        }
    }
    if (corpus != nullptr) {
        for (const auto* list : {&report.translated, &report.truth}) {
            for (const auto& hit : list->hits) {
                if (const auto it = corpus->find(hit.id); it != corpus->end()) {
                    report.display[hit.id] = {it->second.summary, it->second.body};
                }
            }
        }
    }
    return report;
}

std::string comparison_to_json(std::span<const std::pair<std::uint64_t, ComparisonReport>> reports) {
    auto queries = nlohmann::json::array();
    for (const auto& [query_id, r] : reports) {
        auto shared = nlohmann::json::array();
        for (const auto& s : r.shared) {
            shared.push_back({{"id", s.id},
                              {"rank_translated", s.rank_translated},
                              {"rank_true", s.rank_true},
                              {"displacement", s.displacement}});
        }
        auto display = nlohmann::json::object();
        for (const auto& [id, d] : r.display) display[std::to_string(id)] = {{"title", d.title}, {"content", d.content}};
        queries.push_back({{"query_id", query_id},
                           {"k", r.k},
                           {"overlap_at_k", r.overlap},
                           {"translated", hits_json(r.translated)},
                           {"true", hits_json(r.truth)},
                           {"shared", shared},
                           {"display", display}});
    }
    return nlohmann::json{{"queries", queries}}.dump(2) + "\n";
}

std::string comparison_to_text(const ComparisonReport& report, std::size_t column_width) {
    const std::size_t rank_width = 6;
    std::ostringstream out;
    auto row = [&](const std::string& rank, const std::vector<std::string>& left, const std::vector<std::string>& right) {
        const std::size_t lines = std::max<std::size_t>(1, std::max(left.size(), right.size()));
        for (std::size_t i = 0; i < lines; ++i) {
            out << std::left << std::setw(static_cast<int>(rank_width)) << (i == 0 ? rank : "") << "| "
                << std::setw(static_cast<int>(column_width)) << (i < left.size() ? left[i] : "") << " | "
                << (i < right.size() ? right[i] : "") << '\n';
        }
    };
    const std::string rule(rank_width + 2 * column_width + 5, '-');
    row("Rank", {"Translated query"}, {"True query"});
    out << rule << '\n';
    const std::size_t n = std::max(report.translated.hits.size(), report.truth.hits.size());
    for (std::size_t i = 0; i < n; ++i) {
        const auto left = i < report.translated.hits.size() ? wrap(cell_text(report, report.translated.hits[i]), column_width)
                                                            : std::vector<std::string>{};
        const auto right =
            i < report.truth.hits.size() ? wrap(cell_text(report, report.truth.hits[i]), column_width) : std::vector<std::string>{};
        row(std::to_string(i + 1), left, right);
        out << rule << '\n';
    }
    out << "overlap@" << report.k << " = " << std::fixed << std::setprecision(3) << report.overlap << '\n';
    return out.str();
}

}  // namespace v2v::retrieval
