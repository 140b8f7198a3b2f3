#include "v2v/data/split.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>
#include <unordered_set>

#include "v2v/binary_io.hpp"
#include "v2v/error.hpp"
#include "v2v/rng.hpp"

namespace v2v::data {
namespace {

constexpr std::uint64_t kSplitStream = 0x5917;

void check_fraction(double f, const char* name) {
    if (!(f >= 0.0 && f < 1.0)) throw Error(ErrorCode::BadFraction, std::string(name) + " must be in [0, 1)");
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    return s.substr(first, s.find_last_not_of(" \t\r") - first + 1);
}

std::uint64_t parse_u64(std::string_view s, std::size_t line) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
        throw Error(ErrorCode::HeaderMismatch, "split file line " + std::to_string(line) + ": bad integer '" +
                                                   std::string(s) + "'");
    }
    return v;
}

}  // namespace

std::size_t round_half_up(double x) { return static_cast<std::size_t>(std::floor(x + 0.5)); }

SplitIndices split_dataset(std::span<const std::uint64_t> ids, double test_frac, double val_frac, std::uint64_t seed) {
    check_fraction(test_frac, "test fraction");
    check_fraction(val_frac, "validation fraction");
    std::vector<std::uint64_t> order(ids.begin(), ids.end());
    std::sort(order.begin(), order.end());
    if (std::adjacent_find(order.begin(), order.end()) != order.end()) {
        throw Error(ErrorCode::DuplicateId, "split input has repeated ids");
    }

    const std::size_t n = order.size();
    const std::size_t n_test = round_half_up(test_frac * static_cast<double>(n));
    const std::size_t n_val = round_half_up(val_frac * static_cast<double>(n - n_test));
    if (n_test + n_val >= n) {
        throw Error(ErrorCode::BadFraction, "fractions leave no training records out of " + std::to_string(n));
    }

    auto rng = Xoshiro256::stream(seed, kSplitStream);
    rng.shuffle(std::span<std::uint64_t>(order));

    SplitIndices split;
    split.seed = seed;
    split.test.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
    split.validation.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test),
                            order.begin() + static_cast<std::ptrdiff_t>(n_test + n_val));
    split.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test + n_val), order.end());
    std::sort(split.test.begin(), split.test.end());
    std::sort(split.validation.begin(), split.validation.end());
    std::sort(split.train.begin(), split.train.end());
    return split;
}

std::string format_split(const SplitIndices& split) {
    std::ostringstream out;
    out << "seed: " << split.seed << '\n';
    auto section = [&out](const char* name, const std::vector<std::uint64_t>& ids) {
        out << name << ":\n";
        for (auto id : ids) out << id << '\n';
    };
    section("train", split.train);
    section("validation", split.validation);
    section("test", split.test);
    return out.str();
}

SplitIndices parse_split(std::string_view text) {
    SplitIndices split;
    bool have_seed = false;
    std::vector<std::uint64_t>* current = nullptr;
    bool seen[3] = {false, false, false};
    std::unordered_set<std::uint64_t> all;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        const auto line = trim(text.substr(0, nl));
        text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
        ++line_no;
        if (line.empty()) continue;
        if (line.starts_with("seed:")) {
            if (have_seed || current != nullptr) {
                throw Error(ErrorCode::HeaderMismatch, "seed line must come first, once");
            }
            split.seed = parse_u64(trim(line.substr(5)), line_no);
            have_seed = true;
            continue;
        }
        const char* names[] = {"train:", "validation:", "test:"};
        std::vector<std::uint64_t>* targets[] = {&split.train, &split.validation, &split.test};
        bool is_section = false;
        for (int s = 0; s < 3; ++s) {
            if (line == names[s]) {
                if (seen[s]) throw Error(ErrorCode::HeaderMismatch, std::string("repeated section ") + names[s]);
                seen[s] = true;
                current = targets[s];
                is_section = true;
            }
        }
        if (is_section) continue;
        if (current == nullptr) throw Error(ErrorCode::HeaderMismatch, "id before any section header");
        const auto id = parse_u64(line, line_no);
        if (!all.insert(id).second) throw Error(ErrorCode::DuplicateId, "id " + std::to_string(id) + " appears twice");
        current->push_back(id);
    }
    if (!have_seed) throw Error(ErrorCode::HeaderMismatch, "split file has no seed line");
    if (!(seen[0] && seen[1] && seen[2])) throw Error(ErrorCode::HeaderMismatch, "split file is missing a section");
    return split;
}

void save_split(const SplitIndices& split, const std::filesystem::path& path) {
    io::write_file_atomic(path, format_split(split));
}

SplitIndices load_split(const std::filesystem::path& path) {
    const auto bytes = io::read_file(path);
    return parse_split(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

}  // namespace v2v::data
