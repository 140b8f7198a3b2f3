#include <algorithm>
#include <cstring>
#include <numeric>
#include <set>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "v2v/data/corpus.hpp"
#include "v2v/data/pairs.hpp"
#include "v2v/data/split.hpp"
#include "v2v/data/synth.hpp"
#include "v2v/data/text.hpp"

namespace v2v {
namespace {

using data::ReviewRecord;

// ---- corpus ----

TEST(Corpus, ParsesQuotedFieldsAndExtraColumns) {
    const std::string csv =
        "Extra,Id,ProductId,UserId,Score,Summary,Text\n"
        "x,1,P1,U1,5,Great,\"Tasty, crunchy \"\"chips\"\"\nwith a second line\"\n"
        "y,2,P2,U2,3,Meh,Fine\r\n";
    const auto r = data::parse_corpus_text(csv);
    ASSERT_EQ(r.records.size(), 2U);
    EXPECT_TRUE(r.diagnostics.empty());
    EXPECT_EQ(r.records[0].id, 1U);
    EXPECT_EQ(r.records[0].body, "Tasty, crunchy \"chips\"\nwith a second line");
    EXPECT_EQ(r.records[1].summary, "Meh");
    EXPECT_EQ(r.records[1].body, "Fine");
    EXPECT_EQ(r.records[1].score, 3);
}

TEST(Corpus, BadRowsAreReportedNotFatal) {
    const std::string csv =
        "Id,ProductId,UserId,Score,Summary,Text\n"
        "1,P,U,5,S,ok\n"
        "x,P,U,5,S,bad id\n"
        "2,P,U,9,S,bad score\n"
        "3,P,U,4,S,\n"
        "1,P,U,4,S,duplicate\n"
        "4,P,U,4,S\n"
        "5,P,U,1,S,fine\n";
    const auto r = data::parse_corpus_text(csv);
    ASSERT_EQ(r.records.size(), 2U);
    EXPECT_EQ(r.records[1].id, 5U);
    ASSERT_EQ(r.diagnostics.size(), 5U);
    EXPECT_EQ(r.diagnostics[0].line, 3U);
}

TEST(Corpus, HeaderErrors) {
    EXPECT_V2V_ERROR(data::parse_corpus_text("Id,ProductId,UserId,Score,Summary\n1,a,b,5,c\n"), ErrorCode::HeaderMismatch);
    EXPECT_V2V_ERROR(data::parse_corpus_text(""), ErrorCode::HeaderMismatch);
    EXPECT_V2V_ERROR(data::parse_corpus_text("Id,Id,ProductId,UserId,Score,Summary,Text\n"), ErrorCode::HeaderMismatch);
    EXPECT_V2V_ERROR(data::parse_corpus("/nonexistent/reviews.csv"), ErrorCode::FileNotFound);
}

TEST(Corpus, FormatRoundTrip) {
    std::vector<ReviewRecord> records{{7, "P", "U", 4, "Say \"hi\"", "a, b\nc"}, {9, "Q", "V", 1, "", "plain"}};
    const auto r = data::parse_corpus_text(data::format_corpus(records));
    EXPECT_TRUE(r.diagnostics.empty());
    EXPECT_EQ(r.records, records);
}

// ---- text ----

std::string words(std::size_t n) {
    std::string s;
    for (std::size_t i = 0; i < n; ++i) s += (i ? " w" : "w") + std::to_string(i);
    return s;
}

TEST(Text, TokenApproximation) {
    EXPECT_EQ(data::approx_token_count(""), 0U);
    EXPECT_EQ(data::approx_token_count("one"), 2U);
    EXPECT_EQ(data::approx_token_count("one two three"), 4U);
    EXPECT_EQ(data::approx_token_count(words(6000)), 8000U);
    for (std::size_t w = 0; w < 200; ++w) EXPECT_EQ(data::approx_token_count(words(w)), (4 * w + 2) / 3);
}

TEST(Text, FilterByLength) {
    std::vector<ReviewRecord> records{{1, "", "", 5, "", words(6000)}, {2, "", "", 5, "", words(6001)}};
    const auto kept = data::filter_by_length(records, 8000);
    ASSERT_EQ(kept.size(), 1U);
    EXPECT_EQ(kept[0].id, 1U);
    EXPECT_TRUE(data::filter_by_length(records, 0).empty());
}

TEST(Text, SampleSubset) {
    std::vector<ReviewRecord> records;
    for (std::uint64_t i = 0; i < 100; ++i) records.push_back({99 - i, "", "", 5, "", "x"});
    const auto a = data::sample_subset(records, 30, 5);
    EXPECT_EQ(a, data::sample_subset(records, 30, 5));
    EXPECT_NE(a, data::sample_subset(records, 30, 6));
    ASSERT_EQ(a.size(), 30U);
    EXPECT_TRUE(std::is_sorted(a.begin(), a.end(), [](const auto& x, const auto& y) { return x.id < y.id; }));
    // Input order does not matter.
    std::reverse(records.begin(), records.end());
    EXPECT_EQ(a, data::sample_subset(records, 30, 5));
    EXPECT_EQ(data::sample_subset(records, 100, 1).size(), 100U);
    EXPECT_V2V_ERROR(data::sample_subset(records, 101, 1), ErrorCode::NotEnoughRecords);
}

TEST(Text, SampleSubsetIsUniform) {
    std::vector<ReviewRecord> records;
    for (std::uint64_t i = 0; i < 10; ++i) records.push_back({i, "", "", 5, "", "x"});
    std::vector<int> hits(10, 0);
    for (std::uint64_t seed = 0; seed < 4000; ++seed) {
        for (const auto& r : data::sample_subset(records, 3, seed)) ++hits[r.id];
    }
    for (int h : hits) EXPECT_NEAR(h, 1200, 120);
}

TEST(Text, ChunkingSplitsAt128Words) {
    const auto chunks = data::chunk_text(words(300));
    ASSERT_EQ(chunks.size(), 3U);
    EXPECT_EQ(data::split_words(chunks[0]).size(), 128U);
    EXPECT_EQ(data::split_words(chunks[1]).size(), 128U);
    EXPECT_EQ(data::split_words(chunks[2]).size(), 44U);
    EXPECT_EQ(data::chunk_text(words(128)).size(), 1U);
    EXPECT_TRUE(data::chunk_text("   ").empty());
    EXPECT_V2V_ERROR(data::chunk_text("a b", 0), ErrorCode::ConfigInvalid);
}

TEST(Text, ChunkConcatenationPreservesWords) {
    Xoshiro256 rng(31);
    for (int trial = 0; trial < 200; ++trial) {
        std::string text;
        const std::size_t n = rng.below(700);
        for (std::size_t i = 0; i < n; ++i) {
            text += std::string(1 + rng.below(3), " \t\n"[rng.below(3)]);
            text += "t" + std::to_string(rng.below(50));
        }
        std::vector<std::string> joined;
        for (const auto& c : data::chunk_text(text, 1 + rng.below(200))) {
            for (auto w : data::split_words(c)) joined.emplace_back(w);
        }
        std::vector<std::string> original;
        for (auto w : data::split_words(text)) original.emplace_back(w);
        EXPECT_EQ(joined, original);
    }
}

TEST(Text, AverageChunkEmbeddings) {
    const std::vector<EmbeddingVector> chunks{EmbeddingVector{1, 0}, EmbeddingVector{0, 1}, EmbeddingVector{2, 2}};
    const auto m = data::average_chunk_embeddings(chunks);
    EXPECT_DOUBLE_EQ(m[0], 1.0);
    EXPECT_DOUBLE_EQ(m[1], 1.0);
    EXPECT_V2V_ERROR(data::average_chunk_embeddings({}), ErrorCode::EmptyInput);
}

// ---- pairs ----

data::PairDataset sample_pairs(std::size_t n, std::size_t d_in, std::size_t d_out, std::uint64_t seed) {
    Xoshiro256 rng(seed);
    data::PairDataset ds(d_in, d_out);
    for (std::size_t i = 0; i < n; ++i) {
        ds.add(1000 + 3 * i, test::random_vector(rng, d_in), test::random_vector(rng, d_out));
    }
    return ds;
}

TEST(Pairs, Accessors) {
    auto ds = sample_pairs(5, 3, 4, 1);
    EXPECT_EQ(ds.row_of(1006), 2U);
    EXPECT_FALSE(ds.find(1).has_value());
    EXPECT_V2V_ERROR(ds.row_of(1), ErrorCode::UnknownId);
    const std::vector<double> s3(3, 0.0), s2(2, 0.0), t4(4, 0.0);
    EXPECT_V2V_ERROR(ds.add(1000, s3, t4), ErrorCode::DuplicateId);
    EXPECT_V2V_ERROR(ds.add(1, s2, t4), ErrorCode::DimensionMismatch);
    const std::vector<double> bad{0, std::nan(""), 0, 0};
    EXPECT_V2V_ERROR(ds.add(2, s3, bad), ErrorCode::NonFinite);
    EXPECT_V2V_ERROR(data::PairDataset(3, 0), ErrorCode::BadDimension);
}

TEST(Pairs, RoundTripIsBitIdentical) {
    for (const auto& ds : {sample_pairs(17, 5, 9, 2), sample_pairs(0, 5, 9, 2), sample_pairs(4, 0, 6, 3)}) {
        const auto bytes = data::encode_pairs(ds);
        EXPECT_EQ(bytes.size(), 4 + 4 + 8 + 4 + 4 + ds.size() * (8 + 4 * (ds.d_in() + ds.d_out())) + 8);
        const auto back = data::decode_pairs(bytes);
        EXPECT_EQ(back, ds);
        EXPECT_EQ(data::encode_pairs(back), bytes);
    }
}

TEST(Pairs, CorruptionErrors) {
    const auto bytes = data::encode_pairs(sample_pairs(3, 2, 3, 4));
    auto magic = bytes;
    magic[1] = std::byte{'Z'};
    EXPECT_V2V_ERROR(data::decode_pairs(magic), ErrorCode::BadMagic);
    auto version = bytes;
    version[4] = std::byte{9};
    EXPECT_V2V_ERROR(data::decode_pairs(version), ErrorCode::VersionUnsupported);
    for (std::size_t len = 0; len < bytes.size(); ++len) {
        EXPECT_V2V_ERROR(data::decode_pairs(std::span(bytes).first(len)), ErrorCode::TruncatedFile);
    }
    for (std::size_t i = 24; i < bytes.size(); ++i) {
        auto flipped = bytes;
        flipped[i] ^= std::byte{1};
        EXPECT_V2V_ERROR(data::decode_pairs(flipped), ErrorCode::ChecksumMismatch);
    }
    auto longer = bytes;
    longer.push_back(std::byte{0});
    EXPECT_V2V_ERROR(data::decode_pairs(longer), ErrorCode::ChecksumMismatch);
}

TEST(Pairs, SaveAndLoad) {
    test::TempDir dir;
    const auto ds = sample_pairs(6, 2, 2, 5);
    data::save_pairs(ds, dir / "p.v2vp");
    EXPECT_EQ(data::load_pairs(dir / "p.v2vp"), ds);
    EXPECT_V2V_ERROR(data::load_pairs(dir / "nope.v2vp"), ErrorCode::FileNotFound);
}

// ---- split ----

std::vector<std::uint64_t> iota_ids(std::size_t n) {
    std::vector<std::uint64_t> ids(n);
    std::iota(ids.begin(), ids.end(), 0);
    return ids;
}

TEST(Split, DefaultFractionsOnFiftyThousand) {
    const auto s = data::split_dataset(iota_ids(50000), 0.2, 0.2, 1);
    EXPECT_EQ(s.test.size(), 10000U);
    EXPECT_EQ(s.validation.size(), 8000U);
    EXPECT_EQ(s.train.size(), 32000U);
}

TEST(Split, PartitionPropertiesAndDeterminism) {
    Xoshiro256 rng(41);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + rng.below(500);
        const double tf = static_cast<double>(rng.below(50)) / 100.0;
        const double vf = static_cast<double>(rng.below(50)) / 100.0;
        const auto ids = iota_ids(n);
        const auto s = data::split_dataset(ids, tf, vf, trial);
        EXPECT_EQ(s, data::split_dataset(ids, tf, vf, trial));
        EXPECT_EQ(s.test.size(), data::round_half_up(tf * static_cast<double>(n)));
        EXPECT_EQ(s.validation.size(), data::round_half_up(vf * static_cast<double>(n - s.test.size())));
        std::set<std::uint64_t> all;
        for (const auto* part : {&s.train, &s.validation, &s.test}) {
            EXPECT_TRUE(std::is_sorted(part->begin(), part->end()));
            all.insert(part->begin(), part->end());
        }
        EXPECT_EQ(all.size(), n);
        EXPECT_EQ(s.train.size() + s.validation.size() + s.test.size(), n);
        // Input order does not matter.
        auto reversed = ids;
        std::reverse(reversed.begin(), reversed.end());
        EXPECT_EQ(s, data::split_dataset(reversed, tf, vf, trial));
    }
}

TEST(Split, Errors) {
    EXPECT_V2V_ERROR(data::split_dataset(iota_ids(10), 1.0, 0.2, 1), ErrorCode::BadFraction);
    EXPECT_V2V_ERROR(data::split_dataset(iota_ids(10), -0.1, 0.2, 1), ErrorCode::BadFraction);
    EXPECT_V2V_ERROR(data::split_dataset(iota_ids(1), 0.5, 0.0, 1), ErrorCode::BadFraction);
    const std::vector<std::uint64_t> dup{1, 2, 2};
    EXPECT_V2V_ERROR(data::split_dataset(dup, 0.2, 0.2, 1), ErrorCode::DuplicateId);
}

TEST(Split, RoundHalfUp) {
    EXPECT_EQ(data::round_half_up(2.5), 3U);
    EXPECT_EQ(data::round_half_up(2.4999), 2U);
    EXPECT_EQ(data::round_half_up(0.0), 0U);
}

TEST(Split, FileRoundTripAndErrors) {
    const auto s = data::split_dataset(iota_ids(37), 0.2, 0.2, 9);
    const auto text = data::format_split(s);
    EXPECT_EQ(text.rfind("seed: 9\n", 0), 0U);
    EXPECT_EQ(data::parse_split(text), s);
    EXPECT_V2V_ERROR(data::parse_split("train:\n1\nvalidation:\ntest:\n"), ErrorCode::HeaderMismatch);
    EXPECT_V2V_ERROR(data::parse_split("seed: 1\ntrain:\n1\nvalidation:\n1\ntest:\n"), ErrorCode::DuplicateId);
    EXPECT_V2V_ERROR(data::parse_split("seed: 1\ntrain:\nabc\nvalidation:\ntest:\n"), ErrorCode::HeaderMismatch);
    EXPECT_V2V_ERROR(data::parse_split("seed: 1\ntrain:\n1\ntest:\n"), ErrorCode::HeaderMismatch);
}

// ---- synth ----

TEST(Synth, DeterministicAndShaped) {
    data::SynthConfig cfg;
    cfg.n = 50;
    cfg.d_in = 8;
    cfg.d_out = 12;
    cfg.seed = 3;
    const auto a = data::generate_synthetic_pairs(cfg);
    EXPECT_EQ(a.pairs, data::generate_synthetic_pairs(cfg).pairs);
    EXPECT_EQ(a.pairs.size(), 50U);
    EXPECT_EQ(a.pairs.id(49), 49U);
    cfg.seed = 4;
    EXPECT_NE(a.pairs, data::generate_synthetic_pairs(cfg).pairs);
}

TEST(Synth, NoiselessTargetsFollowTheMap) {
    for (auto kind : {data::MapKind::linear, data::MapKind::linear_tanh}) {
        data::SynthConfig cfg;
        cfg.n = 20;
        cfg.d_in = 6;
        cfg.d_out = 10;
        cfg.seed = 5;
        cfg.kind = kind;
        const auto s = data::generate_synthetic_pairs(cfg);
        for (std::size_t r = 0; r < s.pairs.size(); ++r) {
            const auto src = s.pairs.source(r);
            EXPECT_NEAR(l2_norm(EmbeddingVector::from(src).values()), 1.0, 1e-6);
            const auto expect = s.map.apply(EmbeddingVector::from(src).values());
            for (std::size_t c = 0; c < 10; ++c) EXPECT_NEAR(s.pairs.target(r)[c], expect[c], 1e-6);
        }
    }
}

TEST(Synth, MapIsSharedAcrossSizesAndNoiseDegrades) {
    data::SynthConfig cfg;
    cfg.n = 10;
    cfg.d_in = 4;
    cfg.d_out = 4;
    cfg.seed = 6;
    const auto small = data::generate_synthetic_pairs(cfg);
    cfg.n = 40;
    cfg.noise_sigma = 0.1;
    const auto noisy = data::generate_synthetic_pairs(cfg);
    EXPECT_EQ(small.map.m, noisy.map.m);
    double mean_cos = 0.0;
    for (std::size_t r = 0; r < noisy.pairs.size(); ++r) {
        const auto clean = noisy.map.apply(EmbeddingVector::from(noisy.pairs.source(r)).values());
        mean_cos += cosine_similarity(clean, EmbeddingVector::from(noisy.pairs.target(r))) / 40.0;
    }
    EXPECT_LT(mean_cos, 0.999);
    EXPECT_GT(mean_cos, 0.5);
}

TEST(Synth, Errors) {
    data::SynthConfig cfg;
    cfg.n = 0;
    EXPECT_V2V_ERROR(data::generate_synthetic_pairs(cfg), ErrorCode::BadDimension);
    cfg.n = 2;
    cfg.d_out = 0;
    EXPECT_V2V_ERROR(data::generate_synthetic_pairs(cfg), ErrorCode::BadDimension);
    EXPECT_V2V_ERROR(data::parse_map_kind("cubic"), ErrorCode::ConfigInvalid);
    EXPECT_EQ(data::parse_map_kind("linear+tanh"), data::MapKind::linear_tanh);
}

TEST(Synth, ModelFromMapReproducesTargets) {
    data::SynthConfig cfg;
    cfg.n = 5;
    cfg.d_in = 6;
    cfg.d_out = 3;
    cfg.seed = 8;
    const auto s = data::generate_synthetic_pairs(cfg);
    const auto model = data::model_from_map(s.map);
    for (std::size_t r = 0; r < 5; ++r) {
        const auto y = nn::forward(model, EmbeddingVector::from(s.pairs.source(r)), nn::InferMode{});
        EXPECT_GT(cosine_similarity(y.output, EmbeddingVector::from(s.pairs.target(r))), 0.99999);
    }
}

}  // namespace
}  // namespace v2v
