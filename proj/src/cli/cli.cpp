#include "v2v/cli.hpp"

#include <algorithm>
#include <iomanip>
#include <memory>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "v2v/binary_io.hpp"
#include "v2v/checksum.hpp"
#include "v2v/data/corpus.hpp"
#include "v2v/data/pairs.hpp"
#include "v2v/data/split.hpp"
#include "v2v/data/synth.hpp"
#include "v2v/data/text.hpp"
#include "v2v/error.hpp"
#include "v2v/nn.hpp"
#include "v2v/retrieval.hpp"
#include "v2v/simd/kernels.hpp"
#include "v2v/training.hpp"

namespace v2v::cli {
namespace {

[[noreturn]] void usage(const std::string& why) { throw Error(ErrorCode::ConfigInvalid, why); }

std::vector<std::size_t> parse_widths(const std::string& text) {
    std::vector<std::size_t> widths;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        std::size_t used = 0;
        unsigned long long w = 0;
        try {
            w = std::stoull(item, &used);
        } catch (const std::exception&) {
            usage("--arch expects comma-separated positive widths, got '" + text + "'");
        }
        if (used != item.size() || w == 0 || item.front() == '-') {
            usage("--arch expects comma-separated positive widths, got '" + text + "'");
        }
        widths.push_back(static_cast<std::size_t>(w));
    }
    if (widths.empty() || text.back() == ',') usage("--arch expects comma-separated positive widths, got '" + text + "'");
    return widths;
}

std::string hex(std::uint64_t crc) { return training::checksum_hex(crc); }

/// Vector files are pair files with d_in = 0 whose vectors sit in the target
/// slot; for full pair files the target column is used.
std::vector<std::pair<std::uint64_t, EmbeddingVector>> read_vectors(const data::PairDataset& ds) {
    std::vector<std::pair<std::uint64_t, EmbeddingVector>> out;
    out.reserve(ds.size());
    for (std::size_t r = 0; r < ds.size(); ++r) out.emplace_back(ds.id(r), EmbeddingVector::from(ds.target(r)));
    return out;
}

struct Context {
    std::ostream& out;
    std::ostream& err;
};

void print_seed(std::ostream& out, std::optional<std::uint64_t> seed) {
    if (seed) {
        out << "seed: " << *seed << '\n';
    } else {
        out << "seed: none (deterministic command)\n";
    }
}

// ---- synth ----

struct SynthArgs {
    std::size_t n = 0;
    std::size_t d_in = nn::kDefaultInputDim;
    std::size_t d_out = nn::kDefaultOutputDim;
    std::uint64_t seed = 0;
    double noise = 0.0;
    std::string map = "linear";
    std::string out;
};

void run_synth(const SynthArgs& a, Context& ctx) {
    print_seed(ctx.out, a.seed);
    if (a.noise < 0.0) usage("--noise must be non-negative");
    data::SynthConfig cfg;
    cfg.n = a.n;
    cfg.d_in = a.d_in;
    cfg.d_out = a.d_out;
    cfg.seed = a.seed;
    cfg.noise_sigma = a.noise;
    cfg.kind = data::parse_map_kind(a.map);
    const auto synth = data::generate_synthetic_pairs(cfg);
    data::save_pairs(synth.pairs, a.out);
    ctx.out << "wrote " << synth.pairs.size() << " pairs (" << a.d_in << " -> " << a.d_out << ", map " << a.map
            << ", noise " << a.noise << ") to " << a.out << '\n';
}

// ---- ingest ----

struct IngestArgs {
    std::string csv;
    std::size_t max_tokens = data::kDefaultMaxTokens;
    std::size_t sample = 50000;
    std::uint64_t seed = 0;
    std::string out;
};

void run_ingest(const IngestArgs& a, Context& ctx) {
    print_seed(ctx.out, a.seed);
    auto parsed = data::parse_corpus(a.csv);
    for (const auto& d : parsed.diagnostics) ctx.err << a.csv << ":" << d.line << ": skipped row: " << d.message << '\n';
    const std::size_t n_parsed = parsed.records.size();
    auto kept = data::filter_by_length(std::move(parsed.records), a.max_tokens);
    const std::size_t n_kept = kept.size();
    auto sampled = data::sample_subset(std::move(kept), a.sample, a.seed);

    std::size_t words = 0;
    std::size_t longest = 0;
    for (const auto& r : sampled) {
        const auto w = data::split_words(r.body).size();
        words += w;
        longest = std::max(longest, w);
    }
    ctx.out << "parsed:   " << n_parsed << " records (" << parsed.diagnostics.size() << " rows skipped)\n"
            << "filtered: " << n_kept << " records with <= " << a.max_tokens << " approximate tokens\n"
            << "sampled:  " << sampled.size() << " records\n";
    if (!sampled.empty()) {
        ctx.out << "words:    mean " << std::fixed << std::setprecision(1)
                << static_cast<double>(words) / static_cast<double>(sampled.size()) << ", max " << longest << '\n';
        ctx.out.unsetf(std::ios::floatfield);
    }
    if (!a.out.empty()) {
        io::write_file_atomic(a.out, data::format_corpus(sampled));
        ctx.out << "wrote sample to " << a.out << '\n';
    }
}

// ---- split ----

struct SplitArgs {
    std::string pairs;
    double test_frac = data::kDefaultTestFraction;
    double val_frac = data::kDefaultValidationFraction;
    std::uint64_t seed = 0;
    std::string out;
};

void run_split(const SplitArgs& a, Context& ctx) {
    print_seed(ctx.out, a.seed);
    const auto ds = data::load_pairs(a.pairs);
    const auto split = data::split_dataset(ds.ids(), a.test_frac, a.val_frac, a.seed);
    data::save_split(split, a.out);
    ctx.out << "train " << split.train.size() << ", validation " << split.validation.size() << ", test "
            << split.test.size() << " -> " << a.out << '\n';
}

// ---- train ----

struct TrainArgs {
    std::string pairs;
    std::string split;
    std::size_t epochs = 75;
    std::size_t batch = 32;
    double lr = 1e-3;
    float dropout = nn::kDefaultDropout;
    std::string arch = "1536,1536,1536";
    std::uint64_t seed = 0;
    std::string out;
    std::string report;
    std::string history;
};

void run_train(const TrainArgs& a, Context& ctx) {
    print_seed(ctx.out, a.seed);
    training::TrainConfig cfg;
    cfg.epochs = a.epochs;
    cfg.batch_size = a.batch;
    cfg.adam.learning_rate = a.lr;
    cfg.dropout = a.dropout;
    cfg.hidden_widths = parse_widths(a.arch);
    cfg.seed = a.seed;
    training::validate_config(cfg);

    const auto ds = data::load_pairs(a.pairs);
    const auto split = data::load_split(a.split);
    if (ds.d_in() == 0) throw Error(ErrorCode::BadDimension, a.pairs + " holds no source vectors");
    cfg.val_frac = static_cast<double>(split.validation.size()) /
                   static_cast<double>(split.train.size() + split.validation.size() + split.test.size());

    const auto arch = nn::make_architecture(ds.d_in(), cfg.hidden_widths, ds.d_out(), cfg.dropout);
    auto model = nn::init_model<float>(arch, cfg.seed);
    ctx.out << "model: " << ds.d_in();
    for (auto w : cfg.hidden_widths) ctx.out << " -> " << w;
    ctx.out << " -> " << ds.d_out() << ", " << model.parameter_count() << " parameters, kernels "
            << simd::to_string(simd::active().isa) << '\n';

    auto on_epoch = [&](const training::EpochMetrics& m) {
        ctx.out << "epoch " << m.epoch << "/" << cfg.epochs << "  train_loss " << std::setprecision(8) << m.train_loss
                << "  val_loss " << m.val_loss << "  val_cos " << std::setprecision(5) << m.val_mean_cosine << "  ("
                << std::setprecision(3) << m.seconds << " s)\n"
                << std::flush;
    };
    auto result = training::train(std::move(model), ds, split, cfg, on_epoch);
    const auto evaluation = training::evaluate(result.model, ds, split.validation);

    nn::save_model(result.model, a.out);
    training::Report report;
    report.config = cfg;
    report.history = result.history;
    report.stats = evaluation.stats;
    report.stats_split = "validation";
    report.input_checksums = {{"pairs", hex(crc64_file(a.pairs))}, {"split", hex(crc64_file(a.split))}};
    report.output_dim = result.model.output_dim();
    report.kernel_set = std::string(simd::to_string(simd::active().isa));
    training::write_report(report, a.report);
    if (!a.history.empty()) training::write_history_csv(result.history, a.history);

    ctx.out << "validation mean cosine " << std::setprecision(6) << evaluation.stats.mean << " (std "
            << evaluation.stats.std << ")\n"
            << "wrote " << a.out << " and " << a.report << '\n';
}

// ---- eval ----

struct EvalArgs {
    std::string model;
    std::string pairs;
    std::string split;
    std::string report;
};

void print_stats(std::ostream& out, const training::CosStats& s) {
    out << std::setprecision(6) << "n " << s.n << "  mean " << s.mean << "  std " << s.std << "  min " << s.min
        << "  max " << s.max << '\n';
}

void run_eval(const EvalArgs& a, Context& ctx) {
    print_seed(ctx.out, std::nullopt);
    const auto model = nn::load_model(a.model);
    const auto ds = data::load_pairs(a.pairs);
    const auto split = data::load_split(a.split);
    if (split.test.empty()) throw Error(ErrorCode::EmptyInput, a.split + " has an empty test section");
    const auto evaluation = training::evaluate(model, ds, split.test);

    training::Report report;
    report.stats = evaluation.stats;
    report.stats_split = "test";
    report.per_id = evaluation.per_id;
    report.input_checksums = {
        {"model", hex(crc64_file(a.model))}, {"pairs", hex(crc64_file(a.pairs))}, {"split", hex(crc64_file(a.split))}};
    report.output_dim = model.output_dim();
    report.kernel_set = std::string(simd::to_string(simd::active().isa));
    training::write_report(report, a.report);

    ctx.out << "test split: ";
    print_stats(ctx.out, evaluation.stats);
    ctx.out << "wrote " << a.report << '\n';
}

// ---- predict ----

struct PredictArgs {
    std::string model;
    std::string in;
    std::string out;
};

void run_predict(const PredictArgs& a, Context& ctx) {
    print_seed(ctx.out, std::nullopt);
    const auto model = nn::load_model(a.model);
    const auto input = data::load_pairs(a.in);
    const std::size_t dim = input.d_in() > 0 ? input.d_in() : input.d_out();
    if (dim != model.input_dim()) {
        throw Error(ErrorCode::DimensionMismatch, a.in + " holds " + std::to_string(dim) + "-d vectors; model expects " +
                                                      std::to_string(model.input_dim()));
    }
    Matrix sources(input.size(), dim);
    for (std::size_t r = 0; r < input.size(); ++r) {
        const auto v = input.d_in() > 0 ? input.source(r) : input.target(r);
        std::copy(v.begin(), v.end(), sources.row(r).begin());
    }
    const auto predictions = training::predict_batch(model, sources);
    data::PairDataset out(0, model.output_dim());
    for (std::size_t r = 0; r < input.size(); ++r) out.add(input.id(r), std::span<const double>{}, predictions.row(r));
    data::save_pairs(out, a.out);
    ctx.out << "translated " << out.size() << " vectors (" << dim << " -> " << model.output_dim() << ") to " << a.out
            << '\n';
}

// ---- search ----

struct SearchArgs {
    std::string store;
    std::string query;
    std::size_t k = 5;
};

void run_search(const SearchArgs& a, Context& ctx) {
    print_seed(ctx.out, std::nullopt);
    const auto store = retrieval::load_store(a.store);
    const auto queries = read_vectors(data::load_pairs(a.query));
    for (const auto& [qid, q] : queries) {
        const auto result = retrieval::top_k(store, q, a.k);
        ctx.out << "query " << qid << '\n';
        for (std::size_t i = 0; i < result.hits.size(); ++i) {
            ctx.out << "  " << std::setw(3) << i + 1 << "  id " << std::setw(10) << result.hits[i].id << "  score "
                    << std::fixed << std::setprecision(6) << result.hits[i].score << '\n';
            ctx.out.unsetf(std::ios::floatfield);
        }
    }
}

// ---- compare ----

struct CompareArgs {
    std::string store;
    std::string translated;
    std::string truth;
    std::size_t k = 5;
    std::string corpus;
    std::string report;
};

void run_compare(const CompareArgs& a, Context& ctx) {
    print_seed(ctx.out, std::nullopt);
    const auto store = retrieval::load_store(a.store);
    const auto translated = read_vectors(data::load_pairs(a.translated));
    const auto truth_ds = data::load_pairs(a.truth);

    std::unique_ptr<retrieval::CorpusIndex> corpus;
    if (!a.corpus.empty()) {
        auto parsed = data::parse_corpus(a.corpus);
        corpus = std::make_unique<retrieval::CorpusIndex>();
        for (auto& r : parsed.records) corpus->emplace(r.id, std::move(r));
    }

    std::vector<std::pair<std::uint64_t, retrieval::ComparisonReport>> reports;
    double overlap_sum = 0.0;
    for (const auto& [qid, q] : translated) {
        const auto row = truth_ds.row_of(qid);
        const auto q_true = EmbeddingVector::from(truth_ds.target(row));
        auto report = retrieval::compare_retrieval(store, q, q_true, a.k, corpus.get());
        ctx.out << "query " << qid << '\n' << retrieval::comparison_to_text(report) << '\n';
        overlap_sum += report.overlap;
        reports.emplace_back(qid, std::move(report));
    }
    if (!reports.empty()) {
        ctx.out << "mean overlap@" << a.k << " over " << reports.size() << " queries: " << std::fixed
                << std::setprecision(3) << overlap_sum / static_cast<double>(reports.size()) << '\n';
        ctx.out.unsetf(std::ios::floatfield);
    }
    if (!a.report.empty()) {
        io::write_file_atomic(a.report, retrieval::comparison_to_json(reports));
        ctx.out << "wrote " << a.report << '\n';
    }
}

// ---- inspect ----

void run_inspect(const std::string& path, Context& ctx) {
    print_seed(ctx.out, std::nullopt);
    const auto model = nn::load_model(path);
    ctx.out << "model: " << path << '\n';
    const auto layers = model.layers();
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const auto& s = layers[i].spec;
        ctx.out << "  layer " << i << ": " << s.in_dim << " -> " << s.out_dim << "  "
                << (s.activation == nn::Activation::relu ? "relu" : "linear") << "  dropout " << s.dropout_rate << '\n';
    }
    ctx.out << "parameters: " << model.parameter_count() << '\n'
            << "size bytes: " << std::filesystem::file_size(path) << '\n'
            << "checksum:   " << hex(crc64_file(path)) << " (crc64/xz of file)\n";
}

int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::ConfigInvalid:
        case ErrorCode::BadFraction:
            return kUsage;
        case ErrorCode::NumericFailure:
            return kNumericFailure;
        default:
            return kDataError;
    }
}

}  // namespace

int run(std::span<const std::string> argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Translate embeddings between vector spaces with a small MLP", "vec2vec"};
    app.require_subcommand(1);
    std::string kernels = "auto";
    app.add_option("--kernels", kernels, "Kernel set: auto, scalar or avx2 (also V2V_KERNELS)")
        ->check(CLI::IsMember({"auto", "scalar", "avx2"}));

    SynthArgs synth;
    auto* c_synth = app.add_subcommand("synth", "Generate a synthetic pair file from a seeded ground-truth map");
    c_synth->add_option("--n", synth.n, "Number of pairs")->required();
    c_synth->add_option("--d-in", synth.d_in, "Source dimension")->capture_default_str();
    c_synth->add_option("--d-out", synth.d_out, "Target dimension")->capture_default_str();
    c_synth->add_option("--seed", synth.seed, "Random seed")->required();
    c_synth->add_option("--noise", synth.noise, "Gaussian noise sigma added to targets")->capture_default_str();
    c_synth->add_option("--map", synth.map, "Ground-truth map: linear or linear+tanh")
        ->check(CLI::IsMember({"linear", "linear+tanh"}))
        ->capture_default_str();
    c_synth->add_option("--out", synth.out, "Output pair file")->required();

    IngestArgs ingest;
    auto* c_ingest = app.add_subcommand("ingest", "Validate, length-filter and sample a review CSV");
    c_ingest->add_option("--csv", ingest.csv, "Review corpus CSV")->required();
    c_ingest->add_option("--max-tokens", ingest.max_tokens, "Drop reviews above this approximate token count")
        ->capture_default_str();
    c_ingest->add_option("--sample", ingest.sample, "Number of reviews to sample")->capture_default_str();
    c_ingest->add_option("--seed", ingest.seed, "Random seed")->required();
    c_ingest->add_option("--out", ingest.out, "Optional CSV for the sampled records");

    SplitArgs split;
    auto* c_split = app.add_subcommand("split", "Split pair ids into train/validation/test");
    c_split->add_option("--pairs", split.pairs, "Pair file")->required();
    c_split->add_option("--test-frac", split.test_frac, "Fraction of ids held out for test")->capture_default_str();
    c_split->add_option("--val-frac", split.val_frac, "Fraction of the remainder used for validation")
        ->capture_default_str();
    c_split->add_option("--seed", split.seed, "Random seed")->required();
    c_split->add_option("--out", split.out, "Output split file")->required();

    TrainArgs tr;
    auto* c_train = app.add_subcommand("train", "Train a translation model");
    c_train->add_option("--pairs", tr.pairs, "Pair file")->required();
    c_train->add_option("--split", tr.split, "Split file")->required();
    c_train->add_option("--epochs", tr.epochs, "Training epochs (>= 1)")->capture_default_str();
    c_train->add_option("--batch", tr.batch, "Mini-batch size")->capture_default_str();
    c_train->add_option("--lr", tr.lr, "Adam learning rate")->capture_default_str();
    c_train->add_option("--dropout", tr.dropout, "Dropout rate after hidden layers")->capture_default_str();
    c_train->add_option("--arch", tr.arch, "Comma-separated hidden widths")->capture_default_str();
    c_train->add_option("--seed", tr.seed, "Random seed")->required();
    c_train->add_option("--out", tr.out, "Output model file")->required();
    c_train->add_option("--report", tr.report, "Output JSON report")->required();
    c_train->add_option("--history", tr.history, "Optional per-epoch CSV with timings");

    EvalArgs ev;
    auto* c_eval = app.add_subcommand("eval", "Score a model on the test section of a split");
    c_eval->add_option("--model", ev.model, "Model file")->required();
    c_eval->add_option("--pairs", ev.pairs, "Pair file")->required();
    c_eval->add_option("--split", ev.split, "Split file")->required();
    c_eval->add_option("--report", ev.report, "Output JSON report")->required();

    PredictArgs pr;
    auto* c_predict = app.add_subcommand("predict", "Translate source vectors into the target space");
    c_predict->add_option("--model", pr.model, "Model file")->required();
    c_predict->add_option("--in", pr.in, "Source vectors (pair file; sources used when present)")->required();
    c_predict->add_option("--out", pr.out, "Output vector file")->required();

    SearchArgs se;
    auto* c_search = app.add_subcommand("search", "Top-k cosine search");
    c_search->add_option("--store", se.store, "Store vector file")->required();
    c_search->add_option("--query-vector", se.query, "Query vector file")->required();
    c_search->add_option("--k", se.k, "Results per query")->capture_default_str();

    CompareArgs co;
    auto* c_compare = app.add_subcommand("compare", "Compare retrieval with translated and true queries");
    c_compare->add_option("--store", co.store, "Store vector file")->required();
    c_compare->add_option("--query-translated", co.translated, "Translated query vectors")->required();
    c_compare->add_option("--query-true", co.truth, "True query vectors, matched by id")->required();
    c_compare->add_option("--k", co.k, "Results per query")->capture_default_str();
    c_compare->add_option("--corpus", co.corpus, "Optional review CSV for titles and content");
    c_compare->add_option("--report", co.report, "Optional JSON report");

    std::string inspect_model;
    auto* c_inspect = app.add_subcommand("inspect", "Describe a model file");
    c_inspect->add_option("--model", inspect_model, "Model file")->required();

    std::vector<std::string> args(argv.size() > 1 ? argv.begin() + 1 : argv.end(), argv.end());
    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    Context ctx{out, err};
    try {
        if (kernels != "auto") simd::set_active_isa(simd::parse_isa(kernels));
        if (*c_synth) run_synth(synth, ctx);
        else if (*c_ingest) run_ingest(ingest, ctx);
        else if (*c_split) run_split(split, ctx);
        else if (*c_train) run_train(tr, ctx);
        else if (*c_eval) run_eval(ev, ctx);
        else if (*c_predict) run_predict(pr, ctx);
        else if (*c_search) run_search(se, ctx);
        else if (*c_compare) run_compare(co, ctx);
        else if (*c_inspect) run_inspect(inspect_model, ctx);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        if (exit_code_for(e.code()) == kUsage) err << "Run with --help for usage.\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kDataError;
    }
    return kOk;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    std::vector<std::string> args(argv, argv + argc);
    return run(std::span<const std::string>(args), out, err);
}

}  // namespace v2v::cli
